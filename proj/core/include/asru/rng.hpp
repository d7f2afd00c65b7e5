#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include <Eigen/Dense>

namespace asru {

using Engine = std::mt19937_64;
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// splitmix64 finalizer; used to derive independent child seeds.
std::uint64_t mix_seed(std::uint64_t x);
std::uint64_t derive_seed(std::uint64_t parent, std::uint64_t index);

// Inverse-CDF draws over a fixed discrete distribution.
class Categorical {
 public:
  Categorical() = default;
  explicit Categorical(const Vector& probs);
  template <class Rng>
  int operator()(Rng& rng) const {
    double u = std::uniform_real_distribution<double>(0.0, total_)(rng);
    return pick(u);
  }
  int size() const { return static_cast<int>(cdf_.size()); }

 private:
  int pick(double u) const;
  std::vector<double> cdf_;
  double total_ = 1.0;
};

Matrix gaussian_matrix(int rows, int cols, double stddev, Engine& rng);

}  // namespace asru
