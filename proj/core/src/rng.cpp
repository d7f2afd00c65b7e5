#include "asru/rng.hpp"

#include <algorithm>

#include "asru/error.hpp"

namespace asru {

std::uint64_t mix_seed(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t parent, std::uint64_t index) {
  return mix_seed(mix_seed(parent) ^ (index * 0xd1b54a32d192ed03ULL + 1));
}

Categorical::Categorical(const Vector& probs) {
  require(probs.size() > 0, "categorical needs at least one outcome");
  cdf_.resize(probs.size());
  double acc = 0.0;
  for (Eigen::Index i = 0; i < probs.size(); ++i) {
    require(probs[i] >= 0.0, "negative probability");
    acc += probs[i];
    cdf_[i] = acc;
  }
  require(acc > 0.0, "probabilities sum to zero");
  total_ = acc;
}

int Categorical::pick(double u) const {
  auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
  int k = static_cast<int>(it - cdf_.begin());
  if (k >= size()) k = size() - 1;
  // skip zero-mass outcomes that share a cdf value with their predecessor
  while (k > 0 && cdf_[k] == cdf_[k - 1] && u >= cdf_[k - 1]) --k;
  return k;
}

Matrix gaussian_matrix(int rows, int cols, double stddev, Engine& rng) {
  std::normal_distribution<double> nd(0.0, stddev);
  Matrix m(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) m(i, j) = nd(rng);
  return m;
}

}  // namespace asru
