#include "asru/asymptotic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "asru/error.hpp"
#include "asru/spectral.hpp"

namespace asru {

Matrix min_norm_solve(const Matrix& a, const Matrix& b, double rel_tol, bool* rank_deficient) {
  require(a.rows() == b.rows(), "least squares shape mismatch");
  SymmetricEigen e = symmetric_eigen(a.transpose() * a);
  const double top = e.values.size() ? e.values.maxCoeff() : 0.0;
  // Gram eigenvalues carry roundoff of order n eps lambda_max
  const double floor = static_cast<double>(e.values.size()) * std::numeric_limits<double>::epsilon();
  const double cut = std::max(rel_tol * rel_tol, floor) * top;
  Vector inv = Vector::Zero(e.values.size());
  bool deficient = false;
  for (Eigen::Index i = 0; i < e.values.size(); ++i) {
    if (top > 0.0 && e.values[i] > cut)
      inv[i] = 1.0 / e.values[i];
    else
      deficient = true;
  }
  if (rank_deficient) *rank_deficient = deficient;
  return e.vectors * inv.asDiagonal() * e.vectors.transpose() * (a.transpose() * b);
}

std::vector<int> argmax_rows(const Matrix& m) {
  std::vector<int> out(m.rows());
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    Eigen::Index best = 0;
    for (Eigen::Index c = 1; c < m.cols(); ++c)
      if (m(r, c) > m(r, best)) best = c;
    out[r] = static_cast<int>(best);
  }
  return out;
}

RecoveredAssignment recover_pseudoinverse(const PositionalUnigramPair& pair) {
  RecoveredAssignment r;
  r.o_hat = min_norm_solve(pair.px, pair.py, kRankTolerance, &r.rank_deficient);
  r.decoded = argmax_rows(r.o_hat);
  r.residual = (pair.px * r.o_hat - pair.py).norm();
  return r;
}

Matrix permutation_matrix(const Permutation& p) {
  Matrix g = Matrix::Zero(p.size(), p.size());
  for (std::size_t x = 0; x < p.size(); ++x) g(x, p[x]) = 1.0;
  return g;
}

std::vector<Permutation> brute_force_oracle(const PositionalUnigramPair& pair, double tol) {
  const int x = static_cast<int>(pair.px.cols());
  require(pair.py.cols() == x, "oracle needs |X| = |Y|");
  require(x <= 8, "oracle limited to |X| <= 8");
  Permutation p(x);
  std::iota(p.begin(), p.end(), 0);
  std::vector<Permutation> hits;
  Matrix moved(pair.px.rows(), x);
  do {
    for (int u = 0; u < x; ++u) moved.col(p[u]) = pair.px.col(u);
    if ((moved - pair.py).norm() <= tol) hits.push_back(p);
  } while (std::next_permutation(p.begin(), p.end()));
  return hits;
}

double phoneme_error_rate(const std::vector<int>& decoded, const std::vector<int>& true_labels,
                          const Vector& weights) {
  require(decoded.size() == true_labels.size() &&
              static_cast<Eigen::Index>(decoded.size()) == weights.size(),
          "PER inputs have mismatched sizes");
  require(std::abs(weights.sum() - 1.0) <= 1e-9, "PER weights must sum to 1");
  double per = 0.0;
  for (std::size_t x = 0; x < decoded.size(); ++x)
    if (decoded[x] != true_labels[x]) per += weights[x];
  return std::clamp(per, 0.0, 1.0);
}

double phoneme_error_rate(const std::vector<int>& decoded, const Matrix& true_o, const Vector& weights) {
  return phoneme_error_rate(decoded, emission_labels(true_o), weights);
}

}  // namespace asru
