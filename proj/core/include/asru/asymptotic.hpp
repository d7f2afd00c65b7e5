#pragma once

#include <vector>

#include "asru/hmm.hpp"

namespace asru {

struct RecoveredAssignment {
  Matrix o_hat;
  std::vector<int> decoded;
  double residual = 0.0;
  bool rank_deficient = false;
};

// Minimum-norm least squares X minimizing ||A X - B||_F, via eigen-decomposition
// of A^T A with eigenvalues below (rel_tol * sigma_max)^2 dropped.
Matrix min_norm_solve(const Matrix& a, const Matrix& b, double rel_tol, bool* rank_deficient = nullptr);

// Row-wise argmax with lowest-index tie breaking.
std::vector<int> argmax_rows(const Matrix& m);

RecoveredAssignment recover_pseudoinverse(const PositionalUnigramPair& pair);

using Permutation = std::vector<int>;  // x -> y

Matrix permutation_matrix(const Permutation& p);

// All permutations G with ||P^X G - P^Y||_F <= tol, in lexicographic order.
std::vector<Permutation> brute_force_oracle(const PositionalUnigramPair& pair, double tol);

double phoneme_error_rate(const std::vector<int>& decoded, const std::vector<int>& true_labels,
                          const Vector& weights);
double phoneme_error_rate(const std::vector<int>& decoded, const Matrix& true_o, const Vector& weights);

}  // namespace asru
