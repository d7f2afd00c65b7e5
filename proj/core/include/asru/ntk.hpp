#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "asru/hmm.hpp"

namespace asru {

enum class GeneratorKernelMode { Instantaneous, InitExpectation };

const char* to_string(GeneratorKernelMode m);
GeneratorKernelMode parse_kernel_mode(const std::string& s);

// Two-layer ReLU discriminator kernel per position: 1 on the diagonal, 1/(2 pi) elsewhere.
Matrix discriminator_ntk(int units_y);

// H^2 with H = diag(o) - o o^T.
Matrix generator_ntk(const Vector& o_row);

struct MonteCarloKernel {
  Matrix mean;
  Matrix std_error;
  long long samples = 0;
};

// E[H(softmax(u))^2] over u ~ N(0, logit_std^2 I).
MonteCarloKernel generator_ntk_at_init(int units_y, long long samples, std::uint64_t seed,
                                       double logit_std = 1.0);

struct NtkConfig {
  double tau_max = 1.0;
  double step = 0.0;  // 0 selects 1 / (spectral-radius estimate)
  double t_end = std::numeric_limits<double>::infinity();
  long long max_steps = 5'000'000;
  double stop_residual = 1e-5;
  GeneratorKernelMode kernel = GeneratorKernelMode::InitExpectation;
  long long mc_samples = 200'000;
  std::uint64_t seed = 0;
  double init_logit_std = 1.0;
  std::optional<Matrix> initial_o;
  double range_eps = 0.05;
  int record_every = 1;
  int max_halvings = 40;
};

struct TrajectoryRow {
  double t = 0.0;
  double c = 0.0;
  double residual = 0.0;
  double min_entry = 0.0;
};

struct NtkResult {
  std::vector<TrajectoryRow> rows;
  Matrix final_o;
  long long steps = 0;
  double step = 0.0;
  int halvings = 0;
  int range_warnings = 0;
  double max_row_drift = 0.0;
  bool monotone = true;
  bool converged = false;
  double lambda_d = 0.0;
  double lambda_g = 0.0;
  double lambda_x = 0.0;
};

// C = tau * sum_l (P^Y_l - P^X_l O) K_D (P^Y_l - P^X_l O)^T
double ntk_loss(const PositionalUnigramPair& pair, const Matrix& o, const Matrix& k_d, double tau);

NtkResult integrate_dynamics(const PositionalUnigramPair& pair, const NtkConfig& cfg);

// max_l |1^T K_D (P^Y_l - P^X_l O)^T|
double residual_orthogonality_check(const Matrix& k_d, const PositionalUnigramPair& pair, const Matrix& o);

struct LogLinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
  int points = 0;
};

// Least-squares line through (t, log C) over the last tail_fraction of the time span.
LogLinearFit tail_log_linear_fit(const std::vector<TrajectoryRow>& rows, double tail_fraction = 0.5);

}  // namespace asru
