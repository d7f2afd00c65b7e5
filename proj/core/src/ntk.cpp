#include "asru/ntk.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "asru/error.hpp"
#include "asru/gan.hpp"
#include "asru/spectral.hpp"

namespace asru {

const char* to_string(GeneratorKernelMode m) {
  return m == GeneratorKernelMode::Instantaneous ? "instantaneous" : "init_expectation";
}

GeneratorKernelMode parse_kernel_mode(const std::string& s) {
  if (s == "instantaneous") return GeneratorKernelMode::Instantaneous;
  if (s == "init_expectation") return GeneratorKernelMode::InitExpectation;
  throw Error(ErrorCode::InvalidArgument, "unknown kernel mode '" + s + "'");
}

Matrix discriminator_ntk(int units_y) {
  require(units_y >= 1, "|Y| must be positive");
  Matrix k = Matrix::Constant(units_y, units_y, 1.0 / (2.0 * std::numbers::pi));
  k.diagonal().setOnes();
  return k;
}

Matrix generator_ntk(const Vector& o_row) {
  Matrix h = softmax_jacobian(o_row);
  return h * h;
}

MonteCarloKernel generator_ntk_at_init(int units_y, long long samples, std::uint64_t seed, double logit_std) {
  require(units_y >= 1 && samples >= 2, "need |Y| >= 1 and at least two samples");
  Engine rng(seed);
  std::normal_distribution<double> nd(0.0, logit_std);
  Matrix sum = Matrix::Zero(units_y, units_y), sum2 = Matrix::Zero(units_y, units_y);
  Matrix u(1, units_y);
  for (long long s = 0; s < samples; ++s) {
    for (int y = 0; y < units_y; ++y) u(0, y) = nd(rng);
    Vector o = softmax_rows(u).row(0).transpose();
    Matrix k = generator_ntk(o);
    sum += k;
    sum2 += k.cwiseProduct(k);
  }
  const double n = static_cast<double>(samples);
  MonteCarloKernel out;
  out.samples = samples;
  out.mean = sum / n;
  Matrix var = (sum2 / n - out.mean.cwiseProduct(out.mean)).cwiseMax(0.0) * (n / (n - 1.0));
  out.std_error = (var / n).cwiseSqrt();
  out.mean = 0.5 * (out.mean + out.mean.transpose());
  return out;
}

double ntk_loss(const PositionalUnigramPair& pair, const Matrix& o, const Matrix& k_d, double tau) {
  Matrix r = pair.py - pair.px * o;
  return tau * (r * k_d).cwiseProduct(r).sum();
}

double residual_orthogonality_check(const Matrix& k_d, const PositionalUnigramPair& pair, const Matrix& o) {
  Matrix r = pair.py - pair.px * o;  // L x |Y|
  Vector v = (r * k_d).rowwise().sum();
  return v.size() ? v.cwiseAbs().maxCoeff() : 0.0;
}

namespace {

Matrix drift(const PositionalUnigramPair& pair, const Matrix& o, const Matrix& k_d, double tau,
             GeneratorKernelMode mode, const Matrix& k_init) {
  const Matrix r = pair.py - pair.px * o;
  const Matrix g = pair.px.transpose() * (r * k_d);  // |X| x |Y|
  if (mode == GeneratorKernelMode::InitExpectation) return tau * g * k_init;
  Matrix d(o.rows(), o.cols());
  for (Eigen::Index x = 0; x < o.rows(); ++x)
    d.row(x) = tau * g.row(x) * generator_ntk(o.row(x).transpose());
  return d;
}

double second_smallest_eigenvalue(const Matrix& k) {
  if (k.rows() < 2) return 0.0;
  return symmetric_eigen(0.5 * (k + k.transpose())).values[1];
}

}  // namespace

NtkResult integrate_dynamics(const PositionalUnigramPair& pair, const NtkConfig& cfg) {
  require(cfg.tau_max > 0.0, "tau_max must be positive");
  require(cfg.step >= 0.0, "step must be nonnegative");
  require(cfg.record_every >= 1, "record_every must be >= 1");
  require(pair.px.rows() == pair.py.rows(), "P^X and P^Y must share L");
  const int x = static_cast<int>(pair.px.cols()), y = static_cast<int>(pair.py.cols());

  const Matrix k_d = discriminator_ntk(y);
  Matrix k_init;
  double k_o_max = 0.25;
  if (cfg.kernel == GeneratorKernelMode::InitExpectation) {
    k_init = generator_ntk_at_init(y, cfg.mc_samples, derive_seed(cfg.seed, 1), 1.0).mean;
    k_o_max = y > 0 ? symmetric_eigen(k_init).values.maxCoeff() : 0.0;
  }

  Matrix o;
  if (cfg.initial_o) {
    o = *cfg.initial_o;
    require(o.rows() == x && o.cols() == y, "initial O has the wrong shape");
  } else {
    Engine rng(cfg.seed);
    o = softmax_rows(gaussian_matrix(x, y, cfg.init_logit_std, rng));
  }

  std::vector<double> sv = singular_values(pair.px);
  const double smax = sv.empty() ? 0.0 : sv.front();
  const double rho = cfg.tau_max * smax * smax * symmetric_eigen(k_d).values.maxCoeff() * k_o_max;
  double h = rho > 0.0 ? 1.0 / rho : 1.0;
  if (cfg.step > 0.0) h = std::min(h, cfg.step);

  NtkResult res;
  auto record = [&](double t, double c) {
    res.rows.push_back({t, c, (pair.px * o - pair.py).norm(), o.minCoeff()});
  };
  auto out_of_range = [&](const Matrix& m) {
    return m.minCoeff() < -cfg.range_eps || m.maxCoeff() > 1.0 + cfg.range_eps;
  };

  double t = 0.0;
  double c = ntk_loss(pair, o, k_d, cfg.tau_max);
  record(t, c);
  bool range_halved = false;
  while (res.steps < cfg.max_steps && t < cfg.t_end) {
    if ((pair.px * o - pair.py).norm() <= cfg.stop_residual) {
      res.converged = true;
      break;
    }
    Matrix d = drift(pair, o, k_d, cfg.tau_max, cfg.kernel, k_init);
    Matrix next = o + h * d;
    double c_next = ntk_loss(pair, next, k_d, cfg.tau_max);
    while (c_next > c + 1e-10 * std::max(1.0, c) && res.halvings < cfg.max_halvings) {
      h *= 0.5;
      ++res.halvings;
      next = o + h * d;
      c_next = ntk_loss(pair, next, k_d, cfg.tau_max);
    }
    if (out_of_range(next) && !out_of_range(o)) {
      ++res.range_warnings;
      if (!range_halved && res.halvings < cfg.max_halvings) {
        range_halved = true;
        h *= 0.5;
        ++res.halvings;
        next = o + h * d;
        c_next = ntk_loss(pair, next, k_d, cfg.tau_max);
      }
    }
    if (!next.allFinite()) throw Error(ErrorCode::Divergence, "NTK state became non-finite");
    if (c_next > c + 1e-10) res.monotone = false;
    o = std::move(next);
    c = c_next;
    t += h;
    ++res.steps;
    res.max_row_drift = std::max(res.max_row_drift, (o.rowwise().sum().array() - 1.0).abs().maxCoeff());
    if (res.steps % cfg.record_every == 0) record(t, c);
  }
  if (!res.converged && (pair.px * o - pair.py).norm() <= cfg.stop_residual) res.converged = true;
  if (res.rows.back().t != t) record(t, c);

  res.final_o = o;
  res.step = h;
  res.lambda_d = symmetric_eigen(k_d).values.minCoeff();
  if (cfg.kernel == GeneratorKernelMode::InitExpectation) {
    res.lambda_g = second_smallest_eigenvalue(k_init);
  } else {
    res.lambda_g = std::numeric_limits<double>::infinity();
    for (int r = 0; r < x; ++r)
      res.lambda_g = std::min(res.lambda_g, second_smallest_eigenvalue(generator_ntk(o.row(r).transpose())));
  }
  res.lambda_x = sv.empty() ? 0.0 : sv.back() * sv.back();
  return res;
}

LogLinearFit tail_log_linear_fit(const std::vector<TrajectoryRow>& rows, double tail_fraction) {
  require(!rows.empty(), "empty trajectory");
  require(tail_fraction > 0.0 && tail_fraction <= 1.0, "tail fraction must be in (0,1]");
  const double t_end = rows.back().t;
  const double t_start = t_end - tail_fraction * (t_end - rows.front().t);
  double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
  int n = 0;
  for (const auto& r : rows) {
    if (r.t < t_start || r.c <= 0.0) continue;
    const double ly = std::log(r.c);
    sx += r.t, sy += ly, sxx += r.t * r.t, sxy += r.t * ly, syy += ly * ly;
    ++n;
  }
  LogLinearFit fit;
  fit.points = n;
  if (n < 3) return fit;
  const double mx = sx / n, my = sy / n;
  const double vxx = sxx / n - mx * mx, vxy = sxy / n - mx * my, vyy = syy / n - my * my;
  if (vxx <= 0.0) return fit;
  fit.slope = vxy / vxx;
  fit.intercept = my - fit.slope * mx;
  fit.r2 = vyy > 0.0 ? (vxy * vxy) / (vxx * vyy) : 1.0;
  return fit;
}

}  // namespace asru
