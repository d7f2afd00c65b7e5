#include "asru/gan.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "asru/asymptotic.hpp"
#include "asru/error.hpp"

namespace asru {

const char* to_string(Objective o) {
  switch (o) {
    case Objective::Mmd: return "mmd";
    case Objective::Jsd: return "jsd";
    case Objective::Wasserstein: return "wasserstein";
  }
  return "?";
}
const char* to_string(Averaging a) { return a == Averaging::SoftInput ? "soft_input" : "outside_cost"; }
const char* to_string(DiscriminatorKind k) {
  return k == DiscriminatorKind::LinearPositional ? "linear" : "mlp";
}

Objective parse_objective(const std::string& s) {
  if (s == "mmd") return Objective::Mmd;
  if (s == "jsd") return Objective::Jsd;
  if (s == "wasserstein") return Objective::Wasserstein;
  throw Error(ErrorCode::InvalidArgument, "unknown objective '" + s + "'");
}
Averaging parse_averaging(const std::string& s) {
  if (s == "soft_input") return Averaging::SoftInput;
  if (s == "outside_cost") return Averaging::OutsideCost;
  throw Error(ErrorCode::InvalidArgument, "unknown averaging '" + s + "'");
}
DiscriminatorKind parse_discriminator(const std::string& s) {
  if (s == "linear") return DiscriminatorKind::LinearPositional;
  if (s == "mlp") return DiscriminatorKind::PerStepMlp;
  throw Error(ErrorCode::InvalidArgument, "unknown discriminator '" + s + "'");
}

Matrix softmax_rows(const Matrix& u) {
  Matrix o(u.rows(), u.cols());
  for (Eigen::Index r = 0; r < u.rows(); ++r) {
    Eigen::RowVectorXd e = (u.row(r).array() - u.row(r).maxCoeff()).exp();
    o.row(r) = e / e.sum();
  }
  return o;
}

Matrix Generator::assignment() const { return softmax_rows(logits); }

Matrix softmax_jacobian(const Vector& p) {
  Matrix h = -p * p.transpose();
  h.diagonal() += p;
  return h;
}

// ---- discriminator -------------------------------------------------------

int Discriminator::blocks() const {
  return kind == DiscriminatorKind::LinearPositional ? static_cast<int>(linear.rows())
                                                     : static_cast<int>(hidden.size());
}

int Discriminator::units_y() const {
  return kind == DiscriminatorKind::LinearPositional ? static_cast<int>(linear.cols())
                                                     : static_cast<int>(hidden.front().cols());
}

double Discriminator::score(int l, const Vector& p) const {
  if (kind == DiscriminatorKind::LinearPositional) return linear.row(l).dot(p);
  Vector z = hidden[l] * p;
  return output[l].dot(z.cwiseMax(0.0));
}

Vector Discriminator::input_gradient(int l, const Vector& p) const {
  if (kind == DiscriminatorKind::LinearPositional) return linear.row(l).transpose();
  Vector z = hidden[l] * p;
  Vector gate = (z.array() > 0.0).select(output[l], 0.0);
  return hidden[l].transpose() * gate;
}

Vector Discriminator::onehot_scores(int l) const {
  if (kind == DiscriminatorKind::LinearPositional) return linear.row(l).transpose();
  return hidden[l].cwiseMax(0.0).transpose() * output[l];
}

std::vector<double> Discriminator::flatten() const {
  std::vector<double> t;
  if (kind == DiscriminatorKind::LinearPositional) {
    t.assign(linear.data(), linear.data() + linear.size());
    return t;
  }
  for (std::size_t l = 0; l < hidden.size(); ++l) {
    t.insert(t.end(), hidden[l].data(), hidden[l].data() + hidden[l].size());
    t.insert(t.end(), output[l].data(), output[l].data() + output[l].size());
  }
  return t;
}

void Discriminator::unflatten(const std::vector<double>& t) {
  std::size_t k = 0;
  auto take = [&](double* dst, Eigen::Index n) {
    require(k + static_cast<std::size_t>(n) <= t.size(), "parameter vector too short");
    std::copy(t.begin() + k, t.begin() + k + n, dst);
    k += n;
  };
  if (kind == DiscriminatorKind::LinearPositional) {
    take(linear.data(), linear.size());
  } else {
    for (std::size_t l = 0; l < hidden.size(); ++l) {
      take(hidden[l].data(), hidden[l].size());
      take(output[l].data(), output[l].size());
    }
  }
  require(k == t.size(), "parameter vector too long");
}

void Discriminator::axpy(double alpha, const Discriminator& dir) {
  if (kind == DiscriminatorKind::LinearPositional) {
    linear += alpha * dir.linear;
    return;
  }
  for (std::size_t l = 0; l < hidden.size(); ++l) {
    hidden[l] += alpha * dir.hidden[l];
    output[l] += alpha * dir.output[l];
  }
}

void Discriminator::clip(double c) {
  auto cl = [c](auto& m) { m = m.cwiseMax(-c).cwiseMin(c); };
  cl(linear);
  for (auto& h : hidden) cl(h);
  for (auto& o : output) cl(o);
}

bool Discriminator::finite() const {
  if (!linear.allFinite()) return false;
  for (const auto& h : hidden)
    if (!h.allFinite()) return false;
  for (const auto& o : output)
    if (!o.allFinite()) return false;
  return true;
}

Discriminator zero_like(const Discriminator& d) {
  Discriminator z = d;
  z.linear.setZero();
  for (auto& h : z.hidden) h.setZero();
  for (auto& o : z.output) o.setZero();
  return z;
}

void reset_discriminator(Discriminator& d, Engine& rng) {
  if (d.kind == DiscriminatorKind::LinearPositional) {
    d.linear.setZero();
    return;
  }
  for (std::size_t l = 0; l < d.hidden.size(); ++l) {
    const int h = static_cast<int>(d.hidden[l].rows()), y = static_cast<int>(d.hidden[l].cols());
    d.hidden[l] = gaussian_matrix(h, y, std::sqrt(2.0 / (h + y)), rng);
    d.output[l] = gaussian_matrix(h, 1, std::sqrt(2.0 / (h + 1)), rng);
  }
}

Discriminator make_discriminator(DiscriminatorKind kind, int blocks, int units_y, int hidden, Engine& rng) {
  require(blocks >= 1 && units_y >= 1, "discriminator needs L, |Y| >= 1");
  Discriminator d;
  d.kind = kind;
  if (kind == DiscriminatorKind::LinearPositional) {
    d.linear = Matrix::Zero(blocks, units_y);
  } else {
    require(hidden >= 1, "MLP needs hidden units");
    d.hidden.assign(blocks, Matrix::Zero(hidden, units_y));
    d.output.assign(blocks, Vector::Zero(hidden));
    reset_discriminator(d, rng);
  }
  return d;
}

// ---- objectives -----------------------------------------------------------

namespace {
double softplus(double x) { return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x))); }
double sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  double e = std::exp(x);
  return e / (1.0 + e);
}
}  // namespace

double objective_a(Objective obj, double s) { return obj == Objective::Jsd ? -softplus(-s) : s; }
double objective_b(Objective obj, double s) { return obj == Objective::Jsd ? softplus(s) : s; }
double objective_da(Objective obj, double s) { return obj == Objective::Jsd ? sigmoid(-s) : 1.0; }
double objective_db(Objective obj, double s) { return obj == Objective::Jsd ? sigmoid(s) : 1.0; }

ObjectiveTerms objective_terms(Objective obj, const Vector& real, const Vector& fake) {
  ObjectiveTerms t;
  t.a = real.unaryExpr([obj](double s) { return objective_a(obj, s); });
  t.b = fake.unaryExpr([obj](double s) { return objective_b(obj, s); });
  return t;
}

Matrix generator_distribution(const Generator& gen, const Matrix& px) { return px * gen.assignment(); }

double gan_value(const Discriminator& disc, const Matrix& py, const Matrix& pg, Objective obj, Averaging avg) {
  double j = 0.0;
  for (int l = 0; l < disc.blocks(); ++l) {
    if (avg == Averaging::SoftInput) {
      j += objective_a(obj, disc.score(l, py.row(l).transpose())) -
           objective_b(obj, disc.score(l, pg.row(l).transpose()));
    } else {
      Vector s = disc.onehot_scores(l);
      for (Eigen::Index y = 0; y < s.size(); ++y)
        j += py(l, y) * objective_a(obj, s[y]) - pg(l, y) * objective_b(obj, s[y]);
    }
  }
  return j;
}

namespace {

// J^2 / |theta|^2: the squared discrepancy seen by the unit-norm witness.
double mmd_scale(const Discriminator& disc) {
  double n2 = 0.0;
  for (double v : disc.flatten()) n2 += v * v;
  return n2 > 0.0 ? 1.0 / n2 : 0.0;
}

}  // namespace

double generator_loss(const Generator& gen, const Discriminator& disc, const PositionalUnigramPair& pair,
                      Objective obj, Averaging avg) {
  double j = gan_value(disc, pair.py, generator_distribution(gen, pair.px), obj, avg);
  return obj == Objective::Mmd ? j * j * mmd_scale(disc) : j;
}

namespace {

void check_shapes(const Discriminator& disc, const Generator& gen, const PositionalUnigramPair& pair) {
  require(pair.px.rows() == pair.py.rows(), "P^X and P^Y must share L");
  require(disc.blocks() == pair.px.rows(), "discriminator L mismatch");
  require(gen.logits.rows() == pair.px.cols() && gen.logits.cols() == pair.py.cols(),
          "generator shape mismatch");
  require(disc.units_y() == pair.py.cols(), "discriminator |Y| mismatch");
}

}  // namespace

Matrix generator_gradient(const Generator& gen, const Discriminator& disc, const PositionalUnigramPair& pair,
                          Objective obj, Averaging avg) {
  check_shapes(disc, gen, pair);
  const Matrix o = gen.assignment();
  const Matrix pg = pair.px * o;
  const double scale =
      obj == Objective::Mmd ? 2.0 * gan_value(disc, pair.py, pg, obj, avg) * mmd_scale(disc) : 1.0;
  Matrix g(pg.rows(), pg.cols());  // dLoss / dP^g
  for (int l = 0; l < disc.blocks(); ++l) {
    if (avg == Averaging::SoftInput) {
      Vector p = pg.row(l).transpose();
      g.row(l) = (-objective_db(obj, disc.score(l, p)) * disc.input_gradient(l, p)).transpose();
    } else {
      Vector s = disc.onehot_scores(l);
      for (Eigen::Index y = 0; y < s.size(); ++y) g(l, y) = -objective_b(obj, s[y]);
    }
  }
  g *= scale;
  const Matrix go = pair.px.transpose() * g;
  Matrix gu(o.rows(), o.cols());
  for (Eigen::Index x = 0; x < o.rows(); ++x) {
    double inner = o.row(x).dot(go.row(x));
    gu.row(x) = o.row(x).cwiseProduct((go.row(x).array() - inner).matrix());
  }
  return gu;
}

Discriminator discriminator_gradient(const Discriminator& disc, const Generator& gen,
                                     const PositionalUnigramPair& pair, Objective obj, Averaging avg) {
  check_shapes(disc, gen, pair);
  const Matrix pg = generator_distribution(gen, pair.px);
  const Matrix& py = pair.py;
  Discriminator grad = zero_like(disc);
  for (int l = 0; l < disc.blocks(); ++l) {
    if (disc.kind == DiscriminatorKind::LinearPositional) {
      if (avg == Averaging::SoftInput) {
        const double sr = disc.linear.row(l).dot(py.row(l)), sf = disc.linear.row(l).dot(pg.row(l));
        grad.linear.row(l) = objective_da(obj, sr) * py.row(l) - objective_db(obj, sf) * pg.row(l);
      } else {
        for (Eigen::Index y = 0; y < py.cols(); ++y) {
          const double s = disc.linear(l, y);
          grad.linear(l, y) = py(l, y) * objective_da(obj, s) - pg(l, y) * objective_db(obj, s);
        }
      }
      continue;
    }
    const Matrix& w = disc.hidden[l];
    const Vector& v = disc.output[l];
    if (avg == Averaging::SoftInput) {
      auto accumulate = [&](const Vector& p, double coef) {
        Vector z = w * p;
        Vector gate = (z.array() > 0.0).select(v, 0.0);
        grad.output[l] += coef * z.cwiseMax(0.0);
        grad.hidden[l] += coef * gate * p.transpose();
      };
      Vector pr = py.row(l).transpose(), pf = pg.row(l).transpose();
      accumulate(pr, objective_da(obj, disc.score(l, pr)));
      accumulate(pf, -objective_db(obj, disc.score(l, pf)));
    } else {
      Matrix r = w.cwiseMax(0.0);
      Vector s = r.transpose() * v;
      Vector c(s.size());
      for (Eigen::Index y = 0; y < s.size(); ++y)
        c[y] = py(l, y) * objective_da(obj, s[y]) - pg(l, y) * objective_db(obj, s[y]);
      grad.output[l] = r * c;
      for (Eigen::Index y = 0; y < s.size(); ++y)
        grad.hidden[l].col(y) = c[y] * (w.col(y).array() > 0.0).select(v, 0.0);
    }
  }
  return grad;
}

// ---- training -------------------------------------------------------------

void TrainConfig::validate() const {
  require(epochs >= 0, "epochs must be >= 0");
  require(disc_steps >= 1, "need at least one discriminator step");
  require(disc_lr > 0.0 && gen_lr > 0.0, "learning rates must be positive");
  require(beta1 >= 0.0 && beta1 < 1.0 && beta2 >= 0.0 && beta2 < 1.0, "Adam decay constants in [0,1)");
  require(trace_every >= 1, "trace_every must be >= 1");
  require(!weight_clip || *weight_clip > 0.0, "weight clip must be positive");
}

Generator initial_generator(int units_x, int units_y, const TrainConfig& cfg, Engine& rng) {
  return Generator{gaussian_matrix(units_x, units_y, cfg.gen_init_std, rng)};
}

TrainResult train(const PositionalUnigramPair& pair, const TrainConfig& cfg, const std::optional<PerProbe>& probe) {
  cfg.validate();
  const int x = static_cast<int>(pair.px.cols()), y = static_cast<int>(pair.py.cols());
  const int blocks = static_cast<int>(pair.px.rows());
  Engine rng(cfg.seed);
  TrainResult res;
  res.generator = initial_generator(x, y, cfg, rng);
  res.discriminator = make_discriminator(cfg.discriminator, blocks, y, cfg.mlp_hidden, rng);
  Generator& gen = res.generator;
  Discriminator& disc = res.discriminator;

  Matrix m = Matrix::Zero(x, y), v = Matrix::Zero(x, y);
  double b1t = 1.0, b2t = 1.0;
  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    if (cfg.reset_discriminator) reset_discriminator(disc, rng);
    for (int s = 0; s < cfg.disc_steps; ++s) {
      disc.axpy(cfg.disc_lr, discriminator_gradient(disc, gen, pair, cfg.objective, cfg.averaging));
      if (cfg.weight_clip) disc.clip(*cfg.weight_clip);
    }
    if (!disc.finite())
      throw Error(ErrorCode::Divergence, "discriminator weights became non-finite at epoch " + std::to_string(epoch));

    const Matrix pg = generator_distribution(gen, pair.px);
    const double j = gan_value(disc, pair.py, pg, cfg.objective, cfg.averaging);
    const Matrix g = generator_gradient(gen, disc, pair, cfg.objective, cfg.averaging);
    b1t *= cfg.beta1;
    b2t *= cfg.beta2;
    m = cfg.beta1 * m + (1.0 - cfg.beta1) * g;
    v = cfg.beta2 * v + (1.0 - cfg.beta2) * g.cwiseProduct(g);
    Matrix mh = m / (1.0 - b1t), vh = v / (1.0 - b2t);
    gen.logits.array() -= cfg.gen_lr * mh.array() / (vh.array().sqrt() + cfg.adam_eps);
    if (!gen.logits.allFinite())
      throw Error(ErrorCode::Divergence, "generator weights became non-finite at epoch " + std::to_string(epoch));

    if (epoch % cfg.trace_every == 0 || epoch == cfg.epochs) {
      TraceRow row;
      row.step = epoch;
      row.j = j;
      const Matrix o = gen.assignment();
      row.residual = (pair.px * o - pair.py).norm();
      if (probe) row.per = phoneme_error_rate(argmax_rows(o), probe->true_labels, probe->weights);
      res.trace.push_back(row);
    }
  }
  return res;
}

// ---- ERM path -------------------------------------------------------------

Vector project_to_simplex(const Vector& v) {
  const Eigen::Index n = v.size();
  require(n >= 1, "cannot project an empty vector");
  std::vector<double> u(v.data(), v.data() + n);
  std::sort(u.begin(), u.end(), std::greater<>());
  double cum = 0.0, theta = 0.0;
  for (Eigen::Index j = 0; j < n; ++j) {
    cum += u[j];
    double t = (cum - 1.0) / static_cast<double>(j + 1);
    if (u[j] - t > 0.0) theta = t;
  }
  return (v.array() - theta).cwiseMax(0.0);
}

ErmSolution erm_least_squares(const PositionalUnigramPair& pair) {
  ErmSolution s;
  s.unprojected = min_norm_solve(pair.px, pair.py, 1e-8);
  s.projected.resize(s.unprojected.rows(), s.unprojected.cols());
  for (Eigen::Index r = 0; r < s.unprojected.rows(); ++r)
    s.projected.row(r) = project_to_simplex(s.unprojected.row(r).transpose()).transpose();
  s.residual_unprojected = (pair.px * s.unprojected - pair.py).norm();
  s.residual_projected = (pair.px * s.projected - pair.py).norm();
  s.decoded = argmax_rows(s.projected);
  return s;
}

}  // namespace asru
