#include "asru/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <Eigen/Eigenvalues>
#include <json.hpp>

#include "asru/error.hpp"

namespace asru {

SymmetricEigen symmetric_eigen(const Matrix& m) {
  require(m.rows() == m.cols(), "symmetric_eigen needs a square matrix");
  if (m.size() == 0) return {Vector(0), Matrix(0, 0)};
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale)
    throw Error(ErrorCode::InvalidArgument, "symmetric_eigen input is not symmetric");
  Eigen::SelfAdjointEigenSolver<Matrix> es(m);
  if (es.info() != Eigen::Success) throw Error(ErrorCode::Divergence, "eigensolver failed");
  return {es.eigenvalues(), es.eigenvectors()};
}

Matrix symmetrize(const TransitionMatrix& t) {
  if (!t.balance) throw Error(ErrorCode::NonReversibleNoClosedForm, "chain is not reversible");
  const Vector& d = *t.balance;
  require(d.size() == t.states() && d.minCoeff() > 0.0, "balance weights must be positive");
  Vector h = d.cwiseSqrt();
  Matrix m = h.asDiagonal() * t.probs * h.cwiseInverse().asDiagonal();
  if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-10)
    throw Error(ErrorCode::NonReversibleNoClosedForm, "balance weights do not satisfy detailed balance");
  return 0.5 * (m + m.transpose());
}

std::vector<std::complex<double>> closed_form_spectrum(const GraphSpec& spec) {
  std::vector<std::complex<double>> out;
  switch (spec.family) {
    case GraphFamily::Circulant: {
      const int n = spec.nodes;
      require(n >= 3 && !spec.action_set.empty(), "bad circulant spec");
      for (int k = 0; k < n; ++k) {
        std::complex<double> s = 0.0;
        for (int a : spec.action_set) {
          double ang = 2.0 * std::numbers::pi * static_cast<double>(((a % n) + n) % n) * k / n;
          s += std::complex<double>(std::cos(ang), std::sin(ang));
        }
        out.push_back(s / static_cast<double>(spec.action_set.size()));
      }
      break;
    }
    case GraphFamily::Hypercube: {
      const int n = spec.dimension;
      for (int v = 0; v < (1 << n); ++v)
        out.emplace_back(1.0 - 2.0 * __builtin_popcount(v) / n, 0.0);
      break;
    }
    case GraphFamily::DeBruijn:
      throw Error(ErrorCode::NotApplicable, "De Bruijn has only a superset formula");
  }
  return out;
}

DistinctValues distinct_values(const std::vector<std::complex<double>>& values, double abs_tol) {
  std::vector<std::complex<double>> sorted = values;
  std::sort(sorted.begin(), sorted.end(), [](auto a, auto b) {
    return a.real() != b.real() ? a.real() < b.real() : a.imag() < b.imag();
  });
  DistinctValues d;
  for (auto v : sorted) {
    bool merged = false;
    for (std::size_t c = 0; c < d.values.size(); ++c)
      if (std::abs(v - d.values[c]) <= abs_tol) {
        ++d.multiplicity[c];
        merged = true;
        break;
      }
    if (!merged) {
      d.values.push_back(v);
      d.multiplicity.push_back(1);
    }
  }
  return d;
}

namespace {

void fill_counts(SpectrumReport& r, const std::vector<std::complex<double>>& vals, double eig_tol) {
  double radius = 0.0;
  for (auto v : vals) radius = std::max(radius, std::abs(v));
  const double tol = eig_tol * std::max(radius, 1e-300);
  DistinctValues d = distinct_values(vals, tol);
  r.distinct_count = static_cast<int>(d.values.size());
  r.distinct_nonzero_count = 0;
  for (auto v : d.values)
    if (std::abs(v) > tol) ++r.distinct_nonzero_count;
  r.min_gap = 0.0;
  if (d.values.size() >= 2) {
    r.min_gap = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < d.values.size(); ++i)
      for (std::size_t j = i + 1; j < d.values.size(); ++j)
        r.min_gap = std::min(r.min_gap, std::abs(d.values[i] - d.values[j]));
  }
}

std::vector<std::complex<double>> union_spectrum(const GraphSpec& spec) {
  std::vector<std::complex<double>> sub = closed_form_spectrum(spec);
  std::vector<std::complex<double>> all;
  for (int c = 0; c < spec.copies; ++c) all.insert(all.end(), sub.begin(), sub.end());
  for (int f = 0; f < spec.filler_self_loops; ++f) all.emplace_back(1.0, 0.0);
  return all;
}

}  // namespace

SpectrumReport spectrum_of_chain(const TransitionMatrix& t, const std::optional<GraphSpec>& graph,
                                 double eig_tol) {
  SpectrumReport r;
  std::vector<std::complex<double>> vals;
  if (graph && graph->family != GraphFamily::DeBruijn) {
    require(graph->total_nodes() == t.states(), "graph spec does not match transition size");
    vals = union_spectrum(*graph);
    r.method = SpectrumMethod::ClosedForm;
  } else if (t.reversible()) {
    SymmetricEigen e = symmetric_eigen(symmetrize(t));
    for (Eigen::Index i = 0; i < e.values.size(); ++i) vals.emplace_back(e.values[i], 0.0);
    r.method = SpectrumMethod::SymmetrizedNumeric;
  } else {
    throw Error(ErrorCode::NonReversibleNoClosedForm,
                "spectrum requested for a non-reversible chain without closed form");
  }
  r.real = std::all_of(vals.begin(), vals.end(), [](auto v) { return std::abs(v.imag()) <= 1e-12; });
  std::sort(vals.begin(), vals.end(), [](auto a, auto b) {
    return a.real() != b.real() ? a.real() < b.real() : a.imag() < b.imag();
  });
  r.complex_eigenvalues = vals;
  if (r.real)
    for (auto v : vals) r.eigenvalues.push_back(v.real());
  fill_counts(r, vals, eig_tol);
  return r;
}

SpectrumReport spectrum_of_chain(const MarkovChain& chain, double eig_tol) {
  std::optional<GraphSpec> g;
  if (chain.provenance && chain.provenance->hamiltonian_weight == 0.0) g = chain.provenance->spec;
  return spectrum_of_chain(chain.transition, g, eig_tol);
}

std::vector<double> singular_values(const Matrix& m) {
  if (m.cols() == 0) return {};
  SymmetricEigen e = symmetric_eigen(m.transpose() * m);
  std::vector<double> s(e.values.size());
  for (Eigen::Index i = 0; i < e.values.size(); ++i)
    s[e.values.size() - 1 - i] = std::sqrt(std::max(0.0, e.values[i]));
  return s;
}

double sigma_min(const Matrix& px) {
  std::vector<double> s = singular_values(px);
  return s.empty() ? 0.0 : s.back();
}

int numerical_rank(const Matrix& m, double rel_tol) {
  std::vector<double> s = singular_values(m);
  if (s.empty() || s.front() == 0.0) return 0;
  const double floor = std::sqrt(static_cast<double>(s.size()) * std::numeric_limits<double>::epsilon());
  const double cut = std::max(rel_tol, floor) * s.front();
  return static_cast<int>(std::count_if(s.begin(), s.end(), [&](double v) { return v > cut; }));
}

namespace {

// Number of nonzero eigenspaces with a non-negligible component of pi.
int projected_eigenspaces_reversible(const MarkovChain& chain) {
  const TransitionMatrix& t = chain.transition;
  SymmetricEigen e = symmetric_eigen(symmetrize(t));
  Vector z = t.balance->cwiseSqrt().cwiseInverse().cwiseProduct(chain.initial);
  Vector proj = e.vectors.transpose() * z;
  double radius = e.values.cwiseAbs().maxCoeff();
  const double tol = kEigTolerance * radius;
  int count = 0;
  Eigen::Index i = 0;
  const Eigen::Index s = e.values.size();
  while (i < s) {
    Eigen::Index j = i;
    double norm2 = 0.0;
    while (j < s && e.values[j] - e.values[i] <= tol) norm2 += proj[j] * proj[j], ++j;
    if (std::abs(e.values[i]) > tol && std::sqrt(norm2) > kProjTolerance) ++count;
    i = j;
  }
  return count;
}

// Directed circulant unions: eigenvectors are per-block DFT modes plus filler indicators.
int projected_eigenspaces_circulant(const MarkovChain& chain) {
  const GraphProvenance& prov = *chain.provenance;
  const GraphSpec& spec = prov.spec;
  const int s = chain.states();
  Vector pi_node(s);
  for (int i = 0; i < s; ++i)
    pi_node[i] = chain.initial[prov.placement.empty() ? i : prov.placement[i]];
  const int b = spec.nodes;
  std::vector<std::complex<double>> lam = closed_form_spectrum(spec);
  struct Mode {
    std::complex<double> value;
    double weight2;
  };
  std::vector<Mode> modes;
  for (int c = 0; c < spec.copies; ++c)
    for (int k = 0; k < b; ++k) {
      std::complex<double> acc = 0.0;
      for (int j = 0; j < b; ++j) {
        double ang = -2.0 * std::numbers::pi * j * k / b;
        acc += pi_node[c * b + j] * std::complex<double>(std::cos(ang), std::sin(ang));
      }
      modes.push_back({lam[k], std::norm(acc) / b});
    }
  for (int f = spec.copies * b; f < s; ++f) modes.push_back({1.0, pi_node[f] * pi_node[f]});
  std::vector<std::complex<double>> vals;
  for (auto& m : modes) vals.push_back(m.value);
  DistinctValues d = distinct_values(vals, kEigTolerance);
  int count = 0;
  for (auto rep : d.values) {
    if (std::abs(rep) <= kEigTolerance) continue;
    double norm2 = 0.0;
    for (auto& m : modes)
      if (std::abs(m.value - rep) <= kEigTolerance) norm2 += m.weight2;
    if (std::sqrt(norm2) > kProjTolerance) ++count;
  }
  return count;
}

}  // namespace

DecipherabilityReport check_decipherability(const HmmLanguage& lang, int blocks) {
  DecipherabilityReport r;
  PositionalUnigramPair pair = exact_positional_unigrams(lang, blocks);
  std::vector<double> sv = singular_values(pair.px);
  r.sigma_max = sv.empty() ? 0.0 : sv.front();
  r.sigma_min = sv.empty() ? 0.0 : sv.back();
  r.rank_px = numerical_rank(pair.px);

  try {
    SpectrumReport spec = spectrum_of_chain(lang.chain);
    r.distinct_nonzero = spec.distinct_nonzero_count;
    r.assumption1_holds = spec.distinct_nonzero_count >= lang.units_x;
    int proj = -1;
    if (lang.chain.transition.reversible()) {
      proj = projected_eigenspaces_reversible(lang.chain);
    } else if (lang.chain.provenance && lang.chain.provenance->spec.family == GraphFamily::Circulant &&
               lang.chain.provenance->hamiltonian_weight == 0.0) {
      proj = projected_eigenspaces_circulant(lang.chain);
    }
    if (proj >= 0) {
      r.projected_eigenspaces = proj;
      r.assumption2_holds = proj >= lang.units_x;
    }
  } catch (const Error& e) {
    if (e.code() != ErrorCode::NonReversibleNoClosedForm) throw;
  }

  try {
    r.lemma_bound = lemma_sigma_bound(lang, blocks).bound;
  } catch (const Error& e) {
    if (e.code() != ErrorCode::NotApplicable && e.code() != ErrorCode::NonReversibleNoClosedForm) throw;
  }
  return r;
}

std::string DecipherabilityReport::to_json() const {
  nlohmann::ordered_json j;
  auto opt = [](const auto& v) -> nlohmann::ordered_json {
    if (v) return *v;
    return nullptr;
  };
  j["assumption1_holds"] = opt(assumption1_holds);
  j["assumption2_holds"] = opt(assumption2_holds);
  j["distinct_nonzero"] = opt(distinct_nonzero);
  j["projected_eigenspaces"] = opt(projected_eigenspaces);
  j["rank_px"] = rank_px;
  j["sigma_min"] = sigma_min;
  j["sigma_max"] = sigma_max;
  j["lemma_bound"] = opt(lemma_bound);
  return j.dump();
}

LemmaBound lemma_sigma_bound(const HmmLanguage& lang, int blocks) {
  const TransitionMatrix& t = lang.chain.transition;
  if (!t.reversible())
    throw Error(ErrorCode::NotApplicable, "lemma bound needs a reversible chain");
  const int x = lang.units_x;
  const int s = t.states();
  SymmetricEigen e = symmetric_eigen(symmetrize(t));
  const double radius = e.values.cwiseAbs().maxCoeff();
  const double tol = kEigTolerance * radius;

  // eigenvalue blocks in ascending order
  std::vector<std::pair<int, int>> groups;  // [begin, end)
  for (int i = 0; i < s;) {
    int j = i;
    while (j < s && e.values[j] - e.values[i] <= tol) ++j;
    groups.emplace_back(i, j);
    i = j;
  }
  if (static_cast<int>(groups.size()) != x)
    throw Error(ErrorCode::NotApplicable, "lemma bound needs exactly |X| distinct eigenvalues, found " +
                                              std::to_string(groups.size()));
  std::vector<double> lam;
  for (auto [b, _] : groups) lam.push_back(e.values[b]);
  for (double l : lam)
    if (std::abs(l) <= tol) throw Error(ErrorCode::NotApplicable, "lemma bound needs nonzero eigenvalues");

  LemmaBound out;
  out.delta_min = std::numeric_limits<double>::infinity();
  for (int i = 0; i + 1 < x; ++i) out.delta_min = std::min(out.delta_min, lam[i + 1] - lam[i]);
  if (x == 1) out.delta_min = 1.0;
  out.lambda_min = std::abs(lam[0]);
  for (double l : lam) out.lambda_min = std::min(out.lambda_min, std::abs(l));
  double sum = 0.0;
  for (int l = 0; l <= blocks - x - 1; ++l) sum += std::pow(out.lambda_min, 2.0 * l);
  out.decay = std::sqrt(sum);

  Matrix v(x, x);
  for (int j = 0; j < x; ++j)
    for (int c = 0; c < x; ++c) v(j, c) = std::pow(lam[j], c);
  std::vector<double> vs = singular_values(v);
  out.kappa = vs.back() > 0.0 ? vs.front() / vs.back() : std::numeric_limits<double>::infinity();

  const Vector h = t.balance->cwiseSqrt();
  const Matrix u = h.cwiseInverse().asDiagonal() * e.vectors;        // right eigenvectors
  const Matrix u_inv = e.vectors.transpose() * h.asDiagonal();       // its inverse
  Matrix selector = Matrix::Zero(s, x);
  for (int st = 0; st < s; ++st) selector(st, st % x) = 1.0;

  std::vector<Eigen::RowVectorXd> basis;  // orthonormal rows seen so far
  out.min_r_hat = std::numeric_limits<double>::infinity();
  for (auto [b, end] : groups) {
    const int n = end - b;
    Matrix omega = u_inv.middleRows(b, n);
    for (const auto& q : basis) omega -= (omega * q.transpose()) * q;
    Eigen::RowVectorXd weights = lang.chain.initial.transpose() * u.middleCols(b, n);
    Eigen::RowVectorXd r_hat = weights * omega * selector;
    out.min_r_hat = std::min(out.min_r_hat, r_hat.norm());
    for (int i = 0; i < n; ++i) {
      Eigen::RowVectorXd q = omega.row(i);
      for (const auto& p : basis) q -= q.dot(p) * p;
      double nq = q.norm();
      if (nq > 1e-14) basis.push_back(q / nq);
    }
  }
  out.bound = std::pow(out.delta_min, (x - 1.0) / (2.0 * x)) * out.decay / out.kappa * out.min_r_hat;
  out.sigma_min = sigma_min(exact_positional_unigrams(lang, blocks).px);
  return out;
}

double theorem3_threshold(long long n_x, long long n_y, int blocks, int units_x, int units_y,
                          double delta) {
  require(n_x > 0 && n_y > 0 && blocks > 0 && units_x > 0 && units_y > 0, "counts must be positive");
  require(delta > 0.0 && delta < 1.0, "delta must lie in (0,1)");
  const double nx = static_cast<double>(n_x), ny = static_cast<double>(n_y), l = blocks;
  double first = std::sqrt((4.0 * l * units_y * (nx + ny) + l * units_x * nx) / (nx * ny));
  double second = 10.0 * std::sqrt(l * std::log(1.0 / delta) / std::min(nx, ny));
  return first + second;
}

}  // namespace asru
