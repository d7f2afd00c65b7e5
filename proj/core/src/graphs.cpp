#include "asru/graphs.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "asru/error.hpp"

namespace asru {

const char* to_string(GraphFamily f) {
  switch (f) {
    case GraphFamily::Circulant: return "circulant";
    case GraphFamily::DeBruijn: return "debruijn";
    case GraphFamily::Hypercube: return "hypercube";
  }
  return "?";
}

GraphFamily parse_graph_family(const std::string& name) {
  if (name == "circulant") return GraphFamily::Circulant;
  if (name == "debruijn") return GraphFamily::DeBruijn;
  if (name == "hypercube") return GraphFamily::Hypercube;
  throw Error(ErrorCode::InvalidArgument, "unknown graph family '" + name + "'");
}

namespace {

long long checked_pow(long long base, int exp, std::size_t cap) {
  long long v = 1;
  for (int i = 0; i < exp; ++i) {
    v *= base;
    if (v > static_cast<long long>(cap))
      throw Error(ErrorCode::CapExceeded,
                  std::to_string(base) + "^" + std::to_string(exp) + " exceeds state cap " +
                      std::to_string(cap));
  }
  return v;
}

int mod(int a, int n) { return ((a % n) + n) % n; }

}  // namespace

int GraphSpec::subgraph_nodes() const {
  switch (family) {
    case GraphFamily::Circulant: return nodes;
    case GraphFamily::DeBruijn: {
      long long v = 1;
      for (int i = 0; i < word_length; ++i) v *= arity;
      return static_cast<int>(v);
    }
    case GraphFamily::Hypercube: return 1 << dimension;
  }
  return 0;
}

TransitionMatrix from_weights(const Matrix& w) {
  require(w.rows() == w.cols(), "weight matrix must be square");
  require((w - w.transpose()).cwiseAbs().maxCoeff() <= 1e-12 * std::max(1.0, w.cwiseAbs().maxCoeff()),
          "weight matrix must be symmetric");
  require(w.minCoeff() >= 0.0, "weights must be nonnegative");
  Vector d = w.rowwise().sum();
  require(d.minCoeff() > 0.0, "every node needs positive total weight");
  TransitionMatrix t;
  t.probs = d.cwiseInverse().asDiagonal() * w;
  t.balance = d;
  return t;
}

TransitionMatrix build_circulant(int n, std::span<const int> action_set) {
  require(n >= 3, "circulant needs n >= 3");
  require(!action_set.empty(), "circulant action set is empty");
  std::set<int> residues;
  for (int a : action_set) {
    int r = mod(a, n);
    require(r != 0, "circulant offset " + std::to_string(a) + " is 0 mod n");
    require(residues.insert(r).second, "duplicate circulant offset mod n");
  }
  TransitionMatrix t;
  t.probs = Matrix::Zero(n, n);
  const double p = 1.0 / static_cast<double>(residues.size());
  for (int i = 0; i < n; ++i)
    for (int r : residues) t.probs(i, (i + r) % n) += p;
  bool symmetric = std::all_of(residues.begin(), residues.end(),
                               [&](int r) { return residues.count(mod(-r, n)) > 0; });
  if (symmetric) t.balance = Vector::Ones(n);
  return t;
}

TransitionMatrix build_debruijn(int k, int m, BuildLimits limits) {
  require(k >= 2 && m >= 1, "De Bruijn needs k >= 2, m >= 1");
  const int s = static_cast<int>(checked_pow(k, m, limits.max_states));
  Matrix w = Matrix::Zero(s, s);
  for (int i = 0; i < s; ++i)
    for (int c = 0; c < k; ++c) {
      int j = static_cast<int>((static_cast<long long>(i) * k) % s) + c;
      w(i, j) += 1.0;
      w(j, i) += 1.0;
    }
  TransitionMatrix t;
  t.probs = w / (2.0 * k);
  t.balance = Vector::Ones(s);
  return t;
}

TransitionMatrix build_hypercube(int n, BuildLimits limits) {
  require(n >= 1, "hypercube needs dimension >= 1");
  const int s = static_cast<int>(checked_pow(2, n, limits.max_states));
  TransitionMatrix t;
  t.probs = Matrix::Zero(s, s);
  for (int i = 0; i < s; ++i)
    for (int b = 0; b < n; ++b) t.probs(i, i ^ (1 << b)) = 1.0 / n;
  t.balance = Vector::Ones(s);
  return t;
}

TransitionMatrix build_subgraph(const GraphSpec& spec, BuildLimits limits) {
  switch (spec.family) {
    case GraphFamily::Circulant:
      if (static_cast<std::size_t>(spec.nodes) > limits.max_states)
        throw Error(ErrorCode::CapExceeded, "circulant exceeds state cap");
      return build_circulant(spec.nodes, spec.action_set);
    case GraphFamily::DeBruijn: return build_debruijn(spec.arity, spec.word_length, limits);
    case GraphFamily::Hypercube: return build_hypercube(spec.dimension, limits);
  }
  throw Error(ErrorCode::InvalidArgument, "bad family");
}

GraphSpec fit_to_states(GraphSpec spec, int target_states) {
  const int sub = spec.subgraph_nodes();
  require(sub >= 1 && sub <= target_states,
          "subgraph with " + std::to_string(sub) + " nodes does not fit " +
              std::to_string(target_states) + " states");
  spec.copies = target_states / sub;
  spec.filler_self_loops = target_states - spec.copies * sub;
  return spec;
}

TransitionMatrix assemble(const GraphSpec& spec, int target_states, BuildLimits limits) {
  require(spec.copies >= 1, "copies must be positive");
  require(spec.filler_self_loops >= 0, "negative filler count");
  require(spec.total_nodes() == target_states,
          "graph spec covers " + std::to_string(spec.total_nodes()) + " nodes, target is " +
              std::to_string(target_states));
  if (static_cast<std::size_t>(target_states) > limits.max_states)
    throw Error(ErrorCode::CapExceeded, "target states exceed cap");
  TransitionMatrix sub = build_subgraph(spec, limits);
  const int b = sub.states();
  TransitionMatrix t;
  t.probs = Matrix::Zero(target_states, target_states);
  Vector bal = Vector::Ones(target_states);
  for (int c = 0; c < spec.copies; ++c) {
    t.probs.block(c * b, c * b, b, b) = sub.probs;
    if (sub.balance) bal.segment(c * b, b) = *sub.balance;
  }
  for (int f = spec.copies * b; f < target_states; ++f) t.probs(f, f) = 1.0;
  if (sub.balance) t.balance = bal;
  return t;
}

TransitionMatrix interpolate_with_hamiltonian(const TransitionMatrix& base,
                                              std::span<const int> cycle_order, double w) {
  require(w >= 0.0 && w <= 1.0, "interpolation weight outside [0,1]");
  const int s = base.states();
  std::vector<int> order(cycle_order.begin(), cycle_order.end());
  if (order.empty()) {
    order.resize(s);
    std::iota(order.begin(), order.end(), 0);
  }
  require(static_cast<int>(order.size()) == s, "cycle order must cover all states");
  std::vector<char> seen(s, 0);
  for (int v : order) {
    require(v >= 0 && v < s && !seen[v], "cycle order is not a permutation");
    seen[v] = 1;
  }
  if (w == 0.0) return base;
  Matrix cyc = Matrix::Zero(s, s);
  for (int i = 0; i < s; ++i) cyc(order[i], order[(i + 1) % s]) = 1.0;
  TransitionMatrix t;
  t.probs = (1.0 - w) * base.probs + w * cyc;
  return t;
}

TransitionMatrix relabel(const TransitionMatrix& t, std::span<const int> placement) {
  const int s = t.states();
  require(static_cast<int>(placement.size()) == s, "placement size mismatch");
  TransitionMatrix r;
  r.probs = Matrix::Zero(s, s);
  for (int i = 0; i < s; ++i)
    for (int j = 0; j < s; ++j) r.probs(placement[i], placement[j]) = t.probs(i, j);
  if (t.balance) {
    Vector b(s);
    for (int i = 0; i < s; ++i) b[placement[i]] = (*t.balance)[i];
    r.balance = b;
  }
  return r;
}

std::vector<int> random_permutation(int n, std::uint64_t seed) {
  std::vector<int> p(n);
  std::iota(p.begin(), p.end(), 0);
  Engine rng(seed);
  // explicit Fisher-Yates; std::shuffle's draw pattern is library-specific
  for (int i = n - 1; i > 0; --i) {
    std::uniform_int_distribution<int> pick(0, i);
    std::swap(p[i], p[pick(rng)]);
  }
  return p;
}

double row_sum_error(const Matrix& m) {
  return (m.rowwise().sum().array() - 1.0).abs().maxCoeff();
}

}  // namespace asru
