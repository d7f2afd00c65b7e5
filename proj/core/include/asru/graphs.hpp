#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "asru/rng.hpp"

namespace asru {

enum class GraphFamily { Circulant, DeBruijn, Hypercube };

const char* to_string(GraphFamily f);
GraphFamily parse_graph_family(const std::string& name);

struct GraphSpec {
  GraphFamily family = GraphFamily::Circulant;
  int nodes = 0;                // circulant
  std::vector<int> action_set;  // circulant offsets
  int arity = 2;                // De Bruijn k
  int word_length = 1;          // De Bruijn m
  int dimension = 1;            // hypercube
  int copies = 1;
  int filler_self_loops = 0;

  int subgraph_nodes() const;
  int total_nodes() const { return copies * subgraph_nodes() + filler_self_loops; }
};

// Row-stochastic matrix. `balance` holds the undirected edge weights d with
// d_i T_ij = d_j T_ji; present iff the chain is reversible.
struct TransitionMatrix {
  Matrix probs;
  std::optional<Vector> balance;

  int states() const { return static_cast<int>(probs.rows()); }
  bool reversible() const { return balance.has_value(); }
};

struct BuildLimits {
  std::size_t max_states = 4096;
};

// D^{-1} W for a symmetric nonnegative weight matrix W; balance = row sums.
TransitionMatrix from_weights(const Matrix& w);

TransitionMatrix build_circulant(int n, std::span<const int> action_set);
TransitionMatrix build_debruijn(int k, int m, BuildLimits limits = {});
TransitionMatrix build_hypercube(int n, BuildLimits limits = {});

// One copy of the subgraph described by spec (copies/fillers ignored).
TransitionMatrix build_subgraph(const GraphSpec& spec, BuildLimits limits = {});

// Fill copies / filler_self_loops so that spec covers target_states with
// floor(target / subgraph) copies.
GraphSpec fit_to_states(GraphSpec spec, int target_states);

TransitionMatrix assemble(const GraphSpec& spec, int target_states, BuildLimits limits = {});

// Empty cycle_order means 0 -> 1 -> ... -> S-1 -> 0.
TransitionMatrix interpolate_with_hamiltonian(const TransitionMatrix& base,
                                              std::span<const int> cycle_order, double w);

// Moves node i to state placement[i]: T'(p_i, p_j) = T(i, j).
TransitionMatrix relabel(const TransitionMatrix& t, std::span<const int> placement);

std::vector<int> random_permutation(int n, std::uint64_t seed);

// Max |row sum - 1| and min entry, for invariant checks.
double row_sum_error(const Matrix& m);

}  // namespace asru
