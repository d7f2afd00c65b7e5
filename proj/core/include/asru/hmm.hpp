#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "asru/graphs.hpp"

namespace asru {

// Where the chain came from; the placement maps graph node i to state placement[i].
struct GraphProvenance {
  GraphSpec spec;
  double hamiltonian_weight = 0.0;
  std::vector<int> placement;
};

struct MarkovChain {
  Vector initial;
  TransitionMatrix transition;
  std::optional<GraphProvenance> provenance;

  int states() const { return transition.states(); }
};

// States index N-grams as sum_i x_i |X|^(N-i): the last unit varies fastest,
// so the selector E keeps state % |X|.
struct HmmLanguage {
  MarkovChain chain;
  Matrix emission;  // |X| x |Y|
  int ngram = 1;
  int units_x = 0;
  int units_y = 0;

  void validate() const;
};

enum class UnitSelection { SelectedUnit, BlockAverage };

struct PositionalUnigramPair {
  Matrix px;  // L x |X|
  Matrix py;  // L x |Y|
  bool exact = true;
  long long n_x = 0;
  long long n_y = 0;

  int blocks() const { return static_cast<int>(px.rows()); }
};

struct Corpus {
  std::vector<std::vector<int>> speech;
  std::vector<std::vector<int>> text;
  bool matched = true;
  std::uint64_t seed = 0;
  int ngram = 1;
  int blocks = 0;
  int units_x = 0;
  int units_y = 0;
};

HmmLanguage make_language(MarkovChain chain, Matrix emission, int units_x, int ngram);

Vector random_initial_vector(int states, std::uint64_t seed);
Matrix random_permutation_emission(int size, std::uint64_t seed);

// Digit p (0 = most significant) of an N-gram state.
int state_digit(int state, int position, int units_x, int ngram);

PositionalUnigramPair exact_positional_unigrams(
    const HmmLanguage& lang, int blocks, UnitSelection sel = UnitSelection::SelectedUnit);

Corpus sample_corpus(const HmmLanguage& lang, int n_sequences, int blocks, bool matched,
                     std::uint64_t seed);

PositionalUnigramPair empirical_positional_unigrams(
    const Corpus& corpus, UnitSelection sel = UnitSelection::SelectedUnit);

// Relative frequency of each speech unit over every token of the corpus.
Vector speech_unit_frequencies(const Corpus& corpus);

// True label of each speech unit under a permutation emission (row argmax).
std::vector<int> emission_labels(const Matrix& emission);

// Stationary distribution proportional to the balance weights.
Vector stationary_distribution(const TransitionMatrix& t);

}  // namespace asru
