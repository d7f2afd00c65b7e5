#include <cmath>

#include <gtest/gtest.h>

#include "asru/error.hpp"
#include "asru/hmm.hpp"
#include "asru/smrm.hpp"

using namespace asru;

namespace {

HmmLanguage cycle_language(int units, int ngram, double w, std::uint64_t seed) {
  int s = 1;
  for (int i = 0; i < ngram; ++i) s *= units;
  std::vector<int> a{-1, 1};
  MarkovChain chain;
  chain.transition = interpolate_with_hamiltonian(build_circulant(s, a), {}, w);
  chain.initial = random_initial_vector(s, seed);
  return make_language(chain, random_permutation_emission(units, seed + 1), units, ngram);
}

}  // namespace

TEST(InitialVector, SingleState) {
  Vector v = random_initial_vector(1, 3);
  ASSERT_EQ(v.size(), 1);
  EXPECT_DOUBLE_EQ(v[0], 1.0);
}

TEST(InitialVector, Deterministic) {
  EXPECT_EQ(random_initial_vector(9, 42), random_initial_vector(9, 42));
  EXPECT_NE(random_initial_vector(9, 42), random_initial_vector(9, 43));
}

TEST(InitialVector, StrictlyInsideUnitInterval) {
  for (std::uint64_t s = 0; s < 1000; ++s) {
    Vector v = random_initial_vector(4, s);
    EXPECT_GT(v.minCoeff(), 0.0);
    EXPECT_LT(v.maxCoeff(), 1.0);
    EXPECT_NEAR(v.sum(), 1.0, 1e-12);
  }
}

TEST(PermutationEmission, Basics) {
  EXPECT_EQ(random_permutation_emission(1, 0), Matrix::Ones(1, 1));
  Matrix o = random_permutation_emission(3, 5);
  for (int r = 0; r < 3; ++r) EXPECT_DOUBLE_EQ(o.row(r).sum(), 1.0);
  for (int c = 0; c < 3; ++c) EXPECT_DOUBLE_EQ(o.col(c).sum(), 1.0);
  EXPECT_TRUE((o * o.transpose()).isApprox(Matrix::Identity(3, 3)));
}

TEST(StateDigits, LastUnitFastest) {
  // |X| = 3, N = 2: state 5 = (1, 2)
  EXPECT_EQ(state_digit(5, 0, 3, 2), 1);
  EXPECT_EQ(state_digit(5, 1, 3, 2), 2);
}

TEST(ExactUnigrams, FirstRowIsSelectedMarginalOfPi) {
  HmmLanguage lang = cycle_language(3, 2, 0.3, 7);
  PositionalUnigramPair p = exact_positional_unigrams(lang, 5);
  for (int x = 0; x < 3; ++x) {
    double m = 0;
    for (int s = 0; s < 9; ++s)
      if (s % 3 == x) m += lang.chain.initial[s];
    EXPECT_NEAR(p.px(0, x), m, 1e-15);
  }
  EXPECT_TRUE(p.exact);
}

TEST(ExactUnigrams, RowsMatchIteratedProducts) {
  HmmLanguage lang = cycle_language(2, 3, 0.6, 3);
  PositionalUnigramPair p = exact_positional_unigrams(lang, 6);
  Matrix tk = Matrix::Identity(8, 8);
  for (int k = 0; k < 6; ++k) {
    Vector v = (lang.chain.initial.transpose() * tk).transpose();
    for (int x = 0; x < 2; ++x) {
      double m = 0;
      for (int s = 0; s < 8; ++s)
        if (s % 2 == x) m += v[s];
      EXPECT_NEAR(p.px(k, x), m, 1e-13);
    }
    tk = tk * lang.chain.transition.probs;
  }
  EXPECT_LT((p.px * lang.emission - p.py).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LT((p.px.rowwise().sum().array() - 1).abs().maxCoeff(), 1e-10);
}

TEST(ExactUnigrams, StationaryChainGivesIdenticalRows) {
  TransitionMatrix t = sample_smrm(4, 11);
  MarkovChain chain{stationary_distribution(t), t, std::nullopt};
  HmmLanguage lang = make_language(chain, Matrix::Identity(4, 4), 4, 1);
  PositionalUnigramPair p = exact_positional_unigrams(lang, 7);
  for (int k = 1; k < 7; ++k) EXPECT_LT((p.px.row(k) - p.px.row(0)).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_EQ(p.px, p.py);
}

TEST(Sampling, MatchedPermutationEmission) {
  HmmLanguage lang = cycle_language(3, 2, 0.4, 21);
  Corpus c = sample_corpus(lang, 50, 6, true, 99);
  auto labels = emission_labels(lang.emission);
  ASSERT_EQ(c.speech.size(), c.text.size());
  for (std::size_t i = 0; i < c.speech.size(); ++i) {
    ASSERT_EQ(c.speech[i].size(), 12u);
    for (std::size_t t = 0; t < c.speech[i].size(); ++t) EXPECT_EQ(c.text[i][t], labels[c.speech[i][t]]);
  }
}

TEST(Sampling, DeterministicCycleFromFixedStart) {
  std::vector<int> a{-1, 1};
  MarkovChain chain;
  chain.transition = interpolate_with_hamiltonian(build_circulant(4, a), {}, 1.0);
  chain.initial = Vector::Unit(4, 2);
  HmmLanguage lang = make_language(chain, Matrix::Identity(2, 2), 2, 2);
  Corpus c = sample_corpus(lang, 20, 5, false, 1);
  for (const auto& q : c.speech) EXPECT_EQ(q, c.speech.front());
}

TEST(Sampling, BitIdenticalUnderSeed) {
  HmmLanguage lang = cycle_language(3, 1, 0.2, 4);
  Corpus a = sample_corpus(lang, 30, 8, false, 5), b = sample_corpus(lang, 30, 8, false, 5);
  EXPECT_EQ(a.speech, b.speech);
  EXPECT_EQ(a.text, b.text);
  Corpus c = sample_corpus(lang, 30, 8, false, 6);
  EXPECT_NE(a.speech, c.speech);
}

TEST(Sampling, UnmatchedStreamsAreIndependent) {
  HmmLanguage lang = cycle_language(3, 1, 0.2, 4);
  Corpus c = sample_corpus(lang, 200, 4, false, 8);
  auto labels = emission_labels(lang.emission);
  int agree = 0, total = 0;
  for (std::size_t i = 0; i < c.speech.size(); ++i)
    for (std::size_t t = 0; t < c.speech[i].size(); ++t, ++total) agree += c.text[i][t] == labels[c.speech[i][t]];
  EXPECT_LT(agree, total * 0.8);
}

TEST(Sampling, EmpiricalApproachesExact) {
  HmmLanguage lang = cycle_language(3, 2, 0.5, 12);
  const int n = 2560, blocks = 80;
  Corpus c = sample_corpus(lang, n, blocks, false, 77);
  PositionalUnigramPair emp = empirical_positional_unigrams(c);
  PositionalUnigramPair ex = exact_positional_unigrams(lang, blocks);
  for (int k = 0; k < blocks; ++k) {
    double tv = 0.5 * (emp.px.row(k) - ex.px.row(k)).cwiseAbs().sum();
    EXPECT_LT(tv, 3 * std::sqrt(3.0 / n)) << k;
  }
  EXPECT_LT((emp.px - ex.px).norm(), 3 * std::sqrt(blocks * 3.0 / n));
  EXPECT_FALSE(emp.exact);
  EXPECT_EQ(emp.n_x, n);
}

TEST(Empirical, OneHotAtSelectedUnit) {
  Corpus c;
  c.ngram = 1;
  c.blocks = 2;
  c.units_x = c.units_y = 4;
  c.speech = {{3, 1}};
  c.text = {{3, 1}};
  PositionalUnigramPair p = empirical_positional_unigrams(c);
  EXPECT_EQ(p.px.row(0), Eigen::RowVector4d(0, 0, 0, 1));
  c.ngram = 2;
  c.blocks = 1;
  p = empirical_positional_unigrams(c);
  EXPECT_EQ(p.px.row(0), Eigen::RowVector4d(0, 1, 0, 0));
  p = empirical_positional_unigrams(c, UnitSelection::BlockAverage);
  EXPECT_EQ(p.px.row(0), Eigen::RowVector4d(0, 0.5, 0, 0.5));
}

TEST(Empirical, MatchedIdentityGivesEqualMatrices) {
  std::vector<int> a{-1, 1};
  MarkovChain chain;
  chain.transition = build_circulant(9, a);
  chain.initial = random_initial_vector(9, 2);
  HmmLanguage lang = make_language(chain, Matrix::Identity(3, 3), 3, 2);
  PositionalUnigramPair p = empirical_positional_unigrams(sample_corpus(lang, 100, 5, true, 3));
  EXPECT_EQ(p.px, p.py);
  // rational with denominator n
  Matrix scaled = p.px * 100.0;
  EXPECT_LT((scaled.array() - scaled.array().round()).abs().maxCoeff(), 1e-9);
}

TEST(Empirical, RejectsRaggedCorpus) {
  Corpus c;
  c.ngram = 1;
  c.blocks = 2;
  c.units_x = c.units_y = 2;
  c.speech = {{0, 1}, {1}};
  c.text = {{0, 1}, {1, 0}};
  EXPECT_THROW(empirical_positional_unigrams(c), Error);
}

TEST(Language, ValidationRejectsBadShapes) {
  MarkovChain chain;
  chain.transition = build_hypercube(2);
  chain.initial = random_initial_vector(4, 0);
  EXPECT_THROW(make_language(chain, Matrix::Identity(3, 3), 3, 1), Error);
  EXPECT_NO_THROW(make_language(chain, Matrix::Identity(2, 2), 2, 2));
}
