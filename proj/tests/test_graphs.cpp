#include <cmath>
#include <complex>
#include <numbers>
#include <set>

#include <gtest/gtest.h>

#include "asru/error.hpp"
#include "asru/graphs.hpp"
#include "asru/spectral.hpp"

using namespace asru;

namespace {

std::vector<double> numeric_eigs(const TransitionMatrix& t) {
  Vector v = symmetric_eigen(symmetrize(t)).values;
  return {v.data(), v.data() + v.size()};
}

std::vector<double> sorted_real(std::vector<std::complex<double>> v) {
  std::vector<double> r;
  for (auto z : v) r.push_back(z.real());
  std::sort(r.begin(), r.end());
  return r;
}

}  // namespace

TEST(Circulant, UndirectedFiveCycleRows) {
  std::vector<int> a{-1, 1};
  TransitionMatrix t = build_circulant(5, a);
  for (int i = 0; i < 5; ++i) {
    EXPECT_DOUBLE_EQ(t.probs(i, (i + 1) % 5), 0.5);
    EXPECT_DOUBLE_EQ(t.probs(i, (i + 4) % 5), 0.5);
    EXPECT_DOUBLE_EQ(t.probs.row(i).sum(), 1.0);
  }
  EXPECT_TRUE(t.reversible());
}

TEST(Circulant, FiveCycleSpectrumMatchesDft) {
  std::vector<int> a{-1, 1};
  TransitionMatrix t = build_circulant(5, a);
  std::vector<double> expect;
  for (int k = 0; k < 5; ++k) expect.push_back(std::cos(2 * std::numbers::pi * k / 5));
  std::sort(expect.begin(), expect.end());
  auto got = numeric_eigs(t);
  for (int i = 0; i < 5; ++i) EXPECT_NEAR(got[i], expect[i], 1e-12);
  GraphSpec g;
  g.nodes = 5;
  g.action_set = a;
  EXPECT_EQ(spectrum_of_chain(t, g).distinct_count, 3);
  EXPECT_EQ(spectrum_of_chain(t).distinct_count, 3);
}

TEST(Circulant, DirectedFourCycleHasUnitModulusSpectrum) {
  std::vector<int> a{1};
  TransitionMatrix t = build_circulant(4, a);
  EXPECT_FALSE(t.reversible());
  GraphSpec g;
  g.nodes = 4;
  g.action_set = a;
  auto lam = closed_form_spectrum(g);
  ASSERT_EQ(lam.size(), 4u);
  for (auto z : lam) EXPECT_NEAR(std::abs(z), 1.0, 1e-12);
  std::set<std::pair<long, long>> got;
  for (auto z : lam) got.insert({std::lround(z.real()), std::lround(z.imag())});
  EXPECT_EQ(got, (std::set<std::pair<long, long>>{{1, 0}, {0, 1}, {-1, 0}, {0, -1}}));
}

TEST(Circulant, DirectedDftEigenvectorsSatisfyEigenEquation) {
  // action sets {1..d} on 81 nodes: T v_k = lambda_k v_k for the DFT modes
  for (int d : {2, 10, 42, 74}) {
    GraphSpec g;
    g.nodes = 81;
    for (int a = 1; a <= d; ++a) g.action_set.push_back(a);
    TransitionMatrix t = build_circulant(81, g.action_set);
    auto lam = closed_form_spectrum(g);
    for (int k = 0; k < 81; k += 7) {
      Eigen::VectorXcd v(81);
      for (int j = 0; j < 81; ++j) v[j] = std::polar(1.0, 2 * std::numbers::pi * j * k / 81);
      Eigen::VectorXcd res = t.probs.cast<std::complex<double>>() * v - lam[k] * v;
      EXPECT_LT(res.norm(), 1e-10) << "d=" << d << " k=" << k;
    }
  }
}

TEST(Circulant, RejectsBadActionSets) {
  std::vector<int> empty;
  std::vector<int> zero{5};
  EXPECT_THROW(build_circulant(5, empty), Error);
  EXPECT_THROW(build_circulant(5, zero), Error);
  std::vector<int> ok{1};
  EXPECT_THROW(build_circulant(2, ok), Error);
}

TEST(DeBruijn, SmallestIsRowStochastic) {
  TransitionMatrix t = build_debruijn(2, 1);
  EXPECT_EQ(t.states(), 2);
  EXPECT_LT(row_sum_error(t.probs), 1e-12);
}

TEST(DeBruijn, ShiftRuleNeighbors) {
  TransitionMatrix t = build_debruijn(2, 2);
  // node 01 reaches 10 and 11
  EXPECT_GT(t.probs(1, 2), 0.0);
  EXPECT_GT(t.probs(1, 3), 0.0);
}

TEST(DeBruijn, SpectrumInsideCosineSet) {
  for (int k : {2, 3})
    for (int m = 1; m <= 5; ++m) {
      if (std::pow(k, m) > 256) continue;
      TransitionMatrix t = build_debruijn(k, m);
      EXPECT_LT(row_sum_error(t.probs), 1e-12);
      for (double lam : numeric_eigs(t)) {
        double best = 1e9;
        for (int j = 1; j <= m + 1; ++j)
          for (int i = 0; i < j; ++i) best = std::min(best, std::abs(lam - std::cos(i * std::numbers::pi / j)));
        EXPECT_LT(best, 1e-8) << "k=" << k << " m=" << m << " lambda=" << lam;
      }
    }
}

TEST(DeBruijn, StateCapEnforced) {
  EXPECT_THROW(build_debruijn(2, 20), Error);
  try {
    build_debruijn(4, 8, BuildLimits{1000});
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::CapExceeded);
  }
}

TEST(Hypercube, ClosedFormMatchesNumeric) {
  for (int n = 1; n <= 8; ++n) {
    TransitionMatrix t = build_hypercube(n);
    GraphSpec g;
    g.family = GraphFamily::Hypercube;
    g.dimension = n;
    auto cf = sorted_real(closed_form_spectrum(g));
    auto nu = numeric_eigs(t);
    ASSERT_EQ(cf.size(), nu.size());
    for (std::size_t i = 0; i < cf.size(); ++i) EXPECT_NEAR(cf[i], nu[i], 1e-8);
    EXPECT_EQ(spectrum_of_chain(t, g).distinct_count, n + 1);
  }
}

TEST(Hypercube, TwoAndThreeDimensions) {
  auto q2 = numeric_eigs(build_hypercube(2));
  EXPECT_NEAR(q2[0], -1, 1e-12);
  EXPECT_NEAR(q2[1], 0, 1e-12);
  EXPECT_NEAR(q2[2], 0, 1e-12);
  EXPECT_NEAR(q2[3], 1, 1e-12);
  SpectrumReport r = spectrum_of_chain(build_hypercube(2));
  EXPECT_EQ(r.distinct_count, 3);
  EXPECT_NEAR(r.min_gap, 1.0, 1e-12);
  auto q1 = build_hypercube(1);
  EXPECT_DOUBLE_EQ(q1.probs(0, 1), 1.0);
  EXPECT_DOUBLE_EQ(q1.probs(1, 0), 1.0);
}

TEST(Assemble, TwoFiveCyclesInTwelveStates) {
  GraphSpec g;
  g.nodes = 5;
  g.action_set = {-1, 1};
  g = fit_to_states(g, 12);
  EXPECT_EQ(g.copies, 2);
  EXPECT_EQ(g.filler_self_loops, 2);
  EXPECT_EQ(g.total_nodes(), 12);
  TransitionMatrix t = assemble(g, 12);
  EXPECT_EQ(t.states(), 12);
  EXPECT_DOUBLE_EQ(t.probs(10, 10), 1.0);
  EXPECT_DOUBLE_EQ(t.probs(11, 11), 1.0);
  EXPECT_DOUBLE_EQ(t.probs.block(0, 5, 5, 7).cwiseAbs().sum(), 0.0);
  EXPECT_EQ(spectrum_of_chain(t, g).distinct_count, 3);
  EXPECT_EQ(spectrum_of_chain(t).distinct_count, 3);
}

TEST(Assemble, SingleCopyEqualsSubgraph) {
  GraphSpec g;
  g.family = GraphFamily::Hypercube;
  g.dimension = 3;
  g = fit_to_states(g, 8);
  EXPECT_EQ((assemble(g, 8).probs - build_hypercube(3).probs).cwiseAbs().maxCoeff(), 0.0);
}

TEST(Assemble, UnionNeverAddsMoreThanOneDistinctValue) {
  for (int n = 3; n <= 15; n += 2)
    for (int target : {n, 2 * n + 1, 3 * n + 2}) {
      GraphSpec g;
      g.nodes = n;
      g.action_set = {-1, 1};
      g = fit_to_states(g, target);
      TransitionMatrix t = assemble(g, target);
      GraphSpec single = g;
      single.copies = 1;
      single.filler_self_loops = 0;
      EXPECT_LE(spectrum_of_chain(t).distinct_count,
                spectrum_of_chain(build_subgraph(single), single).distinct_count + 1);
    }
}

TEST(Assemble, RejectsSubgraphLargerThanTarget) {
  GraphSpec g;
  g.nodes = 13;
  g.action_set = {-1, 1};
  EXPECT_THROW(fit_to_states(g, 10), Error);
  g.copies = 1;
  EXPECT_THROW(assemble(g, 10), Error);
}

TEST(Interpolate, Endpoints) {
  std::vector<int> a{-1, 1};
  TransitionMatrix base = build_circulant(4, a);
  TransitionMatrix w0 = interpolate_with_hamiltonian(base, {}, 0.0);
  EXPECT_EQ((w0.probs - base.probs).cwiseAbs().maxCoeff(), 0.0);
  EXPECT_TRUE(w0.reversible());
  TransitionMatrix w1 = interpolate_with_hamiltonian(base, {}, 1.0);
  for (int i = 0; i < 4; ++i) EXPECT_DOUBLE_EQ(w1.probs(i, (i + 1) % 4), 1.0);
  EXPECT_FALSE(w1.reversible());
}

TEST(Interpolate, HalfWeightOnFourCycle) {
  std::vector<int> a{-1, 1};
  TransitionMatrix t = interpolate_with_hamiltonian(build_circulant(4, a), {}, 0.5);
  EXPECT_DOUBLE_EQ(t.probs(0, 0), 0.0);
  EXPECT_DOUBLE_EQ(t.probs(0, 1), 0.75);
  EXPECT_DOUBLE_EQ(t.probs(0, 2), 0.0);
  EXPECT_DOUBLE_EQ(t.probs(0, 3), 0.25);
  EXPECT_THROW(interpolate_with_hamiltonian(t, {}, 1.5), Error);
  std::vector<int> bad{0, 0, 1, 2};
  EXPECT_THROW(interpolate_with_hamiltonian(t, bad, 0.5), Error);
}

TEST(Relabel, PreservesSpectrumAndStochasticity) {
  TransitionMatrix t = build_hypercube(4);
  auto p = random_permutation(16, 9);
  TransitionMatrix r = relabel(t, p);
  EXPECT_LT(row_sum_error(r.probs), 1e-12);
  auto a = numeric_eigs(t), b = numeric_eigs(r);
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_NEAR(a[i], b[i], 1e-10);
  for (int i = 0; i < 16; ++i)
    for (int j = 0; j < 16; ++j) EXPECT_EQ(r.probs(p[i], p[j]), t.probs(i, j));
}

TEST(Graphs, SymmetrizedFormIsSymmetric) {
  std::vector<TransitionMatrix> all{build_debruijn(2, 4), build_debruijn(3, 3), build_hypercube(5)};
  std::vector<int> a{-2, -1, 1, 2};
  all.push_back(build_circulant(11, a));
  Matrix w = Matrix::Random(6, 6).cwiseAbs();
  all.push_back(from_weights(w + w.transpose()));
  for (const auto& t : all) {
    TransitionMatrix sym = t;
    Vector h = sym.balance->cwiseSqrt();
    Matrix m = h.asDiagonal() * t.probs * h.cwiseInverse().asDiagonal();
    EXPECT_LT((m - m.transpose()).cwiseAbs().maxCoeff(), 1e-10);
    EXPECT_LT(row_sum_error(t.probs), 1e-12);
    EXPECT_GE(t.probs.minCoeff(), 0.0);
    EXPECT_LE(t.probs.maxCoeff(), 1.0);
  }
}

TEST(Graphs, ClosedFormAgreesWithNumericUpTo256Nodes) {
  for (int n = 3; n <= 256; n += 11) {
    GraphSpec g;
    g.nodes = n;
    g.action_set = {-1, 1};
    if (n > 6) g.action_set = {-3, -1, 1, 3};
    TransitionMatrix t = build_circulant(n, g.action_set);
    auto cf = sorted_real(closed_form_spectrum(g));
    auto nu = numeric_eigs(t);
    for (std::size_t i = 0; i < cf.size(); ++i) EXPECT_NEAR(cf[i], nu[i], 1e-8) << n;
  }
}
