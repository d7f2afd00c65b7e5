#include "asru/smrm.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <thread>

#include "asru/error.hpp"
#include "asru/spectral.hpp"

namespace asru {

TransitionMatrix sample_smrm(int n, std::uint64_t seed) {
  require(n >= 2, "SMRM needs n >= 2");
  Engine rng(seed);
  std::uniform_real_distribution<double> u(0.0, 2.0 * std::sqrt(3.0));
  Matrix w(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) w(i, j) = w(j, i) = u(rng);
  return from_weights(w);
}

long long GapHistogram::total() const {
  long long t = underflow + overflow;
  for (long long c : counts) t += c;
  return t;
}

namespace {

struct TrialResult {
  double min_gap = 0.0;
  int distinct = 0;
  double max_abs = 0.0;
  std::vector<double> gaps;
};

TrialResult run_trial(int n, std::uint64_t seed, double tol) {
  TransitionMatrix t = sample_smrm(n, seed);
  Vector ev = symmetric_eigen(symmetrize(t)).values;
  TrialResult r;
  r.gaps.resize(n - 1);
  r.min_gap = std::numeric_limits<double>::infinity();
  r.distinct = 1;
  for (int i = 0; i + 1 < n; ++i) {
    r.gaps[i] = std::max(0.0, ev[i + 1] - ev[i]);
    r.min_gap = std::min(r.min_gap, r.gaps[i]);
    if (r.gaps[i] > tol) ++r.distinct;
  }
  r.max_abs = ev.cwiseAbs().maxCoeff();
  return r;
}

}  // namespace

GapStatistics gap_statistics(int n, int trials, const std::vector<double>& b_list, std::uint64_t seed,
                             const GapOptions& opts) {
  require(n >= 2, "gap statistics need n >= 2");
  require(trials >= 1, "gap statistics need at least one trial");
  std::vector<TrialResult> results(trials);
  const int jobs = std::max(1, std::min(opts.jobs, trials));
  auto worker = [&](int w) {
    for (int t = w; t < trials; t += jobs) results[t] = run_trial(n, derive_seed(seed, t), opts.distinct_tolerance);
  };
  if (jobs == 1) {
    worker(0);
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < jobs; ++w) pool.emplace_back(worker, w);
    for (auto& th : pool) th.join();
  }

  GapStatistics s;
  s.n = n;
  s.trials = trials;
  s.b_list = b_list;
  const double lo = std::log10(opts.hist_low), hi = std::log10(opts.hist_high);
  const int bins = static_cast<int>(std::lround((hi - lo) * opts.bins_per_decade));
  for (int i = 0; i <= bins; ++i) s.histogram.edges.push_back(std::pow(10.0, lo + static_cast<double>(i) / opts.bins_per_decade));
  s.histogram.counts.assign(bins, 0);
  for (const auto& r : results) {
    s.min_gap.push_back(r.min_gap);
    s.distinct_count.push_back(r.distinct);
    s.max_abs_eigenvalue.push_back(r.max_abs);
    for (double g : r.gaps) {
      if (g < s.histogram.edges.front()) {
        ++s.histogram.underflow;
      } else if (g >= s.histogram.edges.back()) {
        ++s.histogram.overflow;
      } else {
        int b = static_cast<int>(std::floor((std::log10(g) - lo) * opts.bins_per_decade));
        b = std::clamp(b, 0, bins - 1);
        // guard the floor against edge roundoff
        while (b > 0 && g < s.histogram.edges[b]) --b;
        while (b + 1 < bins && g >= s.histogram.edges[b + 1]) ++b;
        ++s.histogram.counts[b];
      }
    }
  }
  for (double b : b_list) {
    const double thr = std::pow(static_cast<double>(n), -b);
    long long hits = std::count_if(s.min_gap.begin(), s.min_gap.end(), [&](double g) { return g <= thr; });
    s.exceed_fraction.push_back(static_cast<double>(hits) / trials);
  }
  return s;
}

std::vector<GapReportRow> gap_distribution_report(const GapStatistics& stats) {
  require(stats.trials >= 1, "empty gap statistics");
  std::vector<GapReportRow> rows;
  const auto& h = stats.histogram;
  rows.push_back({"hist", 0.0, h.edges.front(), static_cast<double>(h.underflow)});
  for (std::size_t i = 0; i < h.counts.size(); ++i)
    rows.push_back({"hist", h.edges[i], h.edges[i + 1], static_cast<double>(h.counts[i])});
  rows.push_back({"hist", h.edges.back(), std::numeric_limits<double>::infinity(), static_cast<double>(h.overflow)});
  for (std::size_t i = 0; i < stats.b_list.size(); ++i)
    rows.push_back({"exceed", stats.b_list[i], std::pow(static_cast<double>(stats.n), -stats.b_list[i]),
                    stats.exceed_fraction[i]});
  for (int t = 0; t < stats.trials; ++t)
    rows.push_back({"trial", static_cast<double>(t), static_cast<double>(stats.distinct_count[t]), stats.min_gap[t]});
  return rows;
}

}  // namespace asru
