#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "asru/graphs.hpp"

namespace asru {

TransitionMatrix sample_smrm(int n, std::uint64_t seed);

struct GapHistogram {
  std::vector<double> edges;       // log-spaced, edges.size() = counts.size() + 1
  std::vector<long long> counts;
  long long underflow = 0;         // gaps below edges.front(), including exact zeros
  long long overflow = 0;          // gaps at or above edges.back()
  long long total() const;
};

struct GapStatistics {
  int n = 0;
  int trials = 0;
  std::vector<double> min_gap;
  std::vector<int> distinct_count;
  std::vector<double> max_abs_eigenvalue;
  std::vector<double> b_list;
  std::vector<double> exceed_fraction;  // per B: fraction of trials with min_gap <= n^-B
  GapHistogram histogram;
};

struct GapOptions {
  double distinct_tolerance = 1e-7;
  int jobs = 1;
  double hist_low = 1e-16;
  double hist_high = 1.0;
  int bins_per_decade = 4;
};

GapStatistics gap_statistics(int n, int trials, const std::vector<double>& b_list, std::uint64_t seed,
                             const GapOptions& opts = {});

struct GapReportRow {
  std::string kind;  // "hist", "exceed", "trial"
  double a = 0.0;
  double b = 0.0;
  double value = 0.0;
};

std::vector<GapReportRow> gap_distribution_report(const GapStatistics& stats);

}  // namespace asru
