#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "asru/gan.hpp"
#include "asru/graphs.hpp"
#include "asru/hmm.hpp"
#include "asru/ntk.hpp"
#include "asru/smrm.hpp"

namespace asru {

enum class ExperimentKind { AsymptoticPhase, FiniteSamplePhase, SmrmGaps, NtkConvergence, ResetAblation, AveragingAblation };
enum class Solver { Gan, Erm };

const char* to_string(ExperimentKind k);
ExperimentKind parse_experiment_kind(const std::string& s);

// Graph parameters to sweep. Exactly one list among n / action_max / m / dim drives the grid.
struct GraphGrid {
  GraphFamily family = GraphFamily::Circulant;
  std::vector<int> n;                  // circulant node counts; empty = all states
  std::vector<int> action_set{-1, 1};  // used when action_max is empty
  std::vector<int> action_max;         // action sets {1..d}
  int k = 2;
  std::vector<int> m;
  std::vector<int> dim;
  std::optional<int> copies;
  std::optional<int> target_states;
  std::vector<double> hamiltonian_weight{0.0};
};

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::AsymptoticPhase;
  GraphGrid graph;
  std::vector<int> units{10, 11, 12, 13, 14};
  int ngram = 2;
  int blocks = 20;
  int sequences = 2560;
  bool matched = false;
  bool random_placement = true;
  UnitSelection selection = UnitSelection::SelectedUnit;
  Solver solver = Solver::Gan;
  TrainConfig train;
  int seeds = 5;
  std::uint64_t seed_base = 0;
  double delta = 0.05;
  bool write_traces = false;

  std::vector<int> smrm_sizes{16, 32, 64};
  int smrm_trials = 500;
  std::vector<double> b_list{1.0, 2.0, 3.0};
  double distinct_tolerance = 1e-12;

  int languages = 20;
  int min_units = 2;
  int max_units = 6;
  double weight_low = 0.5;
  double weight_high = 0.95;
  NtkConfig ntk;

  void validate() const;
};

ExperimentConfig default_config(ExperimentKind kind);
// Overlays a JSON object on default_config(kind); unknown keys are rejected.
ExperimentConfig parse_config(ExperimentKind kind, const std::string& json_text);
ExperimentConfig load_config(ExperimentKind kind, const std::filesystem::path& path);

struct GraphCell {
  GraphSpec spec;  // fitted to the state count
  double weight = 0.0;
  int weight_index = 0;
};

std::vector<GraphCell> expand_graph_grid(const GraphGrid& grid, int target_states);

// Graph chain on |X|^N states with seeded pi, permutation O and node placement.
HmmLanguage build_graph_language(const GraphSpec& spec, double weight, int units_x, int ngram,
                                 bool random_placement, std::uint64_t seed);

// (1-w) SMRM + w cycle, N = 1; resampled until the brute-force oracle is unique.
HmmLanguage random_decipherable_language(int units_x, int blocks, double weight, std::uint64_t seed,
                                         int* attempts = nullptr);

struct PhaseRow {
  std::string experiment;
  std::string variant;
  std::string status = "ok";
  int units_x = 0;
  int units_y = 0;
  int ngram = 0;
  int blocks = 0;
  int seed = 0;
  GraphSpec graph;
  double weight = 0.0;
  std::optional<int> distinct_nonzero;
  std::optional<double> sigma_min;
  double sigma_min_exact = 0.0;
  std::optional<double> threshold;
  double per = 0.0;
  double residual = 0.0;
  double wall_time = 0.0;
  Matrix o_hat;
  std::vector<int> decoded;
  std::vector<int> true_labels;
  Vector per_weights;
  std::vector<TraceRow> trace;
};

struct CellSummary {
  std::string key;
  PhaseRow first;  // coordinates
  int count = 0;
  int errors = 0;
  double per_mean = 0.0;
  double per_min = 0.0;
  double per_max = 0.0;
  double sigma_min_mean = 0.0;
  double sigma_min_exact_mean = 0.0;
};

std::vector<PhaseRow> run_asymptotic_phase(const ExperimentConfig& cfg, int jobs = 1);
std::vector<PhaseRow> run_finite_sample_phase(const ExperimentConfig& cfg, int jobs = 1);
std::vector<PhaseRow> run_reset_ablation(const ExperimentConfig& cfg, int jobs = 1);
std::vector<PhaseRow> run_averaging_ablation(const ExperimentConfig& cfg, int jobs = 1);

std::vector<CellSummary> summarize(const std::vector<PhaseRow>& rows);

struct NtkRow {
  int language = 0;
  int units = 0;
  int blocks = 0;
  double weight = 0.0;
  int attempts = 0;
  long long steps = 0;
  double t_final = 0.0;
  double c_initial = 0.0;
  double c_final = 0.0;
  double residual = 0.0;
  bool monotone = false;
  bool converged = false;
  double r2 = 0.0;
  double slope = 0.0;
  double lambda_d = 0.0;
  double lambda_g = 0.0;
  double lambda_x = 0.0;
  int range_warnings = 0;
  int halvings = 0;
  double max_row_drift = 0.0;
  double wall_time = 0.0;
  std::string status = "ok";
  std::vector<TrajectoryRow> trajectory;
};

std::vector<NtkRow> run_ntk_convergence(const ExperimentConfig& cfg, int jobs = 1);
std::vector<GapStatistics> run_smrm_gaps(const ExperimentConfig& cfg, int jobs = 1);

// results.csv, timings.csv, summary.json, assignments.jsonl, optional trace_*.csv
void write_phase_outputs(const std::vector<PhaseRow>& rows, const std::filesystem::path& dir, bool traces);
void write_ntk_outputs(const std::vector<NtkRow>& rows, const std::filesystem::path& dir, bool traces);
void write_smrm_outputs(const std::vector<GapStatistics>& stats, const std::filesystem::path& dir);

std::string phase_csv(const std::vector<PhaseRow>& rows);

// Runs fn(i) for i in [0, n) on `jobs` threads; fn must only touch slot i.
void parallel_for(int n, int jobs, const std::function<void(int)>& fn);

}  // namespace asru
