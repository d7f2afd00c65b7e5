#include "asru/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <map>
#include <mutex>
#include <set>
#include <thread>

#include <json.hpp>

#include "asru/asymptotic.hpp"
#include "asru/error.hpp"
#include "asru/io.hpp"
#include "asru/spectral.hpp"

namespace asru {

namespace fs = std::filesystem;
using json = nlohmann::json;
using ojson = nlohmann::ordered_json;

const char* to_string(ExperimentKind k) {
  switch (k) {
    case ExperimentKind::AsymptoticPhase: return "asymptotic";
    case ExperimentKind::FiniteSamplePhase: return "finite";
    case ExperimentKind::SmrmGaps: return "smrm";
    case ExperimentKind::NtkConvergence: return "ntk";
    case ExperimentKind::ResetAblation: return "ablate-reset";
    case ExperimentKind::AveragingAblation: return "ablate-averaging";
  }
  return "?";
}

ExperimentKind parse_experiment_kind(const std::string& s) {
  for (auto k : {ExperimentKind::AsymptoticPhase, ExperimentKind::FiniteSamplePhase, ExperimentKind::SmrmGaps,
                 ExperimentKind::NtkConvergence, ExperimentKind::ResetAblation, ExperimentKind::AveragingAblation})
    if (s == to_string(k)) return k;
  throw Error(ErrorCode::InvalidArgument, "unknown experiment '" + s + "'");
}

void parallel_for(int n, int jobs, const std::function<void(int)>& fn) {
  jobs = std::max(1, std::min(jobs, n));
  if (jobs == 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr failure;
  std::mutex mu;
  std::vector<std::thread> pool;
  for (int w = 0; w < jobs; ++w)
    pool.emplace_back([&] {
      for (int i = next++; i < n; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(mu);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

// ---- configuration --------------------------------------------------------

void ExperimentConfig::validate() const {
  require(seeds >= 1, "seeds per cell must be >= 1");
  switch (kind) {
    case ExperimentKind::SmrmGaps:
      require(!smrm_sizes.empty() && smrm_trials >= 1, "SMRM grid is empty");
      for (int n : smrm_sizes) require(n >= 2, "SMRM sizes must be >= 2");
      return;
    case ExperimentKind::NtkConvergence:
      require(languages >= 1, "need at least one language");
      require(min_units >= 1 && max_units >= min_units && max_units <= 8, "unit range must lie in [1, 8]");
      require(weight_low >= 0.0 && weight_high <= 1.0 && weight_low <= weight_high, "bad weight range");
      require(blocks >= 1, "L must be >= 1");
      return;
    default: break;
  }
  require(!units.empty(), "units list is empty");
  for (int u : units) require(u >= 1, "units must be positive");
  require(ngram >= 1 && blocks >= 1, "N and L must be >= 1");
  require(!graph.hamiltonian_weight.empty(), "hamiltonian_weight list is empty");
  for (double w : graph.hamiltonian_weight) require(w >= 0.0 && w <= 1.0, "hamiltonian_weight outside [0,1]");
  if (kind != ExperimentKind::AsymptoticPhase) require(sequences >= 1, "sequences must be >= 1");
  switch (graph.family) {
    case GraphFamily::Circulant:
      require(!graph.action_max.empty() || !graph.action_set.empty(), "circulant grid is empty");
      break;
    case GraphFamily::DeBruijn: require(!graph.m.empty(), "De Bruijn grid needs m"); break;
    case GraphFamily::Hypercube: require(!graph.dim.empty(), "hypercube grid needs dim"); break;
  }
  train.validate();
}

ExperimentConfig default_config(ExperimentKind kind) {
  ExperimentConfig c;
  c.kind = kind;
  switch (kind) {
    case ExperimentKind::AsymptoticPhase:
      c.graph.family = GraphFamily::Circulant;
      for (int n = 2; n <= 20; ++n) c.graph.n.push_back(2 * n - 1);
      c.units = {10, 11, 12, 13, 14};
      c.ngram = 2;
      c.blocks = 20;
      c.seeds = 5;
      break;
    case ExperimentKind::FiniteSamplePhase:
    case ExperimentKind::ResetAblation:
    case ExperimentKind::AveragingAblation:
      c.graph.family = GraphFamily::Circulant;
      c.graph.n.clear();
      for (int d = 2; d <= 81; d += 8) c.graph.action_max.push_back(d);
      c.units = {3};
      c.ngram = 4;
      c.blocks = 80;
      c.sequences = 2560;
      c.seeds = 10;
      if (kind == ExperimentKind::ResetAblation) c.train.objective = Objective::Jsd;
      if (kind == ExperimentKind::AveragingAblation) {
        c.train.objective = Objective::Jsd;
        c.train.discriminator = DiscriminatorKind::PerStepMlp;
      }
      break;
    case ExperimentKind::SmrmGaps:
    case ExperimentKind::NtkConvergence:
      c.ngram = 1;
      c.blocks = 10;
      break;
  }
  return c;
}

namespace {

template <class T>
std::vector<T> as_list(const json& v) {
  if (v.is_array()) return v.get<std::vector<T>>();
  return {v.get<T>()};
}

void check_keys(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
  require(obj.is_object(), where + " must be an object");
  for (auto it = obj.begin(); it != obj.end(); ++it)
    if (!allowed.count(it.key())) throw Error(ErrorCode::InvalidArgument, "unknown key '" + it.key() + "' in " + where);
}

void apply_train(TrainConfig& t, const json& j) {
  check_keys(j, {"objective", "discriminator", "averaging", "epochs", "disc_steps", "reset", "disc_lr", "gen_lr",
                 "beta1", "beta2", "adam_eps", "gen_init_std", "mlp_hidden", "weight_clip", "trace_every"},
             "train");
  if (j.contains("objective")) t.objective = parse_objective(j["objective"].get<std::string>());
  if (j.contains("discriminator")) t.discriminator = parse_discriminator(j["discriminator"].get<std::string>());
  if (j.contains("averaging")) t.averaging = parse_averaging(j["averaging"].get<std::string>());
  if (j.contains("epochs")) t.epochs = j["epochs"].get<int>();
  if (j.contains("disc_steps")) t.disc_steps = j["disc_steps"].get<int>();
  if (j.contains("reset")) t.reset_discriminator = j["reset"].get<bool>();
  if (j.contains("disc_lr")) t.disc_lr = j["disc_lr"].get<double>();
  if (j.contains("gen_lr")) t.gen_lr = j["gen_lr"].get<double>();
  if (j.contains("beta1")) t.beta1 = j["beta1"].get<double>();
  if (j.contains("beta2")) t.beta2 = j["beta2"].get<double>();
  if (j.contains("adam_eps")) t.adam_eps = j["adam_eps"].get<double>();
  if (j.contains("gen_init_std")) t.gen_init_std = j["gen_init_std"].get<double>();
  if (j.contains("mlp_hidden")) t.mlp_hidden = j["mlp_hidden"].get<int>();
  if (j.contains("weight_clip") && !j["weight_clip"].is_null()) t.weight_clip = j["weight_clip"].get<double>();
  if (j.contains("trace_every")) t.trace_every = j["trace_every"].get<int>();
}

void apply_ntk(ExperimentConfig& c, const json& j) {
  check_keys(j, {"languages", "min_units", "max_units", "weight_low", "weight_high", "tau_max", "step",
                 "stop_residual", "max_steps", "t_end", "kernel", "mc_samples", "record_every", "range_eps"},
             "ntk");
  if (j.contains("languages")) c.languages = j["languages"].get<int>();
  if (j.contains("min_units")) c.min_units = j["min_units"].get<int>();
  if (j.contains("max_units")) c.max_units = j["max_units"].get<int>();
  if (j.contains("weight_low")) c.weight_low = j["weight_low"].get<double>();
  if (j.contains("weight_high")) c.weight_high = j["weight_high"].get<double>();
  NtkConfig& n = c.ntk;
  if (j.contains("tau_max")) n.tau_max = j["tau_max"].get<double>();
  if (j.contains("step")) n.step = j["step"].get<double>();
  if (j.contains("stop_residual")) n.stop_residual = j["stop_residual"].get<double>();
  if (j.contains("max_steps")) n.max_steps = j["max_steps"].get<long long>();
  if (j.contains("t_end")) n.t_end = j["t_end"].get<double>();
  if (j.contains("kernel")) n.kernel = parse_kernel_mode(j["kernel"].get<std::string>());
  if (j.contains("mc_samples")) n.mc_samples = j["mc_samples"].get<long long>();
  if (j.contains("record_every")) n.record_every = j["record_every"].get<int>();
  if (j.contains("range_eps")) n.range_eps = j["range_eps"].get<double>();
}

}  // namespace

ExperimentConfig parse_config(ExperimentKind kind, const std::string& text) {
  ExperimentConfig c = default_config(kind);
  json j;
  try {
    j = json::parse(text);
    check_keys(j, {"experiment", "family", "n", "action_set", "action_max", "k", "m", "dim", "copies",
                   "target_states", "hamiltonian_weight", "units", "ngram", "blocks", "sequences", "matched",
                   "placement", "selection", "solver", "seeds", "seed", "delta", "write_traces", "train", "smrm",
                   "ntk"},
               "config");
    if (j.contains("experiment") && parse_experiment_kind(j["experiment"].get<std::string>()) != kind)
      throw Error(ErrorCode::InvalidArgument, "config is for experiment '" + j["experiment"].get<std::string>() +
                                                  "', not '" + to_string(kind) + "'");
    GraphGrid& g = c.graph;
    if (j.contains("family")) {
      g.family = parse_graph_family(j["family"].get<std::string>());
      // a family switch drops the defaults that belong to another family
      if (!j.contains("n")) g.n.clear();
      if (!j.contains("action_max")) g.action_max.clear();
    }
    if (j.contains("n")) g.n = as_list<int>(j["n"]);
    if (j.contains("action_set")) g.action_set = as_list<int>(j["action_set"]);
    if (j.contains("action_max")) g.action_max = as_list<int>(j["action_max"]);
    if (j.contains("k")) g.k = j["k"].get<int>();
    if (j.contains("m")) g.m = as_list<int>(j["m"]);
    if (j.contains("dim")) g.dim = as_list<int>(j["dim"]);
    if (j.contains("copies")) g.copies = j["copies"].get<int>();
    if (j.contains("target_states")) g.target_states = j["target_states"].get<int>();
    if (j.contains("hamiltonian_weight")) g.hamiltonian_weight = as_list<double>(j["hamiltonian_weight"]);
    if (j.contains("units")) c.units = as_list<int>(j["units"]);
    if (j.contains("ngram")) c.ngram = j["ngram"].get<int>();
    if (j.contains("blocks")) c.blocks = j["blocks"].get<int>();
    if (j.contains("sequences")) c.sequences = j["sequences"].get<int>();
    if (j.contains("matched")) c.matched = j["matched"].get<bool>();
    if (j.contains("placement")) {
      auto p = j["placement"].get<std::string>();
      require(p == "random" || p == "identity", "placement must be 'random' or 'identity'");
      c.random_placement = p == "random";
    }
    if (j.contains("selection")) {
      auto s = j["selection"].get<std::string>();
      require(s == "selected_unit" || s == "block_average", "selection must be 'selected_unit' or 'block_average'");
      c.selection = s == "selected_unit" ? UnitSelection::SelectedUnit : UnitSelection::BlockAverage;
    }
    if (j.contains("solver")) {
      auto s = j["solver"].get<std::string>();
      require(s == "gan" || s == "erm", "solver must be 'gan' or 'erm'");
      c.solver = s == "gan" ? Solver::Gan : Solver::Erm;
    }
    if (j.contains("seeds")) c.seeds = j["seeds"].get<int>();
    if (j.contains("seed")) c.seed_base = j["seed"].get<std::uint64_t>();
    if (j.contains("delta")) c.delta = j["delta"].get<double>();
    if (j.contains("write_traces")) c.write_traces = j["write_traces"].get<bool>();
    if (j.contains("train")) apply_train(c.train, j["train"]);
    if (j.contains("smrm")) {
      const json& s = j["smrm"];
      check_keys(s, {"sizes", "trials", "b_list", "distinct_tolerance"}, "smrm");
      if (s.contains("sizes")) c.smrm_sizes = as_list<int>(s["sizes"]);
      if (s.contains("trials")) c.smrm_trials = s["trials"].get<int>();
      if (s.contains("b_list")) c.b_list = as_list<double>(s["b_list"]);
      if (s.contains("distinct_tolerance")) c.distinct_tolerance = s["distinct_tolerance"].get<double>();
    }
    if (j.contains("ntk")) apply_ntk(c, j["ntk"]);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidArgument, std::string("config: ") + e.what());
  }
  c.validate();
  return c;
}

ExperimentConfig load_config(ExperimentKind kind, const fs::path& path) {
  return parse_config(kind, read_text_file(path));
}

// ---- grid expansion and language construction ------------------------------

std::vector<GraphCell> expand_graph_grid(const GraphGrid& grid, int target_states) {
  const int target = grid.target_states.value_or(target_states);
  std::vector<GraphSpec> specs;
  switch (grid.family) {
    case GraphFamily::Circulant: {
      std::vector<int> sizes = grid.n.empty() ? std::vector<int>{target} : grid.n;
      for (int n : sizes) {
        if (!grid.action_max.empty()) {
          for (int d : grid.action_max) {
            GraphSpec s;
            s.family = GraphFamily::Circulant;
            s.nodes = n;
            for (int a = 1; a <= d; ++a) s.action_set.push_back(a);
            specs.push_back(s);
          }
        } else {
          GraphSpec s;
          s.family = GraphFamily::Circulant;
          s.nodes = n;
          s.action_set = grid.action_set;
          specs.push_back(s);
        }
      }
      break;
    }
    case GraphFamily::DeBruijn:
      for (int m : grid.m) {
        GraphSpec s;
        s.family = GraphFamily::DeBruijn;
        s.arity = grid.k;
        s.word_length = m;
        specs.push_back(s);
      }
      break;
    case GraphFamily::Hypercube:
      for (int d : grid.dim) {
        GraphSpec s;
        s.family = GraphFamily::Hypercube;
        s.dimension = d;
        specs.push_back(s);
      }
      break;
  }
  std::vector<GraphCell> cells;
  for (auto& s : specs) {
    if (grid.copies) {
      s.copies = *grid.copies;
      s.filler_self_loops = target - s.copies * s.subgraph_nodes();
    } else if (s.subgraph_nodes() >= 1 && s.subgraph_nodes() <= target) {
      s = fit_to_states(s, target);
    } else {
      s.copies = 0;
      s.filler_self_loops = 0;
    }
    for (std::size_t w = 0; w < grid.hamiltonian_weight.size(); ++w)
      cells.push_back({s, grid.hamiltonian_weight[w], static_cast<int>(w)});
  }
  return cells;
}

HmmLanguage build_graph_language(const GraphSpec& spec, double weight, int units_x, int ngram, bool random_placement,
                                 std::uint64_t seed) {
  long long states = 1;
  for (int i = 0; i < ngram; ++i) states *= units_x;
  require(states <= 4096, "state count exceeds cap");
  const int s = static_cast<int>(states);
  TransitionMatrix t = assemble(spec, s);
  if (weight > 0.0) t = interpolate_with_hamiltonian(t, {}, weight);
  std::vector<int> placement(s);
  if (random_placement) {
    placement = random_permutation(s, derive_seed(seed, 3));
  } else {
    for (int i = 0; i < s; ++i) placement[i] = i;
  }
  MarkovChain chain;
  chain.transition = relabel(t, placement);
  chain.initial = random_initial_vector(s, derive_seed(seed, 1));
  chain.provenance = GraphProvenance{spec, weight, placement};
  return make_language(std::move(chain), random_permutation_emission(units_x, derive_seed(seed, 2)), units_x, ngram);
}

HmmLanguage random_decipherable_language(int units_x, int blocks, double weight, std::uint64_t seed, int* attempts) {
  for (int a = 0; a < 1000; ++a) {
    const std::uint64_t s = derive_seed(seed, a);
    TransitionMatrix t = sample_smrm(std::max(units_x, 2), derive_seed(s, 0));
    if (units_x == 1) {
      t.probs = Matrix::Ones(1, 1);
      t.balance = Vector::Ones(1);
    }
    t = interpolate_with_hamiltonian(t, {}, weight);
    MarkovChain chain;
    chain.transition = std::move(t);
    chain.initial = random_initial_vector(units_x, derive_seed(s, 1));
    HmmLanguage lang = make_language(std::move(chain), random_permutation_emission(units_x, derive_seed(s, 2)), units_x, 1);
    if (brute_force_oracle(exact_positional_unigrams(lang, blocks), 1e-8).size() == 1) {
      if (attempts) *attempts = a + 1;
      return lang;
    }
  }
  throw Error(ErrorCode::NotApplicable, "no decipherable language found in 1000 attempts");
}

// ---- phase experiments ----------------------------------------------------

namespace {

std::uint64_t cell_seed(std::uint64_t base, int seed_index, int units, const GraphCell& cell) {
  std::uint64_t h = derive_seed(base, static_cast<std::uint64_t>(seed_index));
  h = derive_seed(h, static_cast<std::uint64_t>(units));
  h = derive_seed(h, static_cast<std::uint64_t>(cell.spec.family));
  h = derive_seed(h, static_cast<std::uint64_t>(cell.spec.nodes));
  for (int a : cell.spec.action_set) h = derive_seed(h, static_cast<std::uint64_t>(a + 1000003));
  h = derive_seed(h, static_cast<std::uint64_t>(cell.spec.arity * 1000 + cell.spec.word_length));
  h = derive_seed(h, static_cast<std::uint64_t>(cell.spec.dimension));
  return derive_seed(h, static_cast<std::uint64_t>(cell.weight_index));
}

struct Job {
  int units;
  GraphCell cell;
  int seed;
  std::string variant;
};

std::vector<Job> enumerate_jobs(const ExperimentConfig& cfg, const std::vector<std::string>& variants) {
  std::vector<Job> jobs;
  for (int u : cfg.units) {
    long long states = 1;
    for (int i = 0; i < cfg.ngram; ++i) states *= u;
    for (const auto& cell : expand_graph_grid(cfg.graph, static_cast<int>(std::min<long long>(states, 1 << 30))))
      for (const auto& v : variants)
        for (int s = 0; s < cfg.seeds; ++s) jobs.push_back({u, cell, s, v});
  }
  return jobs;
}

PhaseRow base_row(const ExperimentConfig& cfg, const Job& job) {
  PhaseRow r;
  r.experiment = to_string(cfg.kind);
  r.variant = job.variant;
  r.units_x = job.units;
  r.units_y = job.units;
  r.ngram = cfg.ngram;
  r.blocks = cfg.blocks;
  r.seed = job.seed;
  r.graph = job.cell.spec;
  r.weight = job.cell.weight;
  r.per = std::numeric_limits<double>::quiet_NaN();
  r.residual = std::numeric_limits<double>::quiet_NaN();
  r.sigma_min_exact = std::numeric_limits<double>::quiet_NaN();
  return r;
}

std::string sanitize(std::string s) {
  for (char& ch : s)
    if (ch == ',' || ch == '\n' || ch == '"') ch = ';';
  return s;
}

template <class Fn>
std::vector<PhaseRow> run_jobs(const ExperimentConfig& cfg, const std::vector<Job>& jobs, int n_jobs, Fn body) {
  std::vector<PhaseRow> rows(jobs.size());
  parallel_for(static_cast<int>(jobs.size()), n_jobs, [&](int i) {
    const auto t0 = std::chrono::steady_clock::now();
    PhaseRow r = base_row(cfg, jobs[i]);
    try {
      require(jobs[i].cell.spec.copies >= 1, "graph does not fit the state count");
      body(jobs[i], r);
    } catch (const std::exception& e) {
      r.status = "error:" + sanitize(e.what());
    }
    r.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    rows[i] = std::move(r);
  });
  return rows;
}

void finite_body(const ExperimentConfig& cfg, const Job& job, PhaseRow& r, const TrainConfig& train) {
  const std::uint64_t cs = cell_seed(cfg.seed_base, job.seed, job.units, job.cell);
  HmmLanguage lang = build_graph_language(job.cell.spec, job.cell.weight, job.units, cfg.ngram, cfg.random_placement, cs);
  r.sigma_min_exact = sigma_min(exact_positional_unigrams(lang, cfg.blocks, cfg.selection).px);
  Corpus corpus = sample_corpus(lang, cfg.sequences, cfg.blocks, cfg.matched, derive_seed(cs, 4));
  PositionalUnigramPair pair = empirical_positional_unigrams(corpus, cfg.selection);
  r.sigma_min = sigma_min(pair.px);
  r.threshold = theorem3_threshold(pair.n_x, pair.n_y, cfg.blocks, lang.units_x, lang.units_y, cfg.delta);
  r.true_labels = emission_labels(lang.emission);
  r.per_weights = speech_unit_frequencies(corpus);
  if (cfg.solver == Solver::Gan) {
    TrainConfig tc = train;
    tc.seed = derive_seed(cs, 5);
    TrainResult res = asru::train(pair, tc, PerProbe{r.true_labels, r.per_weights});
    r.o_hat = res.generator.assignment();
    if (cfg.write_traces) r.trace = std::move(res.trace);
  } else {
    r.o_hat = erm_least_squares(pair).projected;
  }
  r.decoded = argmax_rows(r.o_hat);
  r.per = phoneme_error_rate(r.decoded, r.true_labels, r.per_weights);
  r.residual = (pair.px * r.o_hat - pair.py).norm();
}

}  // namespace

std::vector<PhaseRow> run_asymptotic_phase(const ExperimentConfig& cfg, int jobs) {
  cfg.validate();
  return run_jobs(cfg, enumerate_jobs(cfg, {"pinv"}), jobs, [&](const Job& job, PhaseRow& r) {
    const std::uint64_t cs = cell_seed(cfg.seed_base, job.seed, job.units, job.cell);
    HmmLanguage lang = build_graph_language(job.cell.spec, job.cell.weight, job.units, cfg.ngram, cfg.random_placement, cs);
    try {
      r.distinct_nonzero = spectrum_of_chain(lang.chain).distinct_nonzero_count;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::NonReversibleNoClosedForm) throw;
    }
    PositionalUnigramPair pair = exact_positional_unigrams(lang, cfg.blocks, cfg.selection);
    r.sigma_min_exact = sigma_min(pair.px);
    RecoveredAssignment rec = recover_pseudoinverse(pair);
    r.o_hat = rec.o_hat;
    r.decoded = rec.decoded;
    r.true_labels = emission_labels(lang.emission);
    r.per_weights = Vector::Constant(job.units, 1.0 / job.units);
    r.per = phoneme_error_rate(r.decoded, r.true_labels, r.per_weights);
    r.residual = rec.residual;
  });
}

std::vector<PhaseRow> run_finite_sample_phase(const ExperimentConfig& cfg, int jobs) {
  cfg.validate();
  const std::string variant = cfg.solver == Solver::Gan ? "gan" : "erm";
  return run_jobs(cfg, enumerate_jobs(cfg, {variant}), jobs,
                  [&](const Job& job, PhaseRow& r) { finite_body(cfg, job, r, cfg.train); });
}

std::vector<PhaseRow> run_reset_ablation(const ExperimentConfig& cfg, int jobs) {
  cfg.validate();
  require(cfg.solver == Solver::Gan, "reset ablation needs the GAN solver");
  return run_jobs(cfg, enumerate_jobs(cfg, {"reset=on", "reset=off"}), jobs, [&](const Job& job, PhaseRow& r) {
    TrainConfig tc = cfg.train;
    tc.reset_discriminator = job.variant == "reset=on";
    finite_body(cfg, job, r, tc);
  });
}

std::vector<PhaseRow> run_averaging_ablation(const ExperimentConfig& cfg, int jobs) {
  cfg.validate();
  require(cfg.solver == Solver::Gan, "averaging ablation needs the GAN solver");
  return run_jobs(cfg, enumerate_jobs(cfg, {"soft_input", "outside_cost"}), jobs, [&](const Job& job, PhaseRow& r) {
    TrainConfig tc = cfg.train;
    tc.averaging = parse_averaging(job.variant);
    finite_body(cfg, job, r, tc);
  });
}

// ---- output ---------------------------------------------------------------

namespace {

std::string actions_string(const std::vector<int>& a) {
  bool contiguous = a.size() >= 2;
  for (std::size_t i = 1; i < a.size() && contiguous; ++i) contiguous = a[i] == a[i - 1] + 1;
  if (contiguous) return std::to_string(a.front()) + ".." + std::to_string(a.back());
  return labels_to_string(a);
}

std::string opt(const std::optional<double>& v) { return v ? format_number(*v) : std::string(); }
std::string opt(const std::optional<int>& v) { return v ? std::to_string(*v) : std::string(); }

std::string cell_key(const PhaseRow& r) {
  const GraphSpec& g = r.graph;
  std::string k = r.experiment + '|' + to_string(g.family) + '|' + std::to_string(r.units_x) + '|' +
                  std::to_string(r.ngram) + '|' + std::to_string(r.blocks) + '|';
  if (g.family == GraphFamily::Circulant) k += std::to_string(g.nodes) + '|' + actions_string(g.action_set);
  if (g.family == GraphFamily::DeBruijn) k += std::to_string(g.arity) + '|' + std::to_string(g.word_length);
  if (g.family == GraphFamily::Hypercube) k += std::to_string(g.dimension);
  return k + '|' + format_number(r.weight) + '|' + r.variant;
}

ojson coordinates(const PhaseRow& r) {
  ojson j;
  const GraphSpec& g = r.graph;
  j["experiment"] = r.experiment;
  j["family"] = to_string(g.family);
  j["units_x"] = r.units_x;
  j["ngram"] = r.ngram;
  j["blocks"] = r.blocks;
  if (g.family == GraphFamily::Circulant) {
    j["n"] = g.nodes;
    j["actions"] = actions_string(g.action_set);
  } else if (g.family == GraphFamily::DeBruijn) {
    j["k"] = g.arity;
    j["m"] = g.word_length;
  } else {
    j["dim"] = g.dimension;
  }
  j["copies"] = g.copies;
  j["fillers"] = g.filler_self_loops;
  j["weight"] = r.weight;
  j["variant"] = r.variant;
  return j;
}

ojson number_or_null(double v) {
  if (std::isfinite(v)) return v;
  return nullptr;
}

}  // namespace

std::vector<CellSummary> summarize(const std::vector<PhaseRow>& rows) {
  std::vector<CellSummary> out;
  std::map<std::string, std::size_t> index;
  for (const auto& r : rows) {
    std::string key = cell_key(r);
    auto it = index.find(key);
    if (it == index.end()) {
      it = index.emplace(key, out.size()).first;
      CellSummary s;
      s.key = key;
      s.first = r;
      s.first.o_hat.resize(0, 0);
      s.first.trace.clear();
      s.per_min = std::numeric_limits<double>::infinity();
      s.per_max = -std::numeric_limits<double>::infinity();
      out.push_back(std::move(s));
    }
    CellSummary& s = out[it->second];
    if (r.status != "ok") {
      ++s.errors;
      continue;
    }
    ++s.count;
    s.per_mean += r.per;
    s.per_min = std::min(s.per_min, r.per);
    s.per_max = std::max(s.per_max, r.per);
    s.sigma_min_mean += r.sigma_min.value_or(r.sigma_min_exact);
    s.sigma_min_exact_mean += r.sigma_min_exact;
  }
  for (auto& s : out) {
    if (s.count == 0) {
      s.per_mean = s.per_min = s.per_max = s.sigma_min_mean = s.sigma_min_exact_mean =
          std::numeric_limits<double>::quiet_NaN();
      continue;
    }
    s.per_mean /= s.count;
    s.sigma_min_mean /= s.count;
    s.sigma_min_exact_mean /= s.count;
  }
  return out;
}

std::string phase_csv(const std::vector<PhaseRow>& rows) {
  std::string s =
      "experiment,family,units_x,units_y,ngram,blocks,n,actions,k,m,dim,copies,fillers,weight,variant,seed,"
      "distinct_nonzero,sigma_min,sigma_min_exact,threshold,per,residual,status\n";
  for (const auto& r : rows) {
    const GraphSpec& g = r.graph;
    const bool circ = g.family == GraphFamily::Circulant, db = g.family == GraphFamily::DeBruijn,
               hc = g.family == GraphFamily::Hypercube;
    s += r.experiment + ',' + to_string(g.family) + ',' + std::to_string(r.units_x) + ',' +
         std::to_string(r.units_y) + ',' + std::to_string(r.ngram) + ',' + std::to_string(r.blocks) + ',' +
         (circ ? std::to_string(g.nodes) : "") + ',' + (circ ? actions_string(g.action_set) : "") + ',' +
         (db ? std::to_string(g.arity) : "") + ',' + (db ? std::to_string(g.word_length) : "") + ',' +
         (hc ? std::to_string(g.dimension) : "") + ',' + std::to_string(g.copies) + ',' +
         std::to_string(g.filler_self_loops) + ',' + format_number(r.weight) + ',' + r.variant + ',' +
         std::to_string(r.seed) + ',' + opt(r.distinct_nonzero) + ',' + opt(r.sigma_min) + ',' +
         format_number(r.sigma_min_exact) + ',' + opt(r.threshold) + ',' + format_number(r.per) + ',' +
         format_number(r.residual) + ',' + r.status + '\n';
  }
  return s;
}

void write_phase_outputs(const std::vector<PhaseRow>& rows, const fs::path& dir, bool traces) {
  fs::create_directories(dir);
  write_text_file(dir / "results.csv", phase_csv(rows));

  std::string timings = "row,wall_time_s\n";
  for (std::size_t i = 0; i < rows.size(); ++i) timings += std::to_string(i) + ',' + format_number(rows[i].wall_time) + '\n';
  write_text_file(dir / "timings.csv", timings);

  std::string lines;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const PhaseRow& r = rows[i];
    ojson j;
    j["row"] = i;
    std::vector<std::vector<double>> o(r.o_hat.rows(), std::vector<double>(r.o_hat.cols()));
    for (Eigen::Index a = 0; a < r.o_hat.rows(); ++a)
      for (Eigen::Index b = 0; b < r.o_hat.cols(); ++b) o[a][b] = r.o_hat(a, b);
    j["o_hat"] = o;
    j["decoded"] = r.decoded;
    j["true_labels"] = r.true_labels;
    j["per_weights"] = std::vector<double>(r.per_weights.data(), r.per_weights.data() + r.per_weights.size());
    j["per"] = number_or_null(r.per);
    lines += j.dump() + '\n';
  }
  write_text_file(dir / "assignments.jsonl", lines);

  ojson summary = ojson::array();
  for (const auto& s : summarize(rows)) {
    ojson j = coordinates(s.first);
    j["seeds"] = s.count;
    j["errors"] = s.errors;
    j["per_mean"] = number_or_null(s.per_mean);
    j["per_min"] = number_or_null(s.per_min);
    j["per_max"] = number_or_null(s.per_max);
    j["sigma_min_mean"] = number_or_null(s.sigma_min_mean);
    j["sigma_min_exact_mean"] = number_or_null(s.sigma_min_exact_mean);
    if (s.first.distinct_nonzero) j["distinct_nonzero"] = *s.first.distinct_nonzero;
    if (s.first.threshold) j["threshold"] = *s.first.threshold;
    summary.push_back(j);
  }
  write_text_file(dir / "summary.json", ojson{{"cells", summary}}.dump(2) + "\n");

  if (traces)
    for (std::size_t i = 0; i < rows.size(); ++i)
      if (!rows[i].trace.empty()) write_trace_csv(dir / ("trace_" + std::to_string(i) + ".csv"), rows[i].trace);
}

// ---- NTK and SMRM ---------------------------------------------------------

std::vector<NtkRow> run_ntk_convergence(const ExperimentConfig& cfg, int jobs) {
  cfg.validate();
  std::vector<NtkRow> rows(cfg.languages);
  parallel_for(cfg.languages, jobs, [&](int i) {
    const auto t0 = std::chrono::steady_clock::now();
    NtkRow& r = rows[i];
    r.language = i;
    r.blocks = cfg.blocks;
    const std::uint64_t ls = derive_seed(cfg.seed_base, static_cast<std::uint64_t>(i));
    Engine rng(ls);
    r.units = std::uniform_int_distribution<int>(cfg.min_units, cfg.max_units)(rng);
    r.weight = std::uniform_real_distribution<double>(cfg.weight_low, cfg.weight_high)(rng);
    try {
      HmmLanguage lang = random_decipherable_language(r.units, cfg.blocks, r.weight, derive_seed(ls, 1), &r.attempts);
      PositionalUnigramPair pair = exact_positional_unigrams(lang, cfg.blocks);
      NtkConfig nc = cfg.ntk;
      nc.seed = derive_seed(ls, 2);
      NtkResult res = integrate_dynamics(pair, nc);
      LogLinearFit fit = tail_log_linear_fit(res.rows, 0.5);
      r.steps = res.steps;
      r.t_final = res.rows.back().t;
      r.c_initial = res.rows.front().c;
      r.c_final = res.rows.back().c;
      r.residual = res.rows.back().residual;
      r.monotone = res.monotone;
      r.converged = res.converged;
      r.r2 = fit.r2;
      r.slope = fit.slope;
      r.lambda_d = res.lambda_d;
      r.lambda_g = res.lambda_g;
      r.lambda_x = res.lambda_x;
      r.range_warnings = res.range_warnings;
      r.halvings = res.halvings;
      r.max_row_drift = res.max_row_drift;
      r.trajectory = std::move(res.rows);
    } catch (const std::exception& e) {
      r.status = "error:" + sanitize(e.what());
    }
    r.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  });
  return rows;
}

void write_ntk_outputs(const std::vector<NtkRow>& rows, const fs::path& dir, bool traces) {
  fs::create_directories(dir);
  std::string s =
      "language,units,blocks,weight,attempts,steps,t_final,C_initial,C_final,frobenius_residual,monotone,converged,"
      "tail_r2,tail_slope,lambda_d,lambda_g,lambda_x,range_warnings,halvings,max_row_drift,status\n";
  std::string timings = "row,wall_time_s\n";
  int converged = 0, monotone = 0;
  for (const auto& r : rows) {
    s += std::to_string(r.language) + ',' + std::to_string(r.units) + ',' + std::to_string(r.blocks) + ',' +
         format_number(r.weight) + ',' + std::to_string(r.attempts) + ',' + std::to_string(r.steps) + ',' +
         format_number(r.t_final) + ',' + format_number(r.c_initial) + ',' + format_number(r.c_final) + ',' +
         format_number(r.residual) + ',' + (r.monotone ? "1" : "0") + ',' + (r.converged ? "1" : "0") + ',' +
         format_number(r.r2) + ',' + format_number(r.slope) + ',' + format_number(r.lambda_d) + ',' +
         format_number(r.lambda_g) + ',' + format_number(r.lambda_x) + ',' + std::to_string(r.range_warnings) + ',' +
         std::to_string(r.halvings) + ',' + format_number(r.max_row_drift) + ',' + r.status + '\n';
    timings += std::to_string(r.language) + ',' + format_number(r.wall_time) + '\n';
    converged += r.converged;
    monotone += r.monotone;
    if (traces && !r.trajectory.empty())
      write_trajectory_csv(dir / ("trace_" + std::to_string(r.language) + ".csv"), r.trajectory);
  }
  write_text_file(dir / "results.csv", s);
  write_text_file(dir / "timings.csv", timings);
  ojson sum;
  sum["languages"] = rows.size();
  sum["converged"] = converged;
  sum["monotone"] = monotone;
  double worst_r2 = 1.0, worst_res = 0.0;
  for (const auto& r : rows) {
    worst_r2 = std::min(worst_r2, r.r2);
    worst_res = std::max(worst_res, r.residual);
  }
  sum["min_tail_r2"] = worst_r2;
  sum["max_final_residual"] = worst_res;
  write_text_file(dir / "summary.json", sum.dump(2) + "\n");
}

std::vector<GapStatistics> run_smrm_gaps(const ExperimentConfig& cfg, int jobs) {
  cfg.validate();
  std::vector<GapStatistics> out;
  GapOptions opts;
  opts.distinct_tolerance = cfg.distinct_tolerance;
  opts.jobs = jobs;
  for (int n : cfg.smrm_sizes)
    out.push_back(gap_statistics(n, cfg.smrm_trials, cfg.b_list, derive_seed(cfg.seed_base, static_cast<std::uint64_t>(n)), opts));
  return out;
}

void write_smrm_outputs(const std::vector<GapStatistics>& stats, const fs::path& dir) {
  fs::create_directories(dir);
  std::string s = "n,trial,min_gap,distinct_count,max_abs_eigenvalue\n";
  ojson cells = ojson::array();
  for (const auto& g : stats) {
    for (int t = 0; t < g.trials; ++t)
      s += std::to_string(g.n) + ',' + std::to_string(t) + ',' + format_number(g.min_gap[t]) + ',' +
           std::to_string(g.distinct_count[t]) + ',' + format_number(g.max_abs_eigenvalue[t]) + '\n';
    write_gap_report_csv(dir / ("gap_histogram_n" + std::to_string(g.n) + ".csv"), gap_distribution_report(g));
    std::vector<double> sorted = g.min_gap;
    std::sort(sorted.begin(), sorted.end());
    ojson j;
    j["n"] = g.n;
    j["trials"] = g.trials;
    j["all_distinct"] = std::all_of(g.distinct_count.begin(), g.distinct_count.end(), [&](int c) { return c == g.n; });
    j["min_distinct_count"] = *std::min_element(g.distinct_count.begin(), g.distinct_count.end());
    j["min_gap_min"] = sorted.front();
    j["min_gap_median"] = sorted[sorted.size() / 2];
    j["min_gap_max"] = sorted.back();
    ojson ex = ojson::array();
    for (std::size_t b = 0; b < g.b_list.size(); ++b) ex.push_back({{"B", g.b_list[b]}, {"fraction", g.exceed_fraction[b]}});
    j["exceedance"] = ex;
    cells.push_back(j);
  }
  write_text_file(dir / "results.csv", s);
  write_text_file(dir / "summary.json", ojson{{"sizes", cells}}.dump(2) + "\n");
}

}  // namespace asru
