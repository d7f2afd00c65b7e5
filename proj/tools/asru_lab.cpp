// asru-lab: experiment driver.
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "asru/error.hpp"
#include "asru/experiments.hpp"

namespace fs = std::filesystem;

namespace {

struct Common {
  std::string config;
  std::string out = "out";
  std::optional<int> seeds;
  int jobs = 1;
  bool traces = false;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--config", c.config, "JSON config file (defaults apply for missing keys)")->check(CLI::ExistingFile);
  cmd->add_option("--out", c.out, "output directory")->capture_default_str();
  cmd->add_option("--seeds", c.seeds, "seeds per cell (SMRM: trials, NTK: languages)")->check(CLI::PositiveNumber);
  cmd->add_option("--jobs", c.jobs, "worker threads")->check(CLI::PositiveNumber)->capture_default_str();
  cmd->add_flag("--traces", c.traces, "write trace_*.csv per training run");
}

asru::ExperimentConfig load(asru::ExperimentKind kind, const Common& c) {
  asru::ExperimentConfig cfg = c.config.empty() ? asru::default_config(kind) : asru::load_config(kind, c.config);
  if (c.seeds) {
    if (kind == asru::ExperimentKind::SmrmGaps)
      cfg.smrm_trials = *c.seeds;
    else if (kind == asru::ExperimentKind::NtkConvergence)
      cfg.languages = *c.seeds;
    else
      cfg.seeds = *c.seeds;
  }
  if (c.traces) cfg.write_traces = true;
  cfg.validate();
  return cfg;
}

int run(asru::ExperimentKind kind, const Common& c) {
  asru::ExperimentConfig cfg = load(kind, c);
  const fs::path out(c.out);
  switch (kind) {
    case asru::ExperimentKind::AsymptoticPhase:
      asru::write_phase_outputs(asru::run_asymptotic_phase(cfg, c.jobs), out, cfg.write_traces);
      break;
    case asru::ExperimentKind::FiniteSamplePhase:
      asru::write_phase_outputs(asru::run_finite_sample_phase(cfg, c.jobs), out, cfg.write_traces);
      break;
    case asru::ExperimentKind::ResetAblation:
      asru::write_phase_outputs(asru::run_reset_ablation(cfg, c.jobs), out, cfg.write_traces);
      break;
    case asru::ExperimentKind::AveragingAblation:
      asru::write_phase_outputs(asru::run_averaging_ablation(cfg, c.jobs), out, cfg.write_traces);
      break;
    case asru::ExperimentKind::SmrmGaps:
      asru::write_smrm_outputs(asru::run_smrm_gaps(cfg, c.jobs), out);
      break;
    case asru::ExperimentKind::NtkConvergence:
      asru::write_ntk_outputs(asru::run_ntk_convergence(cfg, c.jobs), out, cfg.write_traces);
      break;
  }
  std::cout << "wrote " << (out / "results.csv").string() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Synthetic unsupervised speech recognition laboratory"};
  app.require_subcommand(1);
  const std::pair<asru::ExperimentKind, const char*> commands[] = {
      {asru::ExperimentKind::AsymptoticPhase, "exact-statistics phase transition over graph spectra"},
      {asru::ExperimentKind::FiniteSamplePhase, "finite-sample recovery vs sigma_min sweep"},
      {asru::ExperimentKind::SmrmGaps, "eigenvalue gaps of symmetric Markov random matrices"},
      {asru::ExperimentKind::NtkConvergence, "NTK gradient-flow convergence on random languages"},
      {asru::ExperimentKind::ResetAblation, "paired runs with and without discriminator reset"},
      {asru::ExperimentKind::AveragingAblation, "paired soft-input / outside-cost runs"},
  };
  Common common[6];
  CLI::App* subs[6];
  for (int i = 0; i < 6; ++i) {
    subs[i] = app.add_subcommand(asru::to_string(commands[i].first), commands[i].second);
    add_common(subs[i], common[i]);
  }
  CLI11_PARSE(app, argc, argv);
  try {
    for (int i = 0; i < 6; ++i)
      if (*subs[i]) return run(commands[i].first, common[i]);
  } catch (const asru::Error& e) {
    std::cerr << "asru-lab: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "asru-lab: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
