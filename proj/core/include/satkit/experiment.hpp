#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace satkit {

enum class ExperimentKind {
  cost_peak,
  cost_vs_ratio_controlled,
  nsolutions,
  search_behavior,
  robustness_vs_ratio,
  robustness_correlation,
  bms_interpolation,
  uf_bc,
};

std::string to_string(ExperimentKind kind);
std::optional<ExperimentKind> experiment_from_string(std::string_view name);

/// Every field lands in the output manifest; a manifest plus root_seed
/// reproduces all CSVs byte-for-byte at any worker count.
struct ExperimentConfig {
  ExperimentKind experiment = ExperimentKind::cost_peak;
  int n = 50;
  std::vector<double> ratios;              // m/n grid; m = round(ratio * n)
  int instances_per_cell = 200;
  int runs_per_instance = 250;             // R
  std::vector<double> backbone_fractions;  // targets as fractions of n
  int backbone_tolerance = 2;              // +/- band in variables
  double noise_p = 0.55;
  uint64_t max_flips = 10'000'000;
  std::vector<int> removal_schedule = {0, 5, 10, 20, 40, 80};
  bool interpolation_robustness = true;    // Table-4-style robustness column
  bool interpolation_random_control = true;
  bool interpolation_reduce_control = false; // costly; off at desk scale
  std::vector<int> percentile_selection = {10, 20, 30, 40, 50, 60, 70, 80, 90};
  int uf_runs = 250;                       // runs for uf recording
  uint64_t root_seed = 1;
  int workers = 1;
  std::string out_dir = "out";
  int gen_budget = 200'000;                // rejection attempts per instance
  uint64_t solution_cap = 1'000'000;
  uint64_t solver_max_decisions = 100'000'000;
  int min_trials = 100;                    // robustness estimation
  double rel_se = 0.05;
  int max_trials = 1000;
};

/// Desk-scale defaults per experiment (ratio grids, cell sizes).
ExperimentConfig default_config(ExperimentKind kind);

std::string serialize_config(const ExperimentConfig &config);
ExperimentConfig parse_config_json(const std::string &json_text);

struct ExperimentResult {
  std::vector<std::string> csv_paths;
  std::string manifest_path;
  int units_total = 0;
  int units_skipped = 0; // resumed from checkpoint
  int units_flagged = 0; // budget-exhausted or otherwise incomplete
};

/// Runs the experiment, checkpointing per work unit into out_dir so an
/// interrupted run resumes, and writes instances/summary CSVs with
/// deterministic content. Budget failures become flagged rows, never silent
/// drops.
ExperimentResult run_experiment(const ExperimentConfig &config);

} // namespace satkit
