#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "metasrl/cmdp.hpp"
#include "metasrl/crpo.hpp"
#include "metasrl/dice.hpp"
#include "metasrl/meta.hpp"
#include "metasrl/oracle.hpp"
#include "metasrl/regret.hpp"
#include "metasrl/rng.hpp"
#include "metasrl/taskgen.hpp"

namespace metasrl {

enum class StrategyKind { Random, Pretrained, SimpleAverage, FAL, MetaSrl };

struct Strategy {
  StrategyKind kind = StrategyKind::Random;
  /// Prior task whose learned policy Pretrained copies (0-based).
  std::size_t pretrained_task = 0;

  /// "Random", "Pretrained(k)", "SimpleAverage", "FAL" or "MetaSrl".
  std::string name() const;
  static Strategy parse(const std::string& name);
  friend bool operator==(const Strategy&, const Strategy&) = default;
};

struct ExperimentConfig {
  /// Directory of task_*.json files; when empty the sequence below is generated.
  std::string task_dir;
  TaskSequenceConfig task_sequence;
  /// The last task of the source is kept aside as the test task.
  bool hold_out_test_task = true;
  std::vector<Strategy> strategies;
  std::size_t runs_per_strategy = 10;
  CrpoConfig crpo;
  DiceConfig dice;
  MetaHyperparameters meta;
  /// Starting learning rate of MetaSrl; non-positive means crpo.learning_rate.
  double initial_kappa = 0.0;
  /// Learning rate of the other strategies; non-positive means crpo.learning_rate.
  double fixed_alpha = 0.0;
  std::uint64_t master_seed = 0;
  std::string output_dir = "out";
  /// Worker threads; 0 uses the hardware concurrency.
  std::size_t threads = 0;

  void validate() const;
};

ExperimentConfig experiment_config_from_json(const std::string& text);
ExperimentConfig load_experiment_config(const std::string& path);
std::string to_json(const ExperimentConfig& config);
/// Parses a bare task-sequence object (the "sequence" entry of a config).
TaskSequenceConfig task_sequence_from_json(const std::string& text);

/// Prior tasks seen by a run: the initializations used and the policies learned.
struct InitHistory {
  std::vector<PolicyTable> learned;
  std::vector<PolicyTable> inits;
};

/// Initialization of the next task for a non-meta strategy. Every output lies
/// in the shrinkage simplex. MetaSrl is rejected here.
SoftmaxPolicy baseline_init(const Strategy& strategy, const InitHistory& history,
                            std::size_t n_states, std::size_t n_actions, double shrinkage, Rng& rng);

struct RunRecord {
  std::string strategy;
  std::size_t run = 0;
  std::size_t task = 0;
  bool test_task = false;
  std::uint64_t seed = 0;
  /// Exact J_0 of the iterate at each step (length M).
  std::vector<double> reward_curve;
  /// cost_curves[i][m] = exact J_{i+1} of the iterate at step m.
  std::vector<std::vector<double>> cost_curves;
  /// J_0..J_p of the returned policy.
  std::vector<double> objective_values;
  /// J*_0 - J_0 of the returned policy (TAOG contribution).
  double gap = 0.0;
  /// J_i - d_i per constraint (TACV contribution).
  std::vector<double> violation;
  double learning_rate = 0.0;
  /// "ok", "degenerate" (no step passed the gate) or an error message.
  std::string status = "ok";
  /// Not exported; exports must be reproducible.
  double wall_clock_seconds = 0.0;
};

struct StrategyReport {
  std::string strategy;
  /// Seed-mean task rows; the similarity center is taken from the first run.
  RegretReport aggregate;
  std::vector<RegretReport> per_run;
};

struct ExperimentResult {
  std::vector<RunRecord> records;
  std::vector<StrategyReport> reports;
};

/// Cached LP oracles for the given tasks (revalidated before use).
std::vector<OptimalSolution> solve_oracles(const std::vector<TabularCmdp>& tasks);

/// Runs every (strategy, run) pair, in parallel, and merges in a fixed order.
/// Per-run seed: derive_seed({master_seed, fnv1a(strategy name), run}); per-task
/// CRPO seed: derive_seed({run seed, task}).
ExperimentResult run_experiment(const ExperimentConfig& config);
/// Same with preloaded tasks (training tasks first, then the test task if held out).
ExperimentResult run_experiment(const ExperimentConfig& config, const std::vector<TabularCmdp>& tasks);

std::uint64_t run_seed(std::uint64_t master_seed, const Strategy& strategy, std::size_t run);

/// Loads or generates the task list named by the config.
std::vector<TabularCmdp> experiment_tasks(const ExperimentConfig& config);

enum class ExportFormat { Csv, Json };
ExportFormat export_format_from_string(const std::string& name);

struct CurveSummary {
  std::size_t count = 0;
  double mean = 0.0;
  double std = 0.0;
  double stderr_ = 0.0;
};

/// Mean, sample standard deviation (zero for one value) and standard error.
CurveSummary summarize(const std::vector<double>& values);

/// Writes curves, regret summaries, the config snapshot and an environment
/// manifest into `dir`.
void export_report(const ExperimentResult& result, const ExperimentConfig& config,
                   ExportFormat format, const std::string& dir);

/// Full result dump used by the `report` subcommand.
std::string results_to_json(const ExperimentResult& result);
ExperimentResult results_from_json(const std::string& text);
void save_results(const ExperimentResult& result, const std::string& path);
ExperimentResult load_results(const std::string& path);

}  // namespace metasrl
