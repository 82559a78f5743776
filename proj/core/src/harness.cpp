#include "metasrl/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <limits>
#include <thread>

#include "metasrl/error.hpp"
#include "metasrl/projection.hpp"

namespace metasrl {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::uint64_t fnv1a(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

PolicyTable uniform_table(std::size_t ns, std::size_t na) {
  return PolicyTable::Constant(static_cast<Eigen::Index>(ns), static_cast<Eigen::Index>(na),
                               1.0 / static_cast<double>(na));
}

struct RunOutput {
  std::vector<RunRecord> records;
  std::optional<RegretReport> report;
};

struct TaskResult {
  RunRecord record;
  TaskEvaluation evaluation;
  VisitationDistribution nu_hat;
};

Vector fallback_visitation(const TrajectoryDataset& data, const TabularCmdp& cmdp) {
  if (data.empty()) return cmdp.initial_dist();
  Vector marginal = data.counts().rowwise().sum();
  return marginal / marginal.sum();
}

class RunContext {
 public:
  RunContext(const ExperimentConfig& config, const std::vector<TabularCmdp>& tasks,
             const std::vector<OptimalSolution>& oracles, std::size_t n_train, Strategy strategy,
             std::size_t run)
      : config_(config),
        tasks_(tasks),
        oracles_(oracles),
        n_train_(n_train),
        strategy_(std::move(strategy)),
        run_(run),
        seed_(run_seed(config.master_seed, strategy_, run)),
        alpha_(config.fixed_alpha > 0.0 ? config.fixed_alpha : config.crpo.learning_rate) {}

  RunOutput execute() {
    RunOutput out;
    const TabularCmdp& first = tasks_.front();
    const double kappa0 = config_.initial_kappa > 0.0 ? config_.initial_kappa : config_.crpo.learning_rate;
    std::optional<MetaLearnerState> meta;
    if (strategy_.kind == StrategyKind::MetaSrl)
      meta = MetaLearnerState::uniform(first.n_states(), first.n_actions(),
                                       std::max(kappa0, config_.meta.rate_floor), config_.meta);

    InitHistory history;
    std::vector<TaskEvaluation> evaluations;
    for (std::size_t t = 0; t < tasks_.size(); ++t) {
      const bool test = t >= n_train_;
      const TabularCmdp& cmdp = tasks_[t];
      PolicyTable phi;
      double rate = alpha_;
      if (meta) {
        phi = meta->phi();
        rate = meta->kappa();
      } else {
        phi = initialization(history, cmdp, t);
      }
      TaskResult result = run_task(cmdp, oracles_[t], phi, rate, t, test);
      if (!test) {
        if (meta && result.record.status != "failed")
          meta = meta_update(*meta, result.nu_hat, result.evaluation.pi_hat, config_.crpo.steps,
                             make_sim_constants(cmdp.discount(), cmdp.c_max(), cmdp.n_states(),
                                                cmdp.n_actions()));
        history.inits.push_back(phi);
        history.learned.push_back(result.evaluation.pi_hat);
        evaluations.push_back(std::move(result.evaluation));
      }
      out.records.push_back(std::move(result.record));
    }

    if (!evaluations.empty()) {
      try {
        const std::vector<OptimalSolution> train_oracles(oracles_.begin(), oracles_.begin() + static_cast<long>(n_train_));
        const std::vector<TabularCmdp> train_tasks(tasks_.begin(), tasks_.begin() + static_cast<long>(n_train_));
        out.report = regret_report(train_oracles, evaluations, train_tasks, std::nullopt,
                                   config_.meta.shrinkage);
      } catch (const Error&) {
        out.report.reset();
      }
    }
    return out;
  }

 private:
  PolicyTable initialization(const InitHistory& history, const TabularCmdp& cmdp, std::size_t t) {
    if (history.learned.empty() && strategy_.kind != StrategyKind::Random)
      return uniform_table(cmdp.n_states(), cmdp.n_actions());
    Rng rng(derive_seed({seed_, t, 0x696e6974ULL}));
    return baseline_init(strategy_, history, cmdp.n_states(), cmdp.n_actions(), config_.meta.shrinkage, rng)
        .probs();
  }

  TaskResult run_task(const TabularCmdp& cmdp, const OptimalSolution& oracle, const PolicyTable& phi,
                      double rate, std::size_t t, bool test) {
    const auto started = std::chrono::steady_clock::now();
    const std::size_t p = cmdp.num_constraints();
    const std::size_t steps = config_.crpo.steps;

    TaskResult result;
    RunRecord& rec = result.record;
    rec.strategy = strategy_.name();
    rec.run = run_;
    rec.task = t;
    rec.test_task = test;
    rec.seed = derive_seed({seed_, t});
    rec.learning_rate = rate;
    rec.reward_curve.assign(steps, kNaN);
    rec.cost_curves.assign(p, std::vector<double>(steps, kNaN));

    CrpoConfig cc = config_.crpo;
    cc.learning_rate = rate;
    cc.rng_seed = rec.seed;
    cc.shrinkage = config_.meta.shrinkage;
    cc.keep_all_iterates = true;

    PolicyTable pi_hat = phi;
    std::optional<CrpoOutcome> outcome;
    try {
      outcome = run_crpo(cmdp, SoftmaxPolicy::from_probabilities(phi), cc);
    } catch (const DegenerateRun& e) {
      outcome = e.partial();
      rec.status = "degenerate";
    } catch (const std::exception& e) {
      rec.status = std::string("failed: ") + e.what();
    }

    Vector nu = cmdp.initial_dist();
    if (outcome) {
      pi_hat = outcome->returned_policy.probs();
      for (std::size_t m = 0; m < outcome->all_iterates.size() && m < steps; ++m) {
        const auto j = expected_objectives(cmdp, outcome->all_iterates[m].probs());
        rec.reward_curve[m] = j[0];
        for (std::size_t i = 0; i < p; ++i) rec.cost_curves[i][m] = j[i + 1];
      }
      nu = estimate_visitation(outcome->dataset, pi_hat, cmdp, t);
    }

    rec.objective_values = expected_objectives(cmdp, pi_hat);
    rec.gap = oracle.feasible ? oracle.objective_values[0] - rec.objective_values[0] : kNaN;
    rec.violation.resize(p);
    for (std::size_t i = 0; i < p; ++i) rec.violation[i] = rec.objective_values[i + 1] - cmdp.limits()[i];
    if (rec.status.rfind("failed", 0) == 0) rec.status = "failed";

    result.nu_hat = {nu};
    result.evaluation = {phi, nu, pi_hat, rec.objective_values, rate};
    rec.wall_clock_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    return result;
  }

  Vector estimate_visitation(const TrajectoryDataset& data, const PolicyTable& pi_hat,
                             const TabularCmdp& cmdp, std::size_t t) const {
    if (data.empty()) return fallback_visitation(data, cmdp);
    DiceConfig dc = config_.dice;
    dc.rng_seed = derive_seed({seed_, t, 0x64696365ULL});
    try {
      const CorrectionTable corrections = dualdice_fit(data, pi_hat, cmdp.discount(), dc);
      return visitation_from_corrections(data, corrections).nu;
    } catch (const Error&) {
      return fallback_visitation(data, cmdp);
    }
  }

  const ExperimentConfig& config_;
  const std::vector<TabularCmdp>& tasks_;
  const std::vector<OptimalSolution>& oracles_;
  std::size_t n_train_;
  Strategy strategy_;
  std::size_t run_;
  std::uint64_t seed_;
  double alpha_;
};

RegretReport aggregate_reports(const std::vector<RegretReport>& runs) {
  RegretReport agg = runs.front();
  const double n = static_cast<double>(runs.size());
  auto mean = [&](auto&& get) {
    double s = 0.0;
    for (const auto& r : runs) s += get(r);
    return s / n;
  };
  agg.taog = mean([](const RegretReport& r) { return r.taog; });
  agg.static_regret = mean([](const RegretReport& r) { return r.static_regret; });
  agg.d_hat_sq = mean([](const RegretReport& r) { return r.d_hat_sq; });
  for (std::size_t i = 0; i < agg.tacv.size(); ++i) {
    agg.tacv[i] = mean([i](const RegretReport& r) { return r.tacv[i]; });
    agg.tacv_clipped[i] = mean([i](const RegretReport& r) { return r.tacv_clipped[i]; });
  }
  for (std::size_t t = 0; t < agg.tasks.size(); ++t) {
    auto& row = agg.tasks[t];
    row.gap = mean([t](const RegretReport& r) { return r.tasks[t].gap; });
    row.kl_term = mean([t](const RegretReport& r) { return r.tasks[t].kl_term; });
    row.kappa = mean([t](const RegretReport& r) { return r.tasks[t].kappa; });
    row.inexactness = mean([t](const RegretReport& r) { return r.tasks[t].inexactness; });
    for (std::size_t i = 0; i < row.violation.size(); ++i)
      row.violation[i] = mean([t, i](const RegretReport& r) { return r.tasks[t].violation[i]; });
    agg.inexactness_proxy[t] = row.inexactness;
  }
  return agg;
}

}  // namespace

std::string Strategy::name() const {
  switch (kind) {
    case StrategyKind::Random: return "Random";
    case StrategyKind::Pretrained: return "Pretrained(" + std::to_string(pretrained_task) + ")";
    case StrategyKind::SimpleAverage: return "SimpleAverage";
    case StrategyKind::FAL: return "FAL";
    case StrategyKind::MetaSrl: return "MetaSrl";
  }
  return "unknown";
}

Strategy Strategy::parse(const std::string& name) {
  if (name == "Random") return {StrategyKind::Random, 0};
  if (name == "SimpleAverage") return {StrategyKind::SimpleAverage, 0};
  if (name == "FAL") return {StrategyKind::FAL, 0};
  if (name == "MetaSrl" || name == "Meta-SRL") return {StrategyKind::MetaSrl, 0};
  if (name == "Pretrained") return {StrategyKind::Pretrained, 0};
  const std::string prefix = "Pretrained(";
  if (name.rfind(prefix, 0) == 0 && name.size() > prefix.size() + 1 && name.back() == ')') {
    const std::string digits = name.substr(prefix.size(), name.size() - prefix.size() - 1);
    if (!digits.empty() && std::all_of(digits.begin(), digits.end(), [](char c) { return c >= '0' && c <= '9'; }))
      return {StrategyKind::Pretrained, static_cast<std::size_t>(std::stoull(digits))};
  }
  throw InvalidInput("unknown strategy: " + name);
}

void ExperimentConfig::validate() const {
  if (strategies.empty()) throw InvalidInput("experiment: at least one strategy is required");
  if (runs_per_strategy == 0) throw InvalidInput("experiment: runs_per_strategy must be at least 1");
  for (std::size_t i = 0; i < strategies.size(); ++i)
    for (std::size_t j = 0; j < i; ++j)
      if (strategies[i] == strategies[j]) throw InvalidInput("experiment: duplicate strategy " + strategies[i].name());
  crpo.validate();
  if (!(meta.shrinkage > 0.0)) throw InvalidInput("experiment: shrinkage must be positive");
  if (!(meta.rate_floor > 0.0)) throw InvalidInput("experiment: rate floor must be positive");
  if (meta.inner_updates == 0) throw InvalidInput("experiment: inner_updates must be at least 1");
  if (task_dir.empty() && task_sequence.num_tasks == 0) throw InvalidInput("experiment: no tasks");
}

SoftmaxPolicy baseline_init(const Strategy& strategy, const InitHistory& history, std::size_t ns,
                            std::size_t na, double shrinkage, Rng& rng) {
  const auto rows = static_cast<Eigen::Index>(ns);
  const auto cols = static_cast<Eigen::Index>(na);
  for (const auto& pi : history.learned)
    if (pi.rows() != rows || pi.cols() != cols) throw InvalidInput("baseline init: history shape mismatch");
  PolicyTable table(rows, cols);
  switch (strategy.kind) {
    case StrategyKind::Random:
      for (Eigen::Index s = 0; s < rows; ++s) table.row(s) = rng.dirichlet(na).transpose();
      break;
    case StrategyKind::Pretrained: {
      if (history.learned.empty()) throw InvalidInput("baseline init: Pretrained needs a prior task");
      // Until the designated task has been solved, the latest learned policy stands in.
      table = history.learned[std::min(strategy.pretrained_task, history.learned.size() - 1)];
      break;
    }
    case StrategyKind::SimpleAverage: {
      if (history.learned.empty()) throw InvalidInput("baseline init: SimpleAverage needs a prior task");
      table.setZero();
      for (const auto& pi : history.learned) table += pi;
      table /= static_cast<double>(history.learned.size());
      break;
    }
    case StrategyKind::FAL: {
      if (history.learned.empty()) throw InvalidInput("baseline init: FAL needs a prior task");
      table = history.learned.front();
      for (std::size_t i = 1; i < history.learned.size(); ++i)
        table += (history.learned[i] - table) / static_cast<double>(i + 1);
      break;
    }
    case StrategyKind::MetaSrl:
      throw InvalidInput("baseline init: MetaSrl initializations come from the meta learner");
  }
  return SoftmaxPolicy::from_probabilities(project_rows_shrinkage_simplex(table, shrinkage));
}

std::uint64_t run_seed(std::uint64_t master_seed, const Strategy& strategy, std::size_t run) {
  return derive_seed({master_seed, fnv1a(strategy.name()), run});
}

std::vector<OptimalSolution> solve_oracles(const std::vector<TabularCmdp>& tasks) {
  std::vector<OptimalSolution> out;
  out.reserve(tasks.size());
  for (const auto& cmdp : tasks) {
    out.push_back(solve_optimal_lp(cmdp));
    revalidate(cmdp, out.back());
  }
  return out;
}

std::vector<TabularCmdp> experiment_tasks(const ExperimentConfig& config) {
  if (!config.task_dir.empty()) return load_task_directory(config.task_dir);
  return gen_task_sequence(config.task_sequence);
}

ExperimentResult run_experiment(const ExperimentConfig& config) {
  config.validate();
  return run_experiment(config, experiment_tasks(config));
}

ExperimentResult run_experiment(const ExperimentConfig& config, const std::vector<TabularCmdp>& tasks) {
  config.validate();
  if (tasks.empty()) throw InvalidInput("experiment: no tasks");
  if (config.hold_out_test_task && tasks.size() < 2)
    throw InvalidInput("experiment: holding out a test task needs at least two tasks");
  for (const auto& cmdp : tasks)
    if (cmdp.n_states() != tasks.front().n_states() || cmdp.n_actions() != tasks.front().n_actions() ||
        cmdp.num_constraints() != tasks.front().num_constraints())
      throw InvalidInput("experiment: tasks must share state, action and constraint counts");
  const std::size_t n_train = config.hold_out_test_task ? tasks.size() - 1 : tasks.size();
  const std::vector<OptimalSolution> oracles = solve_oracles(tasks);

  struct Job {
    std::size_t strategy;
    std::size_t run;
  };
  std::vector<Job> jobs;
  for (std::size_t s = 0; s < config.strategies.size(); ++s)
    for (std::size_t r = 0; r < config.runs_per_strategy; ++r) jobs.push_back({s, r});

  std::vector<RunOutput> outputs(jobs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t j = next++; j < jobs.size(); j = next++) {
      const Job job = jobs[j];
      try {
        outputs[j] = RunContext(config, tasks, oracles, n_train, config.strategies[job.strategy], job.run).execute();
      } catch (const std::exception& e) {
        RunRecord rec;
        rec.strategy = config.strategies[job.strategy].name();
        rec.run = job.run;
        rec.seed = run_seed(config.master_seed, config.strategies[job.strategy], job.run);
        rec.status = std::string("failed: ") + e.what();
        outputs[j].records.push_back(std::move(rec));
      }
    }
  };
  std::size_t threads = config.threads ? config.threads : std::max(1u, std::thread::hardware_concurrency());
  threads = std::min(threads, jobs.size());
  {
    std::vector<std::jthread> pool;
    for (std::size_t i = 1; i < threads; ++i) pool.emplace_back(worker);
    worker();
  }

  ExperimentResult result;
  for (std::size_t s = 0; s < config.strategies.size(); ++s) {
    StrategyReport report;
    report.strategy = config.strategies[s].name();
    for (std::size_t j = 0; j < jobs.size(); ++j) {
      if (jobs[j].strategy != s) continue;
      for (auto& rec : outputs[j].records) result.records.push_back(std::move(rec));
      if (outputs[j].report) report.per_run.push_back(std::move(*outputs[j].report));
    }
    if (!report.per_run.empty()) report.aggregate = aggregate_reports(report.per_run);
    result.reports.push_back(std::move(report));
  }
  return result;
}

CurveSummary summarize(const std::vector<double>& values) {
  CurveSummary out;
  out.count = values.size();
  if (values.empty()) return out;
  double sum = 0.0;
  for (double v : values) sum += v;
  out.mean = sum / static_cast<double>(values.size());
  if (values.size() > 1) {
    double sq = 0.0;
    for (double v : values) sq += (v - out.mean) * (v - out.mean);
    out.std = std::sqrt(sq / static_cast<double>(values.size() - 1));
    out.stderr_ = out.std / std::sqrt(static_cast<double>(values.size()));
  }
  return out;
}

}  // namespace metasrl
