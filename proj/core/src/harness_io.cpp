#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

#include "metasrl/error.hpp"
#include "metasrl/harness.hpp"

namespace metasrl {
namespace {

using nlohmann::ordered_json;
using json = nlohmann::json;

constexpr const char* kLibraryVersion = "0.1.0";

// Rejects keys outside `allowed` so typos in config files do not pass silently.
void check_keys(const json& obj, std::initializer_list<const char*> allowed, const std::string& where) {
  if (!obj.is_object()) throw InvalidInput(where + ": expected an object");
  for (const auto& item : obj.items()) {
    bool known = false;
    for (const char* key : allowed) known = known || item.key() == key;
    if (!known) throw InvalidInput(where + ": unknown key '" + item.key() + "'");
  }
}

template <class T>
void read_opt(const json& obj, const char* key, T& out) {
  if (auto it = obj.find(key); it != obj.end()) out = it->get<T>();
}

const char* critic_name(CriticMode m) { return m == CriticMode::Exact ? "Exact" : "TdSampled"; }
const char* solver_name(DiceSolver s) { return s == DiceSolver::DirectSolve ? "DirectSolve" : "Sgd"; }

GridSpec grid_from_json(const json& j) {
  check_keys(j, {"rows", "cols", "frozen_prob", "goal_reward", "hole_cost", "cost_limit", "slip_prob",
                 "discount", "seed"},
             "task_sequence.base");
  GridSpec g;
  read_opt(j, "rows", g.rows);
  read_opt(j, "cols", g.cols);
  read_opt(j, "frozen_prob", g.frozen_prob);
  read_opt(j, "goal_reward", g.goal_reward);
  read_opt(j, "hole_cost", g.hole_cost);
  read_opt(j, "cost_limit", g.cost_limit);
  read_opt(j, "slip_prob", g.slip_prob);
  read_opt(j, "discount", g.discount);
  read_opt(j, "seed", g.seed);
  return g;
}

ordered_json grid_to_json(const GridSpec& g) {
  ordered_json j;
  j["rows"] = g.rows;
  j["cols"] = g.cols;
  j["frozen_prob"] = g.frozen_prob;
  j["goal_reward"] = g.goal_reward;
  j["hole_cost"] = g.hole_cost;
  j["cost_limit"] = g.cost_limit;
  j["slip_prob"] = g.slip_prob;
  j["discount"] = g.discount;
  j["seed"] = g.seed;
  return j;
}

TaskSequenceConfig sequence_from_json(const json& j) {
  check_keys(j, {"mode", "num_tasks", "base", "low_sim_prob_range", "seed"}, "task_sequence");
  TaskSequenceConfig c;
  if (auto it = j.find("mode"); it != j.end()) c.mode = similarity_mode_from_string(it->get<std::string>());
  read_opt(j, "num_tasks", c.num_tasks);
  if (auto it = j.find("base"); it != j.end()) c.base = grid_from_json(*it);
  if (auto it = j.find("low_sim_prob_range"); it != j.end()) {
    const auto range = it->get<std::vector<double>>();
    if (range.size() != 2) throw InvalidInput("task_sequence.low_sim_prob_range needs two numbers");
    c.low_sim_prob_range = {range[0], range[1]};
  }
  read_opt(j, "seed", c.seed);
  return c;
}

ordered_json sequence_to_json(const TaskSequenceConfig& c) {
  ordered_json j;
  j["mode"] = to_string(c.mode);
  j["num_tasks"] = c.num_tasks;
  j["base"] = grid_to_json(c.base);
  j["low_sim_prob_range"] = {c.low_sim_prob_range.first, c.low_sim_prob_range.second};
  j["seed"] = c.seed;
  return j;
}

double num_or_nan(const json& j) { return j.is_null() ? std::nan("") : j.get<double>(); }

std::vector<double> nums_or_nan(const json& j) {
  std::vector<double> out;
  for (const auto& x : j) out.push_back(num_or_nan(x));
  return out;
}

ordered_json table_to_json(const Matrix& m) {
  ordered_json rows = ordered_json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    ordered_json row = ordered_json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

Matrix table_from_json(const json& j) {
  if (!j.is_array() || j.empty()) return Matrix();
  Matrix m(static_cast<Eigen::Index>(j.size()), static_cast<Eigen::Index>(j[0].size()));
  for (std::size_t r = 0; r < j.size(); ++r) {
    if (j[r].size() != static_cast<std::size_t>(m.cols())) throw InvalidInput("ragged table in results");
    for (std::size_t c = 0; c < j[r].size(); ++c)
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = num_or_nan(j[r][c]);
  }
  return m;
}

ordered_json optional_json(const std::optional<double>& v) {
  return v ? ordered_json(*v) : ordered_json(nullptr);
}

std::optional<double> optional_from(const json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return std::nullopt;
  return it->get<double>();
}

ordered_json regret_to_json(const RegretReport& r) {
  ordered_json j;
  j["taog"] = r.taog;
  j["tacv"] = r.tacv;
  j["tacv_clipped"] = r.tacv_clipped;
  j["static_regret"] = r.static_regret;
  j["dynamic_regret"] = optional_json(r.dynamic_regret);
  j["d_hat_sq"] = r.d_hat_sq;
  j["v_hat_sq"] = optional_json(r.v_hat_sq);
  j["path_length"] = optional_json(r.path_length);
  j["sq_path_length"] = optional_json(r.sq_path_length);
  j["inexactness_proxy"] = r.inexactness_proxy;
  ordered_json tasks = ordered_json::array();
  for (const auto& row : r.tasks) {
    ordered_json t;
    t["gap"] = row.gap;
    t["violation"] = row.violation;
    t["kl_term"] = row.kl_term;
    t["kappa"] = row.kappa;
    t["inexactness"] = row.inexactness;
    tasks.push_back(std::move(t));
  }
  j["tasks"] = std::move(tasks);
  j["similarity_center"] = table_to_json(r.similarity_center);
  return j;
}

RegretReport regret_from_json(const json& j) {
  RegretReport r;
  r.taog = num_or_nan(j.at("taog"));
  r.tacv = nums_or_nan(j.at("tacv"));
  r.tacv_clipped = nums_or_nan(j.at("tacv_clipped"));
  r.static_regret = num_or_nan(j.at("static_regret"));
  r.dynamic_regret = optional_from(j, "dynamic_regret");
  r.d_hat_sq = num_or_nan(j.at("d_hat_sq"));
  r.v_hat_sq = optional_from(j, "v_hat_sq");
  r.path_length = optional_from(j, "path_length");
  r.sq_path_length = optional_from(j, "sq_path_length");
  r.inexactness_proxy = nums_or_nan(j.at("inexactness_proxy"));
  for (const auto& t : j.at("tasks")) {
    TaskRegretRow row;
    row.gap = num_or_nan(t.at("gap"));
    row.violation = nums_or_nan(t.at("violation"));
    row.kl_term = num_or_nan(t.at("kl_term"));
    row.kappa = num_or_nan(t.at("kappa"));
    row.inexactness = num_or_nan(t.at("inexactness"));
    r.tasks.push_back(std::move(row));
  }
  r.similarity_center = table_from_json(j.at("similarity_center"));
  return r;
}

ordered_json record_to_json(const RunRecord& r) {
  ordered_json j;
  j["strategy"] = r.strategy;
  j["run"] = r.run;
  j["task"] = r.task;
  j["test_task"] = r.test_task;
  j["seed"] = r.seed;
  j["learning_rate"] = r.learning_rate;
  j["status"] = r.status;
  j["objective_values"] = r.objective_values;
  j["gap"] = r.gap;
  j["violation"] = r.violation;
  j["reward_curve"] = r.reward_curve;
  j["cost_curves"] = r.cost_curves;
  return j;
}

RunRecord record_from_json(const json& j) {
  RunRecord r;
  r.strategy = j.at("strategy").get<std::string>();
  r.run = j.at("run").get<std::size_t>();
  r.task = j.at("task").get<std::size_t>();
  r.test_task = j.at("test_task").get<bool>();
  r.seed = j.at("seed").get<std::uint64_t>();
  r.learning_rate = num_or_nan(j.at("learning_rate"));
  r.status = j.at("status").get<std::string>();
  r.objective_values = nums_or_nan(j.at("objective_values"));
  r.gap = num_or_nan(j.at("gap"));
  r.violation = nums_or_nan(j.at("violation"));
  r.reward_curve = nums_or_nan(j.at("reward_curve"));
  for (const auto& c : j.at("cost_curves")) r.cost_curves.push_back(nums_or_nan(c));
  return r;
}

std::string csv_num(double x) {
  if (std::isnan(x)) return "";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << text;
  if (!out) throw IoError("write failed: " + path.string());
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::size_t num_costs(const std::vector<RunRecord>& records) {
  std::size_t p = 0;
  for (const auto& r : records) p = std::max(p, r.cost_curves.size());
  return p;
}

std::vector<std::string> strategy_order(const ExperimentResult& result) {
  std::vector<std::string> order;
  std::set<std::string> seen;
  for (const auto& rep : result.reports)
    if (seen.insert(rep.strategy).second) order.push_back(rep.strategy);
  for (const auto& rec : result.records)
    if (seen.insert(rec.strategy).second) order.push_back(rec.strategy);
  return order;
}

std::vector<double> finite(std::vector<double> v) {
  std::erase_if(v, [](double x) { return !std::isfinite(x); });
  return v;
}

struct CurveRow {
  std::string strategy;
  std::size_t task;
  bool test_task;
  std::size_t step;
  CurveSummary reward;
  std::vector<CurveSummary> costs;
};

std::vector<CurveRow> curve_rows(const ExperimentResult& result, std::size_t p) {
  std::vector<CurveRow> rows;
  for (const auto& name : strategy_order(result)) {
    std::map<std::pair<std::size_t, bool>, std::vector<const RunRecord*>> by_task;
    for (const auto& rec : result.records)
      if (rec.strategy == name) by_task[{rec.task, rec.test_task}].push_back(&rec);
    for (const auto& [key, recs] : by_task) {
      std::size_t steps = 0;
      for (const auto* r : recs) steps = std::max(steps, r->reward_curve.size());
      for (std::size_t m = 0; m < steps; ++m) {
        auto column = [&](auto&& get) {
          std::vector<double> v;
          for (const auto* r : recs) v.push_back(get(*r));
          return summarize(finite(std::move(v)));
        };
        CurveRow row{name, key.first, key.second, m, {}, {}};
        row.reward = column([m](const RunRecord& r) {
          return m < r.reward_curve.size() ? r.reward_curve[m] : std::nan("");
        });
        for (std::size_t i = 0; i < p; ++i)
          row.costs.push_back(column([m, i](const RunRecord& r) {
            return i < r.cost_curves.size() && m < r.cost_curves[i].size() ? r.cost_curves[i][m] : std::nan("");
          }));
        rows.push_back(std::move(row));
      }
    }
  }
  return rows;
}

struct SummaryRow {
  std::string strategy;
  std::size_t runs;
  CurveSummary taog;
  std::vector<CurveSummary> tacv_clipped;
  CurveSummary static_regret;
  CurveSummary d_hat_sq;
};

std::vector<SummaryRow> summary_rows(const ExperimentResult& result, std::size_t p) {
  std::vector<SummaryRow> rows;
  for (const auto& rep : result.reports) {
    SummaryRow row{rep.strategy, rep.per_run.size(), {}, {}, {}, {}};
    auto column = [&](auto&& get) {
      std::vector<double> v;
      for (const auto& r : rep.per_run) v.push_back(get(r));
      return summarize(finite(std::move(v)));
    };
    row.taog = column([](const RegretReport& r) { return r.taog; });
    for (std::size_t i = 0; i < p; ++i)
      row.tacv_clipped.push_back(column([i](const RegretReport& r) {
        return i < r.tacv_clipped.size() ? r.tacv_clipped[i] : std::nan("");
      }));
    row.static_regret = column([](const RegretReport& r) { return r.static_regret; });
    row.d_hat_sq = column([](const RegretReport& r) { return r.d_hat_sq; });
    rows.push_back(std::move(row));
  }
  return rows;
}

void put_summary(std::string& out, const CurveSummary& s) {
  out += ',' + csv_num(s.count ? s.mean : std::nan("")) + ',' + csv_num(s.count ? s.std : std::nan("")) +
         ',' + csv_num(s.count ? s.stderr_ : std::nan(""));
}

ordered_json summary_json(const CurveSummary& s) {
  ordered_json j;
  j["count"] = s.count;
  j["mean"] = s.count ? ordered_json(s.mean) : ordered_json(nullptr);
  j["std"] = s.count ? ordered_json(s.std) : ordered_json(nullptr);
  j["stderr"] = s.count ? ordered_json(s.stderr_) : ordered_json(nullptr);
  return j;
}

std::string file_stem(const std::string& strategy) {
  std::string out;
  for (char c : strategy) out += std::isalnum(static_cast<unsigned char>(c)) ? c : '_';
  while (!out.empty() && out.back() == '_') out.pop_back();
  return out;
}

std::string environment_manifest(const ExperimentConfig& config) {
  ordered_json j;
  j["library"] = "metasrl";
  j["version"] = kLibraryVersion;
#if defined(__clang__)
  j["compiler"] = std::string("clang ") + __clang_version__;
#elif defined(__GNUC__)
  j["compiler"] = std::string("gcc ") + __VERSION__;
#else
  j["compiler"] = "unknown";
#endif
  j["cxx_standard"] = static_cast<long>(__cplusplus);
  j["eigen"] = std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
               std::to_string(EIGEN_MINOR_VERSION);
  j["nlohmann_json"] = std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                       std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                       std::to_string(NLOHMANN_JSON_VERSION_PATCH);
#ifdef NDEBUG
  j["assertions"] = false;
#else
  j["assertions"] = true;
#endif
  j["rng"] = "mt19937_64, splitmix64 seed derivation";
  j["master_seed"] = config.master_seed;
  j["seed_scheme"] = "run seed = derive_seed(master_seed, fnv1a(strategy name), run); task seed = derive_seed(run seed, task)";
  return j.dump(2) + "\n";
}

}  // namespace

ExperimentConfig experiment_config_from_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw InvalidInput(std::string("experiment config: ") + e.what());
  }
  try {
    check_keys(doc, {"task_source", "hold_out_test_task", "strategies", "runs_per_strategy", "crpo", "dice",
                     "meta", "fixed_alpha", "master_seed", "output_dir", "threads"},
               "experiment config");
    ExperimentConfig c;
    if (auto it = doc.find("task_source"); it != doc.end()) {
      check_keys(*it, {"dir", "sequence"}, "task_source");
      if (it->contains("dir") == it->contains("sequence"))
        throw InvalidInput("task_source needs exactly one of 'dir' or 'sequence'");
      if (it->contains("dir")) c.task_dir = it->at("dir").get<std::string>();
      else c.task_sequence = sequence_from_json(it->at("sequence"));
    }
    read_opt(doc, "hold_out_test_task", c.hold_out_test_task);
    if (auto it = doc.find("strategies"); it != doc.end())
      for (const auto& s : *it) c.strategies.push_back(Strategy::parse(s.get<std::string>()));
    read_opt(doc, "runs_per_strategy", c.runs_per_strategy);
    if (auto it = doc.find("crpo"); it != doc.end()) {
      check_keys(*it, {"learning_rate", "steps", "tolerance", "critic_mode", "td_iterations", "td_step_size",
                       "episodes_per_step", "episode_horizon"},
                 "crpo");
      read_opt(*it, "learning_rate", c.crpo.learning_rate);
      read_opt(*it, "steps", c.crpo.steps);
      read_opt(*it, "tolerance", c.crpo.tolerance);
      if (auto m = it->find("critic_mode"); m != it->end()) {
        const auto name = m->get<std::string>();
        if (name == "Exact") c.crpo.critic_mode = CriticMode::Exact;
        else if (name == "TdSampled") c.crpo.critic_mode = CriticMode::TdSampled;
        else throw InvalidInput("crpo.critic_mode must be Exact or TdSampled");
      }
      read_opt(*it, "td_iterations", c.crpo.td_iterations);
      read_opt(*it, "td_step_size", c.crpo.td_step_size);
      read_opt(*it, "episodes_per_step", c.crpo.episodes_per_step);
      read_opt(*it, "episode_horizon", c.crpo.episode_horizon);
    }
    if (auto it = doc.find("dice"); it != doc.end()) {
      check_keys(*it, {"solver", "sgd_steps", "sgd_step_size"}, "dice");
      if (auto m = it->find("solver"); m != it->end()) {
        const auto name = m->get<std::string>();
        if (name == "DirectSolve") c.dice.solver = DiceSolver::DirectSolve;
        else if (name == "Sgd") c.dice.solver = DiceSolver::Sgd;
        else throw InvalidInput("dice.solver must be DirectSolve or Sgd");
      }
      read_opt(*it, "sgd_steps", c.dice.sgd_steps);
      read_opt(*it, "sgd_step_size", c.dice.sgd_step_size);
    }
    if (auto it = doc.find("meta"); it != doc.end()) {
      check_keys(*it, {"shrinkage", "rate_floor", "beta_sim", "beta_init", "horizon", "inner_updates",
                       "initial_kappa"},
                 "meta");
      read_opt(*it, "shrinkage", c.meta.shrinkage);
      read_opt(*it, "rate_floor", c.meta.rate_floor);
      read_opt(*it, "beta_sim", c.meta.beta_sim);
      read_opt(*it, "beta_init", c.meta.beta_init);
      read_opt(*it, "horizon", c.meta.horizon);
      read_opt(*it, "inner_updates", c.meta.inner_updates);
      read_opt(*it, "initial_kappa", c.initial_kappa);
    }
    read_opt(doc, "fixed_alpha", c.fixed_alpha);
    read_opt(doc, "master_seed", c.master_seed);
    read_opt(doc, "output_dir", c.output_dir);
    read_opt(doc, "threads", c.threads);
    c.validate();
    return c;
  } catch (const json::exception& e) {
    throw InvalidInput(std::string("experiment config: ") + e.what());
  }
}

TaskSequenceConfig task_sequence_from_json(const std::string& text) {
  try {
    return sequence_from_json(json::parse(text));
  } catch (const json::exception& e) {
    throw InvalidInput(std::string("task sequence: ") + e.what());
  }
}

ExperimentConfig load_experiment_config(const std::string& path) {
  const std::string text = read_file(path);
  try {
    return experiment_config_from_json(text);
  } catch (const InvalidInput& e) {
    throw InvalidInput(path + ": " + e.what());
  }
}

std::string to_json(const ExperimentConfig& c) {
  ordered_json j;
  ordered_json source;
  if (!c.task_dir.empty()) source["dir"] = c.task_dir;
  else source["sequence"] = sequence_to_json(c.task_sequence);
  j["task_source"] = std::move(source);
  j["hold_out_test_task"] = c.hold_out_test_task;
  j["strategies"] = ordered_json::array();
  for (const auto& s : c.strategies) j["strategies"].push_back(s.name());
  j["runs_per_strategy"] = c.runs_per_strategy;
  ordered_json crpo;
  crpo["learning_rate"] = c.crpo.learning_rate;
  crpo["steps"] = c.crpo.steps;
  crpo["tolerance"] = c.crpo.tolerance;
  crpo["critic_mode"] = critic_name(c.crpo.critic_mode);
  crpo["td_iterations"] = c.crpo.td_iterations;
  crpo["td_step_size"] = c.crpo.td_step_size;
  crpo["episodes_per_step"] = c.crpo.episodes_per_step;
  crpo["episode_horizon"] = c.crpo.episode_horizon;
  j["crpo"] = std::move(crpo);
  ordered_json dice;
  dice["solver"] = solver_name(c.dice.solver);
  dice["sgd_steps"] = c.dice.sgd_steps;
  dice["sgd_step_size"] = c.dice.sgd_step_size;
  j["dice"] = std::move(dice);
  ordered_json meta;
  meta["shrinkage"] = c.meta.shrinkage;
  meta["rate_floor"] = c.meta.rate_floor;
  meta["beta_sim"] = c.meta.beta_sim;
  meta["beta_init"] = c.meta.beta_init;
  meta["horizon"] = c.meta.horizon;
  meta["inner_updates"] = c.meta.inner_updates;
  meta["initial_kappa"] = c.initial_kappa;
  j["meta"] = std::move(meta);
  j["fixed_alpha"] = c.fixed_alpha;
  j["master_seed"] = c.master_seed;
  j["output_dir"] = c.output_dir;
  j["threads"] = c.threads;
  return j.dump(2) + "\n";
}

ExportFormat export_format_from_string(const std::string& name) {
  if (name == "csv") return ExportFormat::Csv;
  if (name == "json") return ExportFormat::Json;
  throw InvalidInput("format must be csv or json");
}

void export_report(const ExperimentResult& result, const ExperimentConfig& config, ExportFormat format,
                   const std::string& dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir + ": " + ec.message());
  const fs::path root(dir);
  const std::size_t p = num_costs(result.records);
  const auto curves = curve_rows(result, p);
  const auto summaries = summary_rows(result, p);

  if (format == ExportFormat::Csv) {
    std::string text = "strategy,task,test_task,step,count,reward_mean,reward_std,reward_stderr";
    for (std::size_t i = 1; i <= p; ++i) {
      const std::string c = "cost_" + std::to_string(i);
      text += ',' + c + "_mean," + c + "_std," + c + "_stderr";
    }
    text += '\n';
    for (const auto& row : curves) {
      text += row.strategy + ',' + std::to_string(row.task) + ',' + (row.test_task ? "1" : "0") + ',' +
              std::to_string(row.step) + ',' + std::to_string(row.reward.count);
      put_summary(text, row.reward);
      for (const auto& c : row.costs) put_summary(text, c);
      text += '\n';
    }
    write_file(root / "curves.csv", text);

    text = "strategy,run,task,test_task,seed,learning_rate,status,reward,gap";
    for (std::size_t i = 1; i <= p; ++i) text += ",cost_" + std::to_string(i);
    for (std::size_t i = 1; i <= p; ++i) text += ",violation_" + std::to_string(i);
    text += '\n';
    for (const auto& r : result.records) {
      text += r.strategy + ',' + std::to_string(r.run) + ',' + std::to_string(r.task) + ',' +
              (r.test_task ? "1" : "0") + ',' + std::to_string(r.seed) + ',' + csv_num(r.learning_rate) + ',' +
              '"' + r.status + '"' + ',' + csv_num(r.objective_values.empty() ? std::nan("") : r.objective_values[0]) +
              ',' + csv_num(r.gap);
      for (std::size_t i = 0; i < p; ++i)
        text += ',' + csv_num(i + 1 < r.objective_values.size() ? r.objective_values[i + 1] : std::nan(""));
      for (std::size_t i = 0; i < p; ++i) text += ',' + csv_num(i < r.violation.size() ? r.violation[i] : std::nan(""));
      text += '\n';
    }
    write_file(root / "records.csv", text);

    text = "strategy,runs,taog_mean,taog_std,taog_stderr";
    for (std::size_t i = 1; i <= p; ++i) {
      const std::string c = "tacv_clipped_" + std::to_string(i);
      text += ',' + c + "_mean," + c + "_std," + c + "_stderr";
    }
    text += ",static_regret_mean,static_regret_std,static_regret_stderr,d_hat_sq_mean,d_hat_sq_std,d_hat_sq_stderr\n";
    for (const auto& row : summaries) {
      text += row.strategy + ',' + std::to_string(row.runs);
      put_summary(text, row.taog);
      for (const auto& c : row.tacv_clipped) put_summary(text, c);
      put_summary(text, row.static_regret);
      put_summary(text, row.d_hat_sq);
      text += '\n';
    }
    write_file(root / "regret_summary.csv", text);
    for (const auto& rep : result.reports)
      if (!rep.per_run.empty()) write_file(root / ("regret_" + file_stem(rep.strategy) + ".csv"), rep.aggregate.to_csv());
  } else {
    ordered_json doc;
    doc["curves"] = ordered_json::array();
    for (const auto& row : curves) {
      ordered_json j;
      j["strategy"] = row.strategy;
      j["task"] = row.task;
      j["test_task"] = row.test_task;
      j["step"] = row.step;
      j["reward"] = summary_json(row.reward);
      j["costs"] = ordered_json::array();
      for (const auto& c : row.costs) j["costs"].push_back(summary_json(c));
      doc["curves"].push_back(std::move(j));
    }
    doc["regret"] = ordered_json::array();
    for (std::size_t s = 0; s < result.reports.size(); ++s) {
      const auto& rep = result.reports[s];
      const auto& row = summaries[s];
      ordered_json j;
      j["strategy"] = rep.strategy;
      j["runs"] = row.runs;
      j["taog"] = summary_json(row.taog);
      j["tacv_clipped"] = ordered_json::array();
      for (const auto& c : row.tacv_clipped) j["tacv_clipped"].push_back(summary_json(c));
      j["static_regret"] = summary_json(row.static_regret);
      j["d_hat_sq"] = summary_json(row.d_hat_sq);
      if (!rep.per_run.empty()) j["aggregate"] = regret_to_json(rep.aggregate);
      doc["regret"].push_back(std::move(j));
    }
    write_file(root / "report.json", doc.dump(2) + "\n");
  }
  write_file(root / "config.json", to_json(config));
  write_file(root / "environment.json", environment_manifest(config));
}

std::string results_to_json(const ExperimentResult& result) {
  ordered_json doc;
  doc["records"] = ordered_json::array();
  for (const auto& r : result.records) doc["records"].push_back(record_to_json(r));
  doc["reports"] = ordered_json::array();
  for (const auto& rep : result.reports) {
    ordered_json j;
    j["strategy"] = rep.strategy;
    j["aggregate"] = rep.per_run.empty() ? ordered_json(nullptr) : regret_to_json(rep.aggregate);
    j["per_run"] = ordered_json::array();
    for (const auto& r : rep.per_run) j["per_run"].push_back(regret_to_json(r));
    doc["reports"].push_back(std::move(j));
  }
  return doc.dump(1) + "\n";
}

ExperimentResult results_from_json(const std::string& text) {
  try {
    const json doc = json::parse(text);
    ExperimentResult result;
    for (const auto& r : doc.at("records")) result.records.push_back(record_from_json(r));
    for (const auto& j : doc.at("reports")) {
      StrategyReport rep;
      rep.strategy = j.at("strategy").get<std::string>();
      for (const auto& r : j.at("per_run")) rep.per_run.push_back(regret_from_json(r));
      if (!j.at("aggregate").is_null()) rep.aggregate = regret_from_json(j.at("aggregate"));
      result.reports.push_back(std::move(rep));
    }
    return result;
  } catch (const json::exception& e) {
    throw InvalidInput(std::string("results: ") + e.what());
  }
}

void save_results(const ExperimentResult& result, const std::string& path) {
  write_file(path, results_to_json(result));
}

ExperimentResult load_results(const std::string& path) {
  const std::string text = read_file(path);
  try {
    return results_from_json(text);
  } catch (const InvalidInput& e) {
    throw InvalidInput(path + ": " + e.what());
  }
}

}  // namespace metasrl
