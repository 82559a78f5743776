#include "metasrl/regret.hpp"

#include <cmath>
#include <cstdio>
#include <limits>

#include "metasrl/divergence.hpp"
#include "metasrl/error.hpp"
#include "metasrl/meta.hpp"

namespace metasrl {
namespace {

std::string num(double x) {
  if (std::isnan(x)) return "null";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string csv_num(double x) {
  if (std::isnan(x)) return "";
  return num(x);
}

std::string num_list(const std::vector<double>& v) {
  std::string out = "[";
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ',';
    out += num(v[i]);
  }
  return out + ']';
}

std::string opt(const std::optional<double>& v) { return v ? num(*v) : "null"; }

}  // namespace

std::pair<double, double> path_lengths(const std::vector<PolicyTable>& comparators) {
  double p = 0.0;
  double s = 0.0;
  for (std::size_t t = 1; t < comparators.size(); ++t) {
    const double d = (comparators[t] - comparators[t - 1]).norm();
    p += d;
    s += d * d;
  }
  return {p, s};
}

RegretReport regret_report(const std::vector<OptimalSolution>& oracles,
                           const std::vector<TaskEvaluation>& tasks,
                           const std::vector<TabularCmdp>& cmdps,
                           const std::optional<std::vector<PolicyTable>>& comparators,
                           double shrinkage) {
  const std::size_t n = tasks.size();
  if (n == 0) throw InvalidInput("regret report: no tasks");
  if (oracles.size() != n || cmdps.size() != n)
    throw InvalidInput("regret report: oracle, task and cmdp lists are misaligned");
  if (comparators && comparators->size() != n)
    throw InvalidInput("regret report: comparator sequence is misaligned");

  const std::size_t p = cmdps.front().num_constraints();
  RegretReport r;
  r.tacv.assign(p, 0.0);
  r.tacv_clipped.assign(p, 0.0);
  std::vector<std::pair<Vector, PolicyTable>> history;
  history.reserve(n);
  std::size_t feasible = 0;

  for (std::size_t t = 0; t < n; ++t) {
    const TaskEvaluation& task = tasks[t];
    const TabularCmdp& cmdp = cmdps[t];
    const OptimalSolution& star = oracles[t];
    if (cmdp.num_constraints() != p || task.objective_values.size() != p + 1)
      throw InvalidInput("regret report: objective count differs between tasks");
    TaskRegretRow row;
    row.kappa = task.kappa;
    row.gap = star.feasible ? star.objective_values[0] - task.objective_values[0]
                            : std::numeric_limits<double>::quiet_NaN();
    row.violation.resize(p);
    for (std::size_t i = 0; i < p; ++i) {
      row.violation[i] = task.objective_values[i + 1] - cmdp.limits()[i];
      r.tacv[i] += row.violation[i];
      r.tacv_clipped[i] += std::max(0.0, row.violation[i]);
    }
    if (star.feasible) {
      r.taog += row.gap;
      ++feasible;
    }
    row.kl_term = expected_kl(task.nu_hat, task.pi_hat, task.init_policy);
    row.inexactness = star.feasible
                          ? std::abs(expected_kl(star.visitation.nu, star.policy, task.init_policy) -
                                     row.kl_term)
                          : std::numeric_limits<double>::quiet_NaN();
    r.inexactness_proxy.push_back(row.inexactness);
    r.tasks.push_back(std::move(row));
    history.emplace_back(task.nu_hat, task.pi_hat);
  }
  const double tn = static_cast<double>(n);
  r.taog = feasible ? r.taog / static_cast<double>(feasible) : std::numeric_limits<double>::quiet_NaN();
  for (std::size_t i = 0; i < p; ++i) {
    r.tacv[i] /= tn;
    r.tacv_clipped[i] /= tn;
  }

  const SimilarityCenter center = closed_form_similarity_center(history, shrinkage);
  r.similarity_center = center.phi;
  r.d_hat_sq = center.d_hat_sq;
  double regret = 0.0;
  for (std::size_t t = 0; t < n; ++t)
    regret += r.tasks[t].kl_term - expected_kl(tasks[t].nu_hat, tasks[t].pi_hat, center.phi);
  r.static_regret = regret;

  if (comparators) {
    double dyn = 0.0;
    double v = 0.0;
    for (std::size_t t = 0; t < n; ++t) {
      const double at_comparator = expected_kl(tasks[t].nu_hat, tasks[t].pi_hat, (*comparators)[t]);
      dyn += r.tasks[t].kl_term - at_comparator;
      v += at_comparator;
    }
    r.dynamic_regret = dyn;
    r.v_hat_sq = v / tn;
    const auto [pl, sq] = path_lengths(*comparators);
    r.path_length = pl;
    r.sq_path_length = sq;
  }
  return r;
}

std::string RegretReport::to_json() const {
  std::string out = "{\n";
  out += "  \"taog\": " + num(taog) + ",\n";
  out += "  \"tacv\": " + num_list(tacv) + ",\n";
  out += "  \"tacv_clipped\": " + num_list(tacv_clipped) + ",\n";
  out += "  \"static_regret\": " + num(static_regret) + ",\n";
  out += "  \"dynamic_regret\": " + opt(dynamic_regret) + ",\n";
  out += "  \"d_hat_sq\": " + num(d_hat_sq) + ",\n";
  out += "  \"v_hat_sq\": " + opt(v_hat_sq) + ",\n";
  out += "  \"path_length\": " + opt(path_length) + ",\n";
  out += "  \"sq_path_length\": " + opt(sq_path_length) + ",\n";
  out += "  \"inexactness_proxy\": " + num_list(inexactness_proxy) + ",\n";
  out += "  \"tasks\": [";
  for (std::size_t t = 0; t < tasks.size(); ++t) {
    const auto& row = tasks[t];
    out += t ? ",\n    " : "\n    ";
    out += "{\"gap\": " + num(row.gap) + ", \"violation\": " + num_list(row.violation) +
           ", \"kl_term\": " + num(row.kl_term) + ", \"kappa\": " + num(row.kappa) +
           ", \"inexactness\": " + num(row.inexactness) + "}";
  }
  out += tasks.empty() ? "]\n}\n" : "\n  ]\n}\n";
  return out;
}

std::string RegretReport::to_csv() const {
  std::string out = "task,taog_contribution";
  for (std::size_t i = 1; i <= tacv.size(); ++i) out += ",tacv_" + std::to_string(i);
  for (std::size_t i = 1; i <= tacv.size(); ++i) out += ",tacv_clipped_" + std::to_string(i);
  out += ",kl_term,kappa,inexactness\n";
  for (std::size_t t = 0; t < tasks.size(); ++t) {
    const auto& row = tasks[t];
    out += std::to_string(t) + ',' + csv_num(row.gap);
    for (double v : row.violation) out += ',' + csv_num(v);
    for (double v : row.violation) out += ',' + csv_num(std::max(0.0, v));
    out += ',' + csv_num(row.kl_term) + ',' + csv_num(row.kappa) + ',' + csv_num(row.inexactness) + '\n';
  }
  return out;
}

}  // namespace metasrl
