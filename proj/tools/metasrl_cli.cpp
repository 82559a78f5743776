#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "metasrl/error.hpp"
#include "metasrl/harness.hpp"
#include "metasrl/taskgen.hpp"

namespace {

constexpr int kConfigError = 2;
constexpr int kRuntimeError = 3;

// An unreadable config file is a config error, not a runtime failure.
std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw metasrl::InvalidInput("cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

// gen-tasks accepts either a full experiment config or a bare sequence object.
metasrl::TaskSequenceConfig sequence_config(const std::string& path) {
  const std::string text = slurp(path);
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw metasrl::InvalidInput(path + ": " + e.what());
  }
  if (doc.is_object() && doc.contains("task_source")) {
    const auto config = metasrl::experiment_config_from_json(text);
    if (!config.task_dir.empty()) throw metasrl::InvalidInput(path + ": config names a task directory, nothing to generate");
    return config.task_sequence;
  }
  return metasrl::task_sequence_from_json(text);
}

int gen_tasks(const std::string& config_path, const std::string& out_dir) {
  const auto config = sequence_config(config_path);
  const auto tasks = metasrl::gen_task_sequence_detailed(config);
  metasrl::write_task_directory(tasks, config, out_dir);
  std::cout << "wrote " << tasks.size() << " tasks to " << out_dir << '\n';
  return 0;
}

int run(const std::string& config_path, const std::string& out_dir, const std::optional<std::uint64_t>& seed,
        const std::string& strategy) {
  auto config = metasrl::experiment_config_from_json(slurp(config_path));
  if (seed) config.master_seed = *seed;
  if (!out_dir.empty()) config.output_dir = out_dir;
  if (!strategy.empty()) config.strategies = {metasrl::Strategy::parse(strategy)};
  config.validate();
  const auto tasks = metasrl::experiment_tasks(config);
  const auto result = metasrl::run_experiment(config, tasks);
  std::filesystem::create_directories(config.output_dir);
  metasrl::save_results(result, (std::filesystem::path(config.output_dir) / "results.json").string());
  metasrl::export_report(result, config, metasrl::ExportFormat::Csv, config.output_dir);
  std::size_t failed = 0;
  for (const auto& r : result.records) failed += r.status.rfind("failed", 0) == 0;
  std::cout << "ran " << result.records.size() << " task runs (" << failed << " failed) into "
            << config.output_dir << '\n';
  return 0;
}

int report(const std::string& in_dir, const std::string& format) {
  const auto fmt = metasrl::export_format_from_string(format);
  const std::filesystem::path root(in_dir);
  const auto config = metasrl::load_experiment_config((root / "config.json").string());
  const auto result = metasrl::load_results((root / "results.json").string());
  metasrl::export_report(result, config, fmt, in_dir);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Meta-learning for safe reinforcement learning on tabular CMDPs"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  std::string in_dir;
  std::string format = "csv";
  std::string strategy;
  std::optional<std::uint64_t> seed;

  auto* gen = app.add_subcommand("gen-tasks", "Generate a task sequence directory");
  gen->add_option("--config", config_path, "Sequence or experiment config (JSON)")->required();
  gen->add_option("--out", out_dir, "Output directory")->required();

  auto* run_cmd = app.add_subcommand("run", "Run an experiment");
  run_cmd->add_option("--config", config_path, "Experiment config (JSON)")->required();
  run_cmd->add_option("--out", out_dir, "Output directory (overrides the config)");
  run_cmd->add_option("--seed", seed, "Master seed (overrides the config)");
  run_cmd->add_option("--strategy", strategy, "Run only this strategy");

  auto* report_cmd = app.add_subcommand("report", "Re-export a finished run");
  report_cmd->add_option("--in", in_dir, "Run output directory")->required();
  report_cmd->add_option("--format", format, "csv or json")->check(CLI::IsMember({"csv", "json"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kConfigError;
  }

  try {
    if (*gen) return gen_tasks(config_path, out_dir);
    if (*run_cmd) return run(config_path, out_dir, seed, strategy);
    return report(in_dir, format);
  } catch (const metasrl::InvalidInput& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kRuntimeError;
  }
}
