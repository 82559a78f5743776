#include "metasrl/taskgen.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <queue>

#include <json.hpp>

#include "metasrl/error.hpp"
#include "metasrl/rng.hpp"

namespace metasrl {
namespace {

constexpr int kRowStep[4] = {0, 1, 0, -1};  // left, down, right, up
constexpr int kColStep[4] = {-1, 0, 1, 0};
constexpr std::size_t kMaxAttempts = 100;

std::size_t move(const LakeGrid& g, std::size_t cell, int action) {
  const auto r = static_cast<long>(cell / g.cols) + kRowStep[action];
  const auto c = static_cast<long>(cell % g.cols) + kColStep[action];
  if (r < 0 || c < 0 || r >= static_cast<long>(g.rows) || c >= static_cast<long>(g.cols)) return cell;
  return static_cast<std::size_t>(r) * g.cols + static_cast<std::size_t>(c);
}

LakeGrid draw_grid(const GridSpec& spec, double frozen_prob, Rng& rng) {
  LakeGrid g;
  g.rows = spec.rows;
  g.cols = spec.cols;
  g.cells.assign(spec.rows * spec.cols, 'F');
  for (std::size_t i = 0; i < g.cells.size(); ++i) g.cells[i] = rng.uniform01() < frozen_prob ? 'F' : 'H';
  g.cells.front() = 'S';
  g.cells.back() = 'G';
  return g;
}

LakeGrid sample_grid(const GridSpec& spec, double frozen_prob, std::uint64_t seed) {
  for (std::size_t attempt = 0; attempt < kMaxAttempts; ++attempt) {
    Rng rng(derive_seed({seed, attempt}));
    LakeGrid g = draw_grid(spec, frozen_prob, rng);
    if (g.goal_reachable()) return g;
  }
  throw GenerationFailure("no grid with a reachable goal after 100 attempts (seed " +
                          std::to_string(seed) + ")");
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out << text;
  if (!out) throw IoError("write failed: " + path);
}

std::vector<GeneratedTask> flip_sequence(const GridSpec& spec, const TaskSequenceConfig& config) {
  const LakeGrid base = sample_lake_grid(spec);
  const std::size_t flippable = base.cells.size() - 2;
  if (config.num_tasks - 1 > flippable)
    throw InvalidInput("more tasks requested than flippable cells in the base grid");
  std::vector<std::size_t> pool(flippable);
  for (std::size_t i = 0; i < flippable; ++i) pool[i] = i + 1;
  Rng rng(derive_seed({config.seed, 0x666c6970ULL}));
  for (std::size_t k = 0; k < flippable; ++k) std::swap(pool[k], pool[k + rng.index(flippable - k)]);
  std::vector<GeneratedTask> tasks;
  tasks.push_back({base, lake_to_cmdp(base, spec), spec.frozen_prob, spec.seed});
  for (std::size_t cell : pool) {
    if (tasks.size() == config.num_tasks) break;
    LakeGrid g = base;
    g.cells[cell] = g.cells[cell] == 'H' ? 'F' : 'H';
    if (!g.goal_reachable()) continue;
    tasks.push_back({g, lake_to_cmdp(g, spec), spec.frozen_prob, spec.seed});
  }
  if (tasks.size() < config.num_tasks) tasks.clear();
  return tasks;
}

}  // namespace

void GridSpec::validate() const {
  if (rows == 0 || cols == 0 || rows * cols < 2) throw InvalidInput("grid needs at least two cells");
  if (!(frozen_prob >= 0.0 && frozen_prob <= 1.0)) throw InvalidInput("frozen_prob must lie in [0,1]");
  if (!(slip_prob >= 0.0 && slip_prob <= 1.0)) throw InvalidInput("slip_prob must lie in [0,1]");
  if (!(goal_reward > 0.0) || !(hole_cost > 0.0)) throw InvalidInput("goal reward and hole cost must be positive");
  if (!(discount > 0.0 && discount < 1.0)) throw InvalidInput("discount must lie in (0,1)");
}

std::string LakeGrid::ascii() const {
  std::string out;
  for (std::size_t r = 0; r < rows; ++r) {
    out.append(cells, r * cols, cols);
    out += '\n';
  }
  return out;
}

bool LakeGrid::goal_reachable() const {
  std::vector<bool> seen(cells.size(), false);
  std::queue<std::size_t> frontier;
  frontier.push(0);
  seen[0] = true;
  while (!frontier.empty()) {
    const std::size_t cell = frontier.front();
    frontier.pop();
    if (cell == goal()) return true;
    for (int a = 0; a < 4; ++a) {
      const std::size_t next = move(*this, cell, a);
      if (!seen[next] && !is_hole(next)) {
        seen[next] = true;
        frontier.push(next);
      }
    }
  }
  return false;
}

LakeGrid sample_lake_grid(const GridSpec& spec) {
  spec.validate();
  return sample_grid(spec, spec.frozen_prob, spec.seed);
}

TabularCmdp lake_to_cmdp(const LakeGrid& grid, const GridSpec& spec) {
  spec.validate();
  const std::size_t cells = grid.rows * grid.cols;
  const std::size_t ns = cells + 1;
  const std::size_t sink = cells;
  constexpr std::size_t na = 4;
  Matrix transition = Matrix::Zero(static_cast<Eigen::Index>(ns * na), static_cast<Eigen::Index>(ns));
  Matrix reward = Matrix::Zero(static_cast<Eigen::Index>(ns), na);
  Matrix cost = Matrix::Zero(static_cast<Eigen::Index>(ns), na);
  const double slip = spec.slip_prob;

  for (std::size_t s = 0; s < ns; ++s) {
    for (std::size_t a = 0; a < na; ++a) {
      const auto row = static_cast<Eigen::Index>(s * na + a);
      if (s == sink || s == grid.goal() || grid.is_hole(s)) {
        transition(row, static_cast<Eigen::Index>(sink)) = 1.0;
        continue;
      }
      const int intended = static_cast<int>(a);
      const std::pair<int, double> outcomes[3] = {
          {intended, 1.0 - slip}, {(intended + 1) % 4, slip / 2.0}, {(intended + 3) % 4, slip / 2.0}};
      for (const auto& [dir, prob] : outcomes) {
        if (prob == 0.0) continue;
        const std::size_t next = move(grid, s, dir);
        transition(row, static_cast<Eigen::Index>(next)) += prob;
        if (next == grid.goal()) reward(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(a)) += spec.goal_reward * prob;
        if (grid.is_hole(next)) cost(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(a)) += spec.hole_cost * prob;
      }
    }
  }
  const double c_max = std::max(spec.goal_reward, spec.hole_cost);
  reward = reward.cwiseMin(c_max);
  cost = cost.cwiseMin(c_max);
  Vector rho = Vector::Zero(static_cast<Eigen::Index>(ns));
  rho(0) = 1.0;
  return TabularCmdp(ns, na, std::move(transition), std::move(reward), {std::move(cost)},
                     {spec.cost_limit}, spec.discount, std::move(rho), c_max);
}

TabularCmdp gen_frozen_lake(const GridSpec& spec) { return lake_to_cmdp(sample_lake_grid(spec), spec); }

std::vector<GeneratedTask> gen_task_sequence_detailed(const TaskSequenceConfig& config) {
  if (config.num_tasks == 0) throw InvalidInput("task sequence needs at least one task");
  config.base.validate();
  std::vector<GeneratedTask> tasks;
  tasks.reserve(config.num_tasks);

  if (config.mode == SimilarityMode::HighSimilarity) {
    for (std::size_t attempt = 0; attempt < kMaxAttempts; ++attempt) {
      GridSpec spec = config.base;
      if (attempt > 0) spec.seed = derive_seed({config.base.seed, attempt, 0x62617365ULL});
      tasks = flip_sequence(spec, config);
      if (!tasks.empty()) return tasks;
    }
    throw GenerationFailure("no base grid admits enough single-cell flips that keep the goal reachable");
  } else {
    const auto [lo, hi] = config.low_sim_prob_range;
    if (!(lo >= 0.0 && hi <= 1.0 && lo <= hi)) throw InvalidInput("low-similarity range must lie in [0,1]");
    for (std::size_t t = 0; t < config.num_tasks; ++t) {
      Rng prob_rng(derive_seed({config.seed, t, 1}));
      const double prob = lo == hi ? lo : prob_rng.uniform(lo, hi);
      const std::uint64_t grid_seed = derive_seed({config.seed, t, 2});
      LakeGrid g = sample_grid(config.base, prob, grid_seed);
      tasks.push_back({g, lake_to_cmdp(g, config.base), prob, grid_seed});
    }
  }
  return tasks;
}

std::vector<TabularCmdp> gen_task_sequence(const TaskSequenceConfig& config) {
  std::vector<TabularCmdp> out;
  for (auto& task : gen_task_sequence_detailed(config)) out.push_back(std::move(task.cmdp));
  return out;
}

const char* to_string(SimilarityMode mode) {
  return mode == SimilarityMode::HighSimilarity ? "HighSimilarity" : "LowSimilarity";
}

SimilarityMode similarity_mode_from_string(const std::string& name) {
  if (name == "HighSimilarity" || name == "high") return SimilarityMode::HighSimilarity;
  if (name == "LowSimilarity" || name == "low") return SimilarityMode::LowSimilarity;
  throw InvalidInput("unknown similarity mode: " + name);
}

void write_task_directory(const std::vector<GeneratedTask>& tasks, const TaskSequenceConfig& config,
                          const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir + ": " + ec.message());
  nlohmann::ordered_json manifest;
  manifest["mode"] = to_string(config.mode);
  manifest["num_tasks"] = tasks.size();
  manifest["seed"] = config.seed;
  manifest["base_seed"] = config.base.seed;
  manifest["rows"] = config.base.rows;
  manifest["cols"] = config.base.cols;
  manifest["slip_prob"] = config.base.slip_prob;
  manifest["discount"] = config.base.discount;
  manifest["tasks"] = nlohmann::ordered_json::array();
  for (std::size_t t = 0; t < tasks.size(); ++t) {
    char name[32];
    std::snprintf(name, sizeof name, "task_%03zu.json", t);
    const std::string path = (std::filesystem::path(dir) / name).string();
    save_cmdp(tasks[t].cmdp, path);
    nlohmann::ordered_json entry;
    entry["file"] = name;
    entry["seed"] = tasks[t].seed;
    entry["frozen_prob"] = tasks[t].frozen_prob;
    entry["grid"] = tasks[t].grid.ascii();
    manifest["tasks"].push_back(entry);
  }
  write_text((std::filesystem::path(dir) / "manifest.json").string(), manifest.dump(2) + "\n");
}

std::vector<TabularCmdp> load_task_directory(const std::string& dir) {
  std::vector<std::string> files;
  std::error_code ec;
  for (const auto& entry : std::filesystem::directory_iterator(dir, ec)) {
    const std::string name = entry.path().filename().string();
    if (name.rfind("task_", 0) == 0 && entry.path().extension() == ".json") files.push_back(entry.path().string());
  }
  if (ec) throw IoError("cannot list " + dir + ": " + ec.message());
  if (files.empty()) throw IoError("no task_*.json files in " + dir);
  std::sort(files.begin(), files.end());
  std::vector<TabularCmdp> out;
  for (const auto& f : files) out.push_back(load_cmdp(f));
  return out;
}

double QuadraticStream::value(std::size_t t, const Vector& x) const {
  return 0.5 * lambda * (x - centers.at(t)).squaredNorm();
}

Vector QuadraticStream::gradient(std::size_t t, const Vector& x) const {
  return lambda * (x - centers.at(t));
}

LossRegularity QuadraticStream::regularity() const {
  const double diameter = (hi - lo) * std::sqrt(static_cast<double>(dim()));
  return {lambda, lambda * diameter, lambda};
}

QuadraticStream gen_quadratic_stream(std::size_t dim, std::size_t rounds, double lambda, double drift,
                                     double lo, double hi, std::uint64_t seed) {
  if (dim == 0 || rounds == 0 || !(lambda > 0.0) || !(lo < hi) || !(drift >= 0.0))
    throw InvalidInput("quadratic stream: bad parameters");
  Rng rng(seed);
  QuadraticStream q;
  q.lambda = lambda;
  q.lo = lo;
  q.hi = hi;
  Vector c(static_cast<Eigen::Index>(dim));
  for (Eigen::Index i = 0; i < c.size(); ++i) c(i) = rng.uniform(lo, hi);
  q.centers.push_back(c);
  for (std::size_t t = 1; t < rounds; ++t) {
    for (Eigen::Index i = 0; i < c.size(); ++i) c(i) = std::clamp(c(i) + drift * rng.normal(), lo, hi);
    q.centers.push_back(c);
  }
  return q;
}

}  // namespace metasrl
