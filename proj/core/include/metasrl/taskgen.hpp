#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "metasrl/bounds.hpp"
#include "metasrl/cmdp.hpp"

namespace metasrl {

struct GridSpec {
  std::size_t rows = 4;
  std::size_t cols = 4;
  double frozen_prob = 0.7;
  double goal_reward = 2.0;
  double hole_cost = 1.0;
  double cost_limit = 0.3;
  double slip_prob = 1.0 / 3.0;
  double discount = 0.95;
  std::uint64_t seed = 0;

  void validate() const;
};

enum class SimilarityMode { HighSimilarity, LowSimilarity };

struct TaskSequenceConfig {
  SimilarityMode mode = SimilarityMode::HighSimilarity;
  std::size_t num_tasks = 10;
  GridSpec base;
  std::pair<double, double> low_sim_prob_range{0.3, 0.7};
  std::uint64_t seed = 0;
};

/// Cell layout: 'S' start, 'G' goal, 'F' frozen, 'H' hole; row-major.
struct LakeGrid {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::string cells;

  char at(std::size_t r, std::size_t c) const { return cells[r * cols + c]; }
  bool is_hole(std::size_t index) const { return cells[index] == 'H'; }
  std::size_t goal() const { return cells.size() - 1; }
  /// One line per grid row.
  std::string ascii() const;
  /// True if the goal can be reached from the start with deterministic moves.
  bool goal_reachable() const;
};

struct GeneratedTask {
  LakeGrid grid;
  TabularCmdp cmdp;
  double frozen_prob = 0.0;
  std::uint64_t seed = 0;
};

/// Samples a grid (start/goal frozen, goal reachable), retrying up to 100 times.
LakeGrid sample_lake_grid(const GridSpec& spec);

/// Slippery dynamics with an absorbing sink after the goal or a hole.
TabularCmdp lake_to_cmdp(const LakeGrid& grid, const GridSpec& spec);

TabularCmdp gen_frozen_lake(const GridSpec& spec);

/// HighSimilarity flips one base cell per task, visiting cells in a seeded
/// random order and skipping flips that cut the goal off from the start. If the
/// base grid runs out of usable flips, a new base is drawn (up to 100 times).
std::vector<GeneratedTask> gen_task_sequence_detailed(const TaskSequenceConfig& config);
std::vector<TabularCmdp> gen_task_sequence(const TaskSequenceConfig& config);

/// Writes task_000.json ... and manifest.json into `dir`.
void write_task_directory(const std::vector<GeneratedTask>& tasks, const TaskSequenceConfig& config,
                          const std::string& dir);
/// Loads task_*.json in index order.
std::vector<TabularCmdp> load_task_directory(const std::string& dir);

const char* to_string(SimilarityMode mode);
SimilarityMode similarity_mode_from_string(const std::string& name);

/// Quadratic losses (lambda/2)||x - c_t||^2 on the box [lo, hi]^d.
struct QuadraticStream {
  double lambda = 1.0;
  double lo = 0.0;
  double hi = 1.0;
  std::vector<Vector> centers;

  double value(std::size_t t, const Vector& x) const;
  Vector gradient(std::size_t t, const Vector& x) const;
  LossRegularity regularity() const;
  std::size_t dim() const { return centers.empty() ? 0 : static_cast<std::size_t>(centers[0].size()); }
};

/// Centers start uniformly inside the box and take Gaussian steps of scale `drift`,
/// clamped to the box.
QuadraticStream gen_quadratic_stream(std::size_t dim, std::size_t rounds, double lambda, double drift,
                                     double lo, double hi, std::uint64_t seed);

}  // namespace metasrl
