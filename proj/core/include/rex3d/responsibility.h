/*
 * Copyright 2026 The rex3d Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef REX3D_RESPONSIBILITY_H_
#define REX3D_RESPONSIBILITY_H_

#include <array>
#include <cstdint>
#include <deque>
#include <functional>
#include <span>
#include <vector>

#include <nlohmann/json.hpp>

#include "rex3d/occlusion.h"
#include "rex3d/oracle.h"
#include "rex3d/region.h"
#include "rex3d/voxel_grid.h"

namespace rex3d {

// Number of subsets of the four sibling parts that are actually queried:
// every non-empty proper subset.
inline constexpr int kSubsetsPerLevel = 14;
inline constexpr unsigned kFullSubset = 0b1111;

struct SearchConfig {
  int max_depth = 4;              // nodes at this level are never split
  int64_t search_limit = 2000;    // model calls shared by all restarts
  int iterations = 20;            // random restarts
  int64_t min_region_voxels = 8;  // smaller nodes are leaves
  uint64_t seed = 42;
  int workers = 1;                // restarts evaluated in parallel
  bool record_increments = false;

  // Throws InvalidArgument on out-of-range fields.
  void Validate() const;

  // Per-restart share of search_limit. A level starts only when its 14
  // queries fit in the remaining share.
  int64_t RestartBudget(int restart) const;

  nlohmann::json ToJson() const;
  static SearchConfig FromJson(const nlohmann::json& j);
};

// A queue entry: a region to refine, its level, the responsibility it
// received, and the regions that stay revealed while its parts are explored.
struct PartitionNode {
  Region region;
  int depth = 0;
  double parent_responsibility = 0.0;
  std::vector<Region> context;
};

// Verdicts indexed by bitmask over the four parts (bit i = part i kept).
// Entry 0 (all occluded) is failing by convention and entry 15 is the
// parent, which passed.
using PassTable = std::array<bool, 16>;

struct LevelAttribution {
  std::array<double, 4> increment = {0, 0, 0, 0};
  // For each part with a positive increment: the minimal passing subset it
  // was credited through (0 otherwise).
  std::array<unsigned, 4> credited_subset = {0, 0, 0, 0};
};

using AttributionRule = std::function<LevelAttribution(const PassTable&)>;

// Passing subsets with no passing strict subset, ascending by bitmask.
std::vector<unsigned> MinimalPassingSubsets(const PassTable& passing);

// Part p receives 1/|S| for the smallest minimal passing subset S containing
// it; parts in no minimal passing subset receive 0. Among equally small
// subsets the lowest bitmask is credited.
LevelAttribution MinimalSubsetAttribution(const PassTable& passing);

struct LevelResult {
  LevelAttribution attribution;
  PassTable passing{};
  std::vector<Mutant> mutants;
  int64_t model_calls = 0;
  int passing_mutants = 0;
  bool abandoned = false;  // budget ran out; nothing from this level is used
};

// Queries the 14 non-empty proper subsets of `parts` (each revealed together
// with `context`, everything else occluded) in one batch and attributes
// responsibility.
LevelResult ExploreLevel(const std::array<Region, 4>& parts, const VoxelGrid& d,
                         std::span<const Region> context, Oracle& oracle,
                         const OcclusionSpec& spec, Target target,
                         QueryBudget& budget,
                         const AttributionRule& rule = MinimalSubsetAttribution);

// Level of the node processed next: the queue head's depth, or `current`
// when the queue is empty.
int UpdateDepth(int current, const std::deque<PartitionNode>& queue);

// One responsibility increment applied to the map.
struct Increment {
  int restart = 0;
  int level = 0;
  Region region;
  double amount = 0.0;
};

struct RestartStats {
  uint64_t seed = 0;
  int64_t model_calls = 0;
  int64_t passing_mutants = 0;
  int levels = 0;
  bool truncated = false;
};

class ResponsibilityMap {
 public:
  ResponsibilityMap() = default;
  explicit ResponsibilityMap(Dims dims, Spacing spacing = {})
      : grid_(dims, 0.0f, spacing) {}

  const VoxelGrid& grid() const { return grid_; }
  VoxelGrid& grid() { return grid_; }
  int iterations_completed() const { return iterations_completed_; }
  void set_iterations_completed(int n) { iterations_completed_ = n; }
  bool normalized() const { return normalized_; }
  void set_normalized(bool n) { normalized_ = n; }

  void Add(const Region& region, float amount);
  bool IsZero() const;
  float Max() const;

 private:
  VoxelGrid grid_;
  int iterations_completed_ = 0;
  bool normalized_ = false;
};

struct RunResult {
  ResponsibilityMap map;  // unnormalized sum over restarts
  Target target;
  OracleVerdict target_verdict;
  int64_t model_calls = 0;      // includes the target query
  int64_t passing_mutants = 0;  // total_work
  bool truncated = false;       // some restart stopped on the budget
  std::vector<RestartStats> restarts;
  std::vector<Increment> increments;  // only with record_increments
  double wall_ms = 0.0;
};

// Seed of restart `restart` derived from the run seed.
uint64_t RestartSeed(uint64_t seed, int restart);

// Builds the responsibility map by iterative partition refinement. Oracle
// errors on the unmodified input propagate; running out of budget only sets
// the truncation flags.
RunResult GenerateRespMap(Oracle& oracle, const VoxelGrid& d,
                          const OcclusionSpec& spec, const SearchConfig& cfg,
                          const AttributionRule& rule = MinimalSubsetAttribution);

// Divides by the global max; an all-zero map stays zero.
ResponsibilityMap NormalizeMap(ResponsibilityMap rm);

// Run manifest: config echo, per-restart statistics, totals and (when
// recorded) the increments log. `wall_ms` and `timestamp` are the only
// non-deterministic keys.
nlohmann::json RunManifest(const RunResult& run, const SearchConfig& cfg,
                           const OcclusionSpec& spec, const Oracle& oracle);

}  // namespace rex3d

#endif  // REX3D_RESPONSIBILITY_H_
