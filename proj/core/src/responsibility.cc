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

#include "rex3d/responsibility.h"

#include <algorithm>
#include <atomic>
#include <bit>
#include <chrono>
#include <ctime>
#include <exception>
#include <mutex>
#include <thread>

#include "rex3d/errors.h"
#include "rex3d/random.h"

namespace rex3d {

void SearchConfig::Validate() const {
  if (max_depth < 1) throw InvalidArgument("max depth must be >= 1");
  if (search_limit < kSubsetsPerLevel) {
    throw InvalidArgument("search limit must be >= 14 model calls");
  }
  if (iterations < 1) throw InvalidArgument("iterations must be >= 1");
  if (min_region_voxels < 1) throw InvalidArgument("min region voxels must be >= 1");
  if (workers < 1) throw InvalidArgument("workers must be >= 1");
}

int64_t SearchConfig::RestartBudget(int restart) const {
  const int64_t base = search_limit / iterations;
  const int64_t extra = restart < search_limit % iterations ? 1 : 0;
  return base + extra;
}

nlohmann::json SearchConfig::ToJson() const {
  return {{"max_depth", max_depth},
          {"search_limit", search_limit},
          {"iterations", iterations},
          {"min_region_voxels", min_region_voxels},
          {"seed", seed}};
}

SearchConfig SearchConfig::FromJson(const nlohmann::json& j) {
  SearchConfig c;
  c.max_depth = j.value("max_depth", c.max_depth);
  c.search_limit = j.value("search_limit", c.search_limit);
  c.iterations = j.value("iterations", c.iterations);
  c.min_region_voxels = j.value("min_region_voxels", c.min_region_voxels);
  c.seed = j.value("seed", c.seed);
  c.Validate();
  return c;
}

std::vector<unsigned> MinimalPassingSubsets(const PassTable& passing) {
  std::vector<unsigned> out;
  for (unsigned s = 1; s <= kFullSubset; ++s) {
    if (!passing[s]) continue;
    bool minimal = true;
    // Every non-empty strict submask of s.
    for (unsigned t = (s - 1) & s; t != 0; t = (t - 1) & s) {
      if (passing[t]) {
        minimal = false;
        break;
      }
    }
    if (minimal) out.push_back(s);
  }
  return out;
}

LevelAttribution MinimalSubsetAttribution(const PassTable& passing) {
  LevelAttribution a;
  for (const unsigned s : MinimalPassingSubsets(passing)) {
    const int size = std::popcount(s);
    for (int p = 0; p < 4; ++p) {
      if ((s & (1u << p)) == 0) continue;
      const unsigned current = a.credited_subset[p];
      if (current == 0 || size < std::popcount(current)) {
        a.credited_subset[p] = s;
        a.increment[p] = 1.0 / size;
      }
    }
  }
  return a;
}

LevelResult ExploreLevel(const std::array<Region, 4>& parts, const VoxelGrid& d,
                         std::span<const Region> context, Oracle& oracle,
                         const OcclusionSpec& spec, Target target,
                         QueryBudget& budget, const AttributionRule& rule) {
  LevelResult result;
  std::vector<VoxelGrid> mutants;
  mutants.reserve(kSubsetsPerLevel);
  std::vector<Region> kept;
  for (unsigned s = 1; s < kFullSubset; ++s) {
    kept.assign(context.begin(), context.end());
    for (int p = 0; p < 4; ++p) {
      if (s & (1u << p)) kept.push_back(parts[p]);
    }
    mutants.push_back(ApplyMask(d, kept, spec));
    result.mutants.emplace_back(s);
  }

  std::vector<OracleVerdict> verdicts;
  try {
    verdicts = ClassifyBatch(oracle, mutants, &budget);
  } catch (const BudgetExhausted&) {
    result.abandoned = true;
    result.mutants.clear();
    return result;
  }
  result.model_calls = kSubsetsPerLevel;

  result.passing[0] = false;
  result.passing[kFullSubset] = true;
  for (size_t i = 0; i < verdicts.size(); ++i) {
    const bool pass = target.Accepts(verdicts[i]);
    result.mutants[i].SetVerdict(pass, verdicts[i].confidence);
    result.passing[result.mutants[i].kept_parts()] = pass;
    if (pass) ++result.passing_mutants;
  }
  result.attribution = rule(result.passing);
  return result;
}

int UpdateDepth(int current, const std::deque<PartitionNode>& queue) {
  return queue.empty() ? current : queue.front().depth;
}

void ResponsibilityMap::Add(const Region& region, float amount) {
  const int64_t run = region.row.Extent();
  auto data = grid_.data();
  for (int64_t z = region.depth.start; z < region.depth.end; ++z) {
    for (int64_t y = region.col.start; y < region.col.end; ++y) {
      const int64_t at = grid_.Index(region.row.start, y, z);
      for (int64_t i = 0; i < run; ++i) data[at + i] += amount;
    }
  }
}

bool ResponsibilityMap::IsZero() const {
  const auto data = grid_.data();
  return std::all_of(data.begin(), data.end(), [](float v) { return v == 0.0f; });
}

float ResponsibilityMap::Max() const {
  const auto data = grid_.data();
  return *std::max_element(data.begin(), data.end());
}

uint64_t RestartSeed(uint64_t seed, int restart) {
  return MixSeed(seed, static_cast<uint64_t>(restart));
}

namespace {

struct RestartOutput {
  RestartStats stats;
  std::vector<Increment> increments;
};

RestartOutput RunRestart(int restart, Oracle& oracle, const VoxelGrid& d,
                         const OcclusionSpec& spec, const SearchConfig& cfg,
                         Target target, const AttributionRule& rule) {
  RestartOutput out;
  out.stats.seed = RestartSeed(cfg.seed, restart);
  Rng rng(out.stats.seed);
  QueryBudget budget(cfg.RestartBudget(restart));

  std::deque<PartitionNode> queue;
  queue.push_back({Region::Whole(d.dims()), 0, 0.0, {}});
  int depth = 0;
  while (!queue.empty()) {
    depth = UpdateDepth(depth, queue);
    if (depth >= cfg.max_depth) break;
    if (budget.remaining() < kSubsetsPerLevel) {
      out.stats.truncated = true;
      break;
    }
    const PartitionNode node = std::move(queue.front());
    queue.pop_front();
    if (RegionVoxelCount(node.region) < cfg.min_region_voxels) continue;

    std::array<Region, 4> parts;
    try {
      parts = GenerateMasks(node.region, rng);
    } catch (const UnsplittableRegion&) {
      continue;
    }
    LevelResult level =
        ExploreLevel(parts, d, node.context, oracle, spec, target, budget, rule);
    out.stats.model_calls += level.model_calls;
    if (level.abandoned) {
      out.stats.truncated = true;
      break;
    }
    ++out.stats.levels;
    out.stats.passing_mutants += level.passing_mutants;

    for (int p = 0; p < 4; ++p) {
      const double amount = level.attribution.increment[p];
      if (amount <= 0.0) continue;
      out.increments.push_back({restart, node.depth, parts[p], amount});
      // The other members of the credited subset stay revealed while this
      // part is refined, so the child's full set reproduces a passing mutant.
      PartitionNode child{parts[p], node.depth + 1, amount, node.context};
      const unsigned credited = level.attribution.credited_subset[p];
      for (int q = 0; q < 4; ++q) {
        if (q != p && (credited & (1u << q))) child.context.push_back(parts[q]);
      }
      queue.push_back(std::move(child));
    }
  }
  return out;
}

std::string UtcTimestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(
      std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace

RunResult GenerateRespMap(Oracle& oracle, const VoxelGrid& d,
                          const OcclusionSpec& spec, const SearchConfig& cfg,
                          const AttributionRule& rule) {
  cfg.Validate();
  spec.Validate(d.dims());
  const auto start = std::chrono::steady_clock::now();

  RunResult run;
  run.map = ResponsibilityMap(d.dims(), d.spacing());
  run.target_verdict = ClassifyOne(oracle, d, nullptr);
  run.target = Target{run.target_verdict.label};

  std::vector<RestartOutput> outputs(static_cast<size_t>(cfg.iterations));
  const int workers = oracle.IsConcurrent()
                          ? std::min(cfg.workers, cfg.iterations)
                          : 1;
  if (workers <= 1) {
    for (int r = 0; r < cfg.iterations; ++r) {
      outputs[r] = RunRestart(r, oracle, d, spec, cfg, run.target, rule);
    }
  } else {
    std::atomic<int> next{0};
    std::exception_ptr failure;
    std::mutex failure_mu;
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (int r = next++; r < cfg.iterations; r = next++) {
          try {
            outputs[r] = RunRestart(r, oracle, d, spec, cfg, run.target, rule);
          } catch (...) {
            std::lock_guard lock(failure_mu);
            if (!failure) failure = std::current_exception();
          }
        }
      });
    }
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
  }

  // Merge in restart order so the float sums do not depend on scheduling.
  run.model_calls = 1;
  for (auto& out : outputs) {
    for (const Increment& inc : out.increments) {
      run.map.Add(inc.region, static_cast<float>(inc.amount));
    }
    run.model_calls += out.stats.model_calls;
    run.passing_mutants += out.stats.passing_mutants;
    run.truncated = run.truncated || out.stats.truncated;
    run.restarts.push_back(out.stats);
    if (cfg.record_increments) {
      run.increments.insert(run.increments.end(), out.increments.begin(),
                            out.increments.end());
    }
  }
  run.map.set_iterations_completed(cfg.iterations);
  run.wall_ms = std::chrono::duration<double, std::milli>(
                    std::chrono::steady_clock::now() - start)
                    .count();
  return run;
}

ResponsibilityMap NormalizeMap(ResponsibilityMap rm) {
  if (!rm.IsZero()) {
    const float max = rm.Max();
    if (max != 1.0f) {
      for (float& v : rm.grid().data()) v /= max;
    }
  }
  rm.set_normalized(true);
  return rm;
}

nlohmann::json RunManifest(const RunResult& run, const SearchConfig& cfg,
                           const OcclusionSpec& spec, const Oracle& oracle) {
  const Dims& dims = run.map.grid().dims();
  nlohmann::json restarts = nlohmann::json::array();
  for (const RestartStats& r : run.restarts) {
    restarts.push_back({{"seed", r.seed},
                        {"model_calls", r.model_calls},
                        {"passing_mutants", r.passing_mutants},
                        {"levels", r.levels},
                        {"truncated", r.truncated}});
  }
  nlohmann::json manifest = {
      {"dims", {dims.x, dims.y, dims.z}},
      {"config", cfg.ToJson()},
      {"seed", cfg.seed},
      {"oracle", oracle.Describe()},
      {"occlusion", spec.Describe()},
      {"target", {{"label", run.target.label},
                  {"confidence", run.target_verdict.confidence}}},
      {"model_calls", run.model_calls},
      {"passing_mutants", run.passing_mutants},
      {"truncated", run.truncated},
      {"restarts", restarts},
      {"wall_ms", run.wall_ms},
      {"timestamp", UtcTimestamp()},
  };
  if (cfg.record_increments) {
    nlohmann::json incs = nlohmann::json::array();
    for (const Increment& inc : run.increments) {
      incs.push_back({{"restart", inc.restart},
                      {"level", inc.level},
                      {"region", RegionToJson(inc.region)},
                      {"amount", inc.amount}});
    }
    manifest["increments"] = std::move(incs);
  }
  return manifest;
}

}  // namespace rex3d
