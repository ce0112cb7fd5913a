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

#ifndef REX3D_ORACLE_H_
#define REX3D_ORACLE_H_

#include <array>
#include <atomic>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "rex3d/region.h"
#include "rex3d/voxel_grid.h"

namespace rex3d {

// A classifier reply.
struct OracleVerdict {
  int label = 0;
  double confidence = 0.0;  // in [0, 1]

  bool operator==(const OracleVerdict&) const = default;
};

// The label of the unmodified input. A mutant passes iff its label equals it.
struct Target {
  int label = 0;

  bool Accepts(const OracleVerdict& v) const { return v.label == label; }
};

// Counts model invocations against a limit. Thread-safe.
class QueryBudget {
 public:
  explicit QueryBudget(int64_t limit);

  int64_t limit() const { return limit_; }
  int64_t used() const { return used_.load(std::memory_order_relaxed); }
  int64_t remaining() const { return limit_ - used(); }
  bool exhausted() const { return used() >= limit_; }

  // Records `count` calls. Throws BudgetExhausted if the budget was already
  // exhausted; a batch started below the limit may overshoot it.
  void Charge(int64_t count);

 private:
  int64_t limit_;
  std::atomic<int64_t> used_{0};
};

// Black-box 3D classifier.
class Oracle {
 public:
  virtual ~Oracle() = default;

  // One verdict per input volume, in order.
  virtual std::vector<OracleVerdict> Classify(std::span<const VoxelGrid> batch) = 0;

  // Whether Classify may be called from several threads at once.
  virtual bool IsConcurrent() const { return true; }

  // Bounding box of the voxels the predicate reads, when known. nullopt means
  // the whole volume (or unknown).
  virtual std::optional<Region> DependencyRegion() const { return std::nullopt; }

  virtual std::string Describe() const = 0;
};

// Validates the batch (non-empty, equal dims), charges `budget` (may be null)
// and forwards to the oracle. Throws ProtocolError if the oracle returns the
// wrong number of verdicts.
std::vector<OracleVerdict> ClassifyBatch(Oracle& oracle,
                                         std::span<const VoxelGrid> mutants,
                                         QueryBudget* budget);

// Convenience single-volume query.
OracleVerdict ClassifyOne(Oracle& oracle, const VoxelGrid& volume,
                          QueryBudget* budget);

// 1 / (1 + exp(-10 (stat - tau))).
double SquashConfidence(double stat, double tau);

// Positive iff the mean over `region` exceeds tau.
struct RegionMeanThreshold {
  Region region;
  double tau = 0.5;
};

// Positive iff the mean over the voxels within `radius` of `center` exceeds
// tau.
struct SphereLesion {
  std::array<double, 3> center = {0, 0, 0};
  double radius = 0;
  double tau = 0.5;
};

// Positive iff every term holds. Confidence squashes the smallest margin.
struct Conjunction {
  std::vector<RegionMeanThreshold> terms;
};

// Always answers `label` with confidence 1.
struct ConstantLabel {
  int label = 1;
};

using SyntheticOracleKind =
    std::variant<RegionMeanThreshold, SphereLesion, Conjunction, ConstantLabel>;

// Pure, deterministic in-process classifier.
std::unique_ptr<Oracle> MakeSyntheticOracle(SyntheticOracleKind kind);

// Mean over the sphere voxels; exposed for parity checks.
double SphereMean(const VoxelGrid& volume, const SphereLesion& sphere);
double RegionMean(const VoxelGrid& volume, const Region& region);

// Parses the command-line oracle syntax:
//   sphere:cx,cy,cz,r,tau
//   region:x0,x1,y0,y1,z0,z1,tau            (half-open voxel ranges)
//   conj:x0,x1,y0,y1,z0,z1,tau;x0,...,tau   (one region term per ';')
//   const:label
SyntheticOracleKind ParseOracleKind(std::string_view text);

}  // namespace rex3d

#endif  // REX3D_ORACLE_H_
