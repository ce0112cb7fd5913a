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

#ifndef REX3D_OCCLUSION_H_
#define REX3D_OCCLUSION_H_

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

struct ZeroValue {};

struct ConstantValue {
  float value = 0.0f;
};

// Coordinate-aligned substitution from a reference volume of equal dims.
struct DonorVolume {
  std::shared_ptr<const VoxelGrid> reference;
};

// Replacement content for occluded voxels.
class OcclusionSpec {
 public:
  using Strategy = std::variant<ZeroValue, ConstantValue, DonorVolume>;

  OcclusionSpec() = default;
  OcclusionSpec(Strategy strategy) : strategy_(std::move(strategy)) {}

  static OcclusionSpec Zero() { return {ZeroValue{}}; }
  static OcclusionSpec Constant(float v) { return {ConstantValue{v}}; }
  static OcclusionSpec Donor(VoxelGrid reference);

  const Strategy& strategy() const { return strategy_; }

  // Throws DonorShapeMismatch if a donor does not match `dims`.
  void Validate(const Dims& dims) const;

  // "zero", "value:<v>" or "donor".
  std::string Describe() const;

 private:
  Strategy strategy_ = ZeroValue{};
};

// Parses the command-line syntax:
//   zero | value:<float> | mean:<path-list-file> | donor:<path>
// where the list file names one volume per line. Throws InvalidArgument for
// unknown syntax and propagates volume loading errors.
OcclusionSpec ParseOcclusion(std::string_view text);

enum class Verdict { kUnevaluated, kPass, kFail };

// One occlusion experiment: the kept subset of the current partition and,
// once evaluated, its outcome.
class Mutant {
 public:
  explicit Mutant(unsigned kept_parts) : kept_parts_(kept_parts) {}

  unsigned kept_parts() const { return kept_parts_; }
  Verdict verdict() const { return verdict_; }
  std::optional<double> confidence() const { return confidence_; }

  // Throws std::logic_error when called twice.
  void SetVerdict(bool pass, double confidence);

 private:
  unsigned kept_parts_;
  Verdict verdict_ = Verdict::kUnevaluated;
  std::optional<double> confidence_;
};

// Returns a copy of `d` where every voxel outside the union of `kept` is
// replaced according to `spec`. Voxels inside a kept region are copied
// bit-exactly.
VoxelGrid ApplyMask(const VoxelGrid& d, std::span<const Region> kept,
                    const OcclusionSpec& spec);

// Same, with the kept set given as a per-voxel mask (nonzero = kept).
VoxelGrid ApplyVoxelMask(const VoxelGrid& d, const VoxelGrid& keep_mask,
                         const OcclusionSpec& spec);

// Arithmetic mean over every voxel of every volume. Throws EmptyCohort or
// InvalidArgument (dims differ).
float MeanIntensityValue(std::span<const VoxelGrid> cohort);

}  // namespace rex3d

#endif  // REX3D_OCCLUSION_H_
