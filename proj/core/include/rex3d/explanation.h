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

#ifndef REX3D_EXPLANATION_H_
#define REX3D_EXPLANATION_H_

#include <cstdint>
#include <vector>

#include <nlohmann/json.hpp>

#include "rex3d/occlusion.h"
#include "rex3d/oracle.h"
#include "rex3d/responsibility.h"
#include "rex3d/voxel_grid.h"

namespace rex3d {

struct Explanation {
  VoxelGrid mask;  // 1 = part of the explanation
  OracleVerdict verdict;  // with everything outside the mask occluded
  int64_t voxel_count = 0;
  double fraction = 0.0;
  int64_t batch_size = 0;
  int batches = 0;               // ranked batches added before passing
  int64_t final_batch_start = 0;  // ranked voxels preceding the final batch
  int64_t shrink_removed = 0;    // zero-responsibility voxels dropped
  int64_t model_calls = 0;
};

// Voxel indices by responsibility descending, ties by index ascending.
std::vector<int64_t> RankVoxels(const VoxelGrid& responsibility);

// Mask of the first `count` entries of `ranking`.
VoxelGrid PrefixMask(const Dims& dims, const std::vector<int64_t>& ranking,
                     int64_t count);

// Greedy growth over ranked batches of ceil(batch_fraction * N) voxels until
// the occluded volume reproduces `target`, then one attempt to drop the
// trailing zero-responsibility voxels of the final batch. Throws NoSignal for
// an all-zero map and InsufficientMap if even the full volume fails.
Explanation ExtractExplanation(const ResponsibilityMap& rm, const VoxelGrid& d,
                               Oracle& oracle, const OcclusionSpec& spec,
                               Target target, double batch_fraction = 0.01);

// Re-queries the model with the complement of the mask occluded.
OracleVerdict VerifySufficiency(const Explanation& e, const VoxelGrid& d,
                                Oracle& oracle, const OcclusionSpec& spec);

// True iff the mask without its final batch fails to reproduce `target`
// (an empty remainder fails by convention).
bool FinalBatchIsNecessary(const Explanation& e, const ResponsibilityMap& rm,
                           const VoxelGrid& d, Oracle& oracle,
                           const OcclusionSpec& spec, Target target);

struct OverlapMetrics {
  double iou = 0.0;
  double dice = 0.0;
  double coverage = 0.0;  // |A n B| / |B|
};

// Both masks empty gives 1 for every metric; an empty truth mask alone gives
// coverage 1. Throws InvalidArgument on a dims mismatch.
OverlapMetrics ExplanationOverlap(const VoxelGrid& explanation,
                                  const VoxelGrid& truth);

nlohmann::json ExplanationToJson(const Explanation& e);

}  // namespace rex3d

#endif  // REX3D_EXPLANATION_H_
