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

#include "rex3d/explanation.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "rex3d/errors.h"

namespace rex3d {

std::vector<int64_t> RankVoxels(const VoxelGrid& responsibility) {
  std::vector<int64_t> order(static_cast<size_t>(responsibility.size()));
  std::iota(order.begin(), order.end(), int64_t{0});
  const auto data = responsibility.data();
  std::sort(order.begin(), order.end(), [&](int64_t a, int64_t b) {
    if (data[a] != data[b]) return data[a] > data[b];
    return a < b;
  });
  return order;
}

VoxelGrid PrefixMask(const Dims& dims, const std::vector<int64_t>& ranking,
                     int64_t count) {
  VoxelGrid mask(dims, 0.0f);
  count = std::min<int64_t>(count, static_cast<int64_t>(ranking.size()));
  for (int64_t i = 0; i < count; ++i) mask[ranking[i]] = 1.0f;
  return mask;
}

Explanation ExtractExplanation(const ResponsibilityMap& rm, const VoxelGrid& d,
                               Oracle& oracle, const OcclusionSpec& spec,
                               Target target, double batch_fraction) {
  const VoxelGrid& resp = rm.grid();
  if (resp.dims() != d.dims()) {
    throw InvalidArgument("map dims " + resp.dims().ToString() +
                          " differ from volume dims " + d.dims().ToString());
  }
  if (!(batch_fraction > 0.0 && batch_fraction <= 1.0)) {
    throw InvalidArgument("batch fraction must lie in (0, 1]");
  }
  if (rm.IsZero()) throw NoSignal("responsibility map is identically zero");
  spec.Validate(d.dims());

  const int64_t total = d.size();
  Explanation e;
  e.batch_size = std::max<int64_t>(
      1, static_cast<int64_t>(std::ceil(batch_fraction * static_cast<double>(total))));
  const std::vector<int64_t> ranking = RankVoxels(resp);

  e.mask = VoxelGrid(d.dims(), 0.0f, d.spacing());
  int64_t count = 0;
  bool accepted = false;
  while (count < total) {
    e.final_batch_start = count;
    const int64_t end = std::min(total, count + e.batch_size);
    for (int64_t i = count; i < end; ++i) e.mask[ranking[i]] = 1.0f;
    count = end;
    ++e.batches;
    e.verdict = ClassifyOne(oracle, ApplyVoxelMask(d, e.mask, spec), nullptr);
    ++e.model_calls;
    if (target.Accepts(e.verdict)) {
      accepted = true;
      break;
    }
  }
  if (!accepted) {
    throw InsufficientMap("no ranked prefix, not even the whole volume, "
                          "reproduces the target label");
  }

  // Zero-responsibility voxels sort last, so they form the batch's tail.
  int64_t tail = count;
  while (tail > e.final_batch_start && resp[ranking[tail - 1]] == 0.0f) --tail;
  if (tail > e.final_batch_start && tail < count) {
    VoxelGrid shrunk = PrefixMask(d.dims(), ranking, tail);
    shrunk.set_spacing(d.spacing());
    const OracleVerdict v = ClassifyOne(oracle, ApplyVoxelMask(d, shrunk, spec), nullptr);
    ++e.model_calls;
    if (target.Accepts(v)) {
      e.shrink_removed = count - tail;
      e.mask = std::move(shrunk);
      e.verdict = v;
      count = tail;
    }
  }
  e.voxel_count = count;
  e.fraction = static_cast<double>(count) / static_cast<double>(total);
  return e;
}

OracleVerdict VerifySufficiency(const Explanation& e, const VoxelGrid& d,
                                Oracle& oracle, const OcclusionSpec& spec) {
  return ClassifyOne(oracle, ApplyVoxelMask(d, e.mask, spec), nullptr);
}

bool FinalBatchIsNecessary(const Explanation& e, const ResponsibilityMap& rm,
                           const VoxelGrid& d, Oracle& oracle,
                           const OcclusionSpec& spec, Target target) {
  if (e.final_batch_start == 0) return true;
  const VoxelGrid rest = PrefixMask(d.dims(), RankVoxels(rm.grid()), e.final_batch_start);
  return !target.Accepts(ClassifyOne(oracle, ApplyVoxelMask(d, rest, spec), nullptr));
}

OverlapMetrics ExplanationOverlap(const VoxelGrid& explanation,
                                  const VoxelGrid& truth) {
  if (explanation.dims() != truth.dims()) {
    throw InvalidArgument("explanation dims " + explanation.dims().ToString() +
                          " differ from truth dims " + truth.dims().ToString());
  }
  int64_t a = 0;
  int64_t b = 0;
  int64_t both = 0;
  for (int64_t i = 0; i < truth.size(); ++i) {
    const bool in_a = explanation[i] != 0.0f;
    const bool in_b = truth[i] != 0.0f;
    a += in_a;
    b += in_b;
    both += in_a && in_b;
  }
  OverlapMetrics m;
  const int64_t either = a + b - both;
  m.iou = either == 0 ? 1.0 : static_cast<double>(both) / static_cast<double>(either);
  m.dice = (a + b) == 0 ? 1.0 : 2.0 * static_cast<double>(both) / static_cast<double>(a + b);
  m.coverage = b == 0 ? 1.0 : static_cast<double>(both) / static_cast<double>(b);
  return m;
}

nlohmann::json ExplanationToJson(const Explanation& e) {
  return {{"voxel_count", e.voxel_count},
          {"fraction", e.fraction},
          {"batch_size", e.batch_size},
          {"batches", e.batches},
          {"shrink_removed", e.shrink_removed},
          {"model_calls", e.model_calls},
          {"verdict", {{"label", e.verdict.label},
                       {"confidence", e.verdict.confidence}}}};
}

}  // namespace rex3d
