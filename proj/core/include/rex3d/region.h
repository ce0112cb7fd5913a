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

#ifndef REX3D_REGION_H_
#define REX3D_REGION_H_

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "rex3d/random.h"
#include "rex3d/voxel_grid.h"

namespace rex3d {

// ROW, COL and DEPTH index the x, y and z voxel axes respectively.
enum class Axis : int { kRow = 0, kCol = 1, kDepth = 2 };

inline constexpr std::array<Axis, 3> kAllAxes = {Axis::kRow, Axis::kCol,
                                                 Axis::kDepth};

const char* AxisName(Axis axis);

// Half-open interval [start, end).
struct Interval {
  int64_t start = 0;
  int64_t end = 0;

  int64_t Extent() const { return end - start; }
  bool Contains(int64_t v) const { return v >= start && v < end; }
  bool operator==(const Interval&) const = default;
};

// Axis-aligned box of voxels; a supervoxel.
struct Region {
  Interval row;
  Interval col;
  Interval depth;

  static Region Whole(const Dims& dims);

  Interval& operator[](Axis a) {
    return a == Axis::kRow ? row : a == Axis::kCol ? col : depth;
  }
  const Interval& operator[](Axis a) const {
    return a == Axis::kRow ? row : a == Axis::kCol ? col : depth;
  }

  bool IsValid() const;
  bool FitsIn(const Dims& dims) const;
  bool Contains(int64_t x, int64_t y, int64_t z) const {
    return row.Contains(x) && col.Contains(y) && depth.Contains(z);
  }
  bool operator==(const Region&) const = default;
  std::string ToString() const;
};

int64_t RegionVoxelCount(const Region& r);

// True iff the regions overlap on all three axes. Touching half-open
// intervals do not overlap.
bool RegionIntersects(const Region& a, const Region& b);

// {"row":{"start":s,"end":e},"col":{...},"depth":{...}}
nlohmann::json RegionToJson(const Region& r);
Region RegionFromJson(const nlohmann::json& j);

// The two axes and interior coordinates used by one quadrant split.
struct SplitChoice {
  Axis first;
  Axis second;
  int64_t first_coord;
  int64_t second_coord;
};

// Splits `head` on `choice` into four regions in the order
// [lo1 x lo2, lo1 x hi2, hi1 x lo2, hi1 x hi2]. Throws InvalidArgument if the
// choice is not an interior split of two distinct axes.
std::array<Region, 4> SplitRegion(const Region& head, const SplitChoice& choice);

// Draws a split: two distinct axes uniformly among those with extent >= 2,
// then one interior coordinate per axis uniformly in (start, end). Throws
// UnsplittableRegion when fewer than two axes are splittable.
SplitChoice DrawSplit(const Region& head, Rng& rng);

// DrawSplit followed by SplitRegion. The four returned regions are pairwise
// disjoint and cover `head` exactly.
std::array<Region, 4> GenerateMasks(const Region& head, Rng& rng);

}  // namespace rex3d

#endif  // REX3D_REGION_H_
