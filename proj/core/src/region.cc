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

#include "rex3d/region.h"

#include <algorithm>
#include <vector>

#include "rex3d/errors.h"

namespace rex3d {

const char* AxisName(Axis axis) {
  switch (axis) {
    case Axis::kRow:
      return "row";
    case Axis::kCol:
      return "col";
    case Axis::kDepth:
      return "depth";
  }
  return "?";
}

Region Region::Whole(const Dims& dims) {
  return {{0, dims.x}, {0, dims.y}, {0, dims.z}};
}

bool Region::IsValid() const {
  return row.start < row.end && col.start < col.end && depth.start < depth.end;
}

bool Region::FitsIn(const Dims& dims) const {
  return IsValid() && row.start >= 0 && col.start >= 0 && depth.start >= 0 &&
         row.end <= dims.x && col.end <= dims.y && depth.end <= dims.z;
}

std::string Region::ToString() const {
  auto iv = [](const Interval& i) {
    return "[" + std::to_string(i.start) + "," + std::to_string(i.end) + ")";
  };
  return iv(row) + "x" + iv(col) + "x" + iv(depth);
}

int64_t RegionVoxelCount(const Region& r) {
  return r.row.Extent() * r.col.Extent() * r.depth.Extent();
}

bool RegionIntersects(const Region& a, const Region& b) {
  auto overlap = [](const Interval& p, const Interval& q) {
    return p.start < q.end && q.start < p.end;
  };
  return overlap(a.row, b.row) && overlap(a.col, b.col) &&
         overlap(a.depth, b.depth);
}

nlohmann::json RegionToJson(const Region& r) {
  auto iv = [](const Interval& i) {
    return nlohmann::json{{"start", i.start}, {"end", i.end}};
  };
  return {{"row", iv(r.row)}, {"col", iv(r.col)}, {"depth", iv(r.depth)}};
}

Region RegionFromJson(const nlohmann::json& j) {
  auto iv = [&](const char* key) {
    const auto& o = j.at(key);
    return Interval{o.at("start").get<int64_t>(), o.at("end").get<int64_t>()};
  };
  Region r{iv("row"), iv("col"), iv("depth")};
  if (!r.IsValid()) throw InvalidArgument("empty region " + r.ToString());
  return r;
}

std::array<Region, 4> SplitRegion(const Region& head, const SplitChoice& choice) {
  if (choice.first == choice.second) {
    throw InvalidArgument("split axes must differ");
  }
  const Interval a = head[choice.first];
  const Interval b = head[choice.second];
  if (!(a.start < choice.first_coord && choice.first_coord < a.end) ||
      !(b.start < choice.second_coord && choice.second_coord < b.end)) {
    throw InvalidArgument("split coordinate not interior to " + head.ToString());
  }
  std::array<Region, 4> out;
  int n = 0;
  for (const Interval first : {Interval{a.start, choice.first_coord},
                               Interval{choice.first_coord, a.end}}) {
    for (const Interval second : {Interval{b.start, choice.second_coord},
                                  Interval{choice.second_coord, b.end}}) {
      Region r = head;
      r[choice.first] = first;
      r[choice.second] = second;
      out[n++] = r;
    }
  }
  return out;
}

SplitChoice DrawSplit(const Region& head, Rng& rng) {
  std::vector<Axis> splittable;
  for (const Axis axis : kAllAxes) {
    if (head[axis].Extent() >= 2) splittable.push_back(axis);
  }
  if (splittable.size() < 2) {
    throw UnsplittableRegion("fewer than two splittable axes in " +
                             head.ToString());
  }
  const auto pick = rng.UniformInt(0, static_cast<int64_t>(splittable.size()) - 1);
  const Axis first = splittable[pick];
  splittable.erase(splittable.begin() + pick);
  const Axis second =
      splittable[rng.UniformInt(0, static_cast<int64_t>(splittable.size()) - 1)];
  const Interval a = head[first];
  const Interval b = head[second];
  const int64_t c1 = rng.UniformInt(a.start + 1, a.end - 1);
  const int64_t c2 = rng.UniformInt(b.start + 1, b.end - 1);
  return {first, second, c1, c2};
}

std::array<Region, 4> GenerateMasks(const Region& head, Rng& rng) {
  return SplitRegion(head, DrawSplit(head, rng));
}

}  // namespace rex3d
