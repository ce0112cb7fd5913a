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

#include "rex3d/voxel_grid.h"

#include <cstring>

#include "rex3d/errors.h"

namespace rex3d {

std::string Dims::ToString() const {
  return std::to_string(x) + "x" + std::to_string(y) + "x" + std::to_string(z);
}

namespace {

void CheckDims(const Dims& dims) {
  if (dims.x < 1 || dims.y < 1 || dims.z < 1) {
    throw InvalidArgument("volume dimensions must be >= 1, got " +
                          dims.ToString());
  }
}

}  // namespace

VoxelGrid::VoxelGrid(Dims dims, float fill, Spacing spacing)
    : dims_(dims), spacing_(spacing) {
  CheckDims(dims);
  data_.assign(static_cast<size_t>(dims.VoxelCount()), fill);
}

VoxelGrid::VoxelGrid(Dims dims, std::vector<float> data, Spacing spacing)
    : dims_(dims), spacing_(spacing), data_(std::move(data)) {
  CheckDims(dims);
  if (static_cast<int64_t>(data_.size()) != dims.VoxelCount()) {
    throw InvalidArgument("volume data length " + std::to_string(data_.size()) +
                          " does not match dims " + dims.ToString());
  }
}

std::array<int64_t, 3> VoxelGrid::Coords(int64_t index) const {
  const int64_t x = index % dims_.x;
  const int64_t rest = index / dims_.x;
  return {x, rest % dims_.y, rest / dims_.y};
}

bool VoxelGrid::BitEquals(const VoxelGrid& other) const {
  if (dims_ != other.dims_) return false;
  if (std::memcmp(&spacing_, &other.spacing_, sizeof(Spacing)) != 0) return false;
  return std::memcmp(data_.data(), other.data_.data(),
                     data_.size() * sizeof(float)) == 0;
}

}  // namespace rex3d
