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

#ifndef REX3D_VOXEL_GRID_H_
#define REX3D_VOXEL_GRID_H_

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace rex3d {

// Voxel counts along x, y, z.
struct Dims {
  int64_t x = 1;
  int64_t y = 1;
  int64_t z = 1;

  int64_t VoxelCount() const { return x * y * z; }
  int64_t operator[](int axis) const { return axis == 0 ? x : axis == 1 ? y : z; }
  bool operator==(const Dims&) const = default;
  std::string ToString() const;
};

// Physical voxel size in millimetres.
struct Spacing {
  float x = 1.0f;
  float y = 1.0f;
  float z = 1.0f;

  bool operator==(const Spacing&) const = default;
};

// Dense scalar volume, x-fastest layout: index = x + X * (y + Y * z).
class VoxelGrid {
 public:
  VoxelGrid() : data_(1, 0.0f) {}
  // Throws InvalidArgument when any dimension is < 1.
  explicit VoxelGrid(Dims dims, float fill = 0.0f, Spacing spacing = {});
  // Throws InvalidArgument when data.size() != dims.VoxelCount().
  VoxelGrid(Dims dims, std::vector<float> data, Spacing spacing = {});

  const Dims& dims() const { return dims_; }
  const Spacing& spacing() const { return spacing_; }
  void set_spacing(Spacing s) { spacing_ = s; }

  int64_t size() const { return static_cast<int64_t>(data_.size()); }
  bool empty() const { return data_.empty(); }

  std::span<float> data() { return data_; }
  std::span<const float> data() const { return data_; }

  int64_t Index(int64_t x, int64_t y, int64_t z) const {
    return x + dims_.x * (y + dims_.y * z);
  }
  float& at(int64_t x, int64_t y, int64_t z) { return data_[Index(x, y, z)]; }
  float at(int64_t x, int64_t y, int64_t z) const { return data_[Index(x, y, z)]; }
  float& operator[](int64_t i) { return data_[i]; }
  float operator[](int64_t i) const { return data_[i]; }

  // Inverse of Index().
  std::array<int64_t, 3> Coords(int64_t index) const;

  // Bitwise equality of dims, spacing and every value.
  bool BitEquals(const VoxelGrid& other) const;

 private:
  Dims dims_;
  Spacing spacing_;
  std::vector<float> data_;
};

}  // namespace rex3d

#endif  // REX3D_VOXEL_GRID_H_
