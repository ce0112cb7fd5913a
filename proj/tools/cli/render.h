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

#ifndef REX3D_TOOLS_CLI_RENDER_H_
#define REX3D_TOOLS_CLI_RENDER_H_

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string_view>
#include <vector>

#include "rex3d/voxel_grid.h"

namespace rex3d::cli {

enum class Plane { kAxial, kSagittal, kCoronal };

// "axial" | "sagittal" | "coronal"; throws InvalidArgument otherwise.
Plane ParsePlane(std::string_view name);
const char* PlaneName(Plane plane);

struct Rgb {
  uint8_t r = 0;
  uint8_t g = 0;
  uint8_t b = 0;
  bool operator==(const Rgb&) const = default;
};

inline constexpr Rgb kExplanationColor{255, 165, 0};
inline constexpr Rgb kTruthColor{128, 0, 128};

struct RenderSpec {
  std::vector<Plane> planes = {Plane::kAxial, Plane::kSagittal, Plane::kCoronal};
  std::optional<int64_t> slice;  // nullopt: floor(dim / 2)
  double alpha = 0.5;
  Rgb explanation_color = kExplanationColor;
  Rgb truth_color = kTruthColor;
};

struct Image {
  int64_t width = 0;
  int64_t height = 0;
  std::vector<uint8_t> rgb;  // row-major, 3 bytes per pixel

  Rgb Pixel(int64_t col, int64_t row) const {
    const size_t at = 3 * static_cast<size_t>(row * width + col);
    return {rgb[at], rgb[at + 1], rgb[at + 2]};
  }
};

// 256-entry blue (0,0,255) -> white -> red (255,0,0) ramp.
const std::array<Rgb, 256>& DivergingColormap();

// Volumes the overlay is drawn from. Everything but `base` is optional and
// must match its dims.
struct RenderInputs {
  const VoxelGrid* base = nullptr;
  const VoxelGrid* map = nullptr;
  const VoxelGrid* explanation = nullptr;
  const VoxelGrid* truth = nullptr;
};

// Image axes: axial (x right, y down), sagittal (y, z), coronal (x, z).
// Grayscale base scaled by the volume's min/max; voxels with positive map
// value are alpha-blended with the colormap of map/max; mask contours (mask
// voxels 4-adjacent in-plane to a non-mask voxel or the slice border) are
// drawn solid, truth first and explanation on top.
Image RenderSlice(const RenderInputs& in, Plane plane, int64_t slice,
                  const RenderSpec& spec);

// Resolves the slice index for `plane`; throws InvalidArgument if out of range.
int64_t ResolveSlice(const Dims& dims, Plane plane, std::optional<int64_t> slice);

// 8-bit RGB PNG with no timestamp chunk; identical images encode to
// identical bytes.
std::vector<uint8_t> EncodePng(const Image& image);
void WritePng(const Image& image, const std::filesystem::path& path);

}  // namespace rex3d::cli

#endif  // REX3D_TOOLS_CLI_RENDER_H_
