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

#ifndef REX3D_VOLUME_IO_H_
#define REX3D_VOLUME_IO_H_

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <utility>

#include "rex3d/voxel_grid.h"

namespace rex3d {

// NIfTI-1 datatype codes understood by the reader and writer.
enum class NiftiDatatype : int16_t {
  kUint8 = 2,
  kInt16 = 4,
  kFloat32 = 16,
};

inline constexpr int kNiftiHeaderSize = 348;
inline constexpr int kNiftiMinVoxOffset = 352;

// The subset of the single-file NIfTI-1 header this library reads and writes.
// Field offsets (little-endian): sizeof_hdr 0, dim 40, datatype 70,
// bitpix 72, pixdim 76, vox_offset 108, scl_slope 112, scl_inter 116,
// xyzt_units 123, magic 344.
struct NiftiHeader {
  std::array<char, 4> magic = {'n', '+', '1', '\0'};
  NiftiDatatype datatype = NiftiDatatype::kFloat32;
  std::array<int16_t, 8> dim = {3, 1, 1, 1, 1, 1, 1, 1};
  std::array<float, 8> pixdim = {1, 1, 1, 1, 1, 1, 1, 1};
  float scl_slope = 1.0f;
  float scl_inter = 0.0f;
  float vox_offset = static_cast<float>(kNiftiMinVoxOffset);

  // Parses and validates the first 348 bytes of a file. Throws FormatError,
  // UnsupportedDatatype or TruncatedFile.
  static NiftiHeader Parse(std::span<const uint8_t> bytes);

  // Serializes to exactly 348 bytes.
  std::array<uint8_t, kNiftiHeaderSize> Serialize() const;
};

int BytesPerVoxel(NiftiDatatype type);

// Loads a volume. The extension selects the format:
//   .nii      single-file NIfTI-1
//   .nii.gz   gzip-wrapped NIfTI-1
//   .raw      little-endian f32 array with a "<stem>.dims" sidecar ("x y z")
// Scaling is applied (value = slope * stored + inter, slope 0 read as 1).
VoxelGrid LoadVolume(const std::filesystem::path& path);

// Writes a volume; .nii/.nii.gz/.raw by extension. Float32 output round-trips
// bit-exactly through LoadVolume. Uint8 output rounds and clamps to [0, 255].
void SaveVolume(const VoxelGrid& grid, const std::filesystem::path& path,
                NiftiDatatype type = NiftiDatatype::kFloat32);

// (v - min) / (max - min); a constant volume maps to all zeros.
VoxelGrid NormalizeIntensity(const VoxelGrid& grid);

enum class Interpolation { kNearest, kTrilinear };

// Resamples to `target` voxel counts. Output voxel i samples the source at
// continuous coordinate i * source / target, clamped to [0, source - 1].
// Nearest rounds half-up. Spacing is scaled so the physical extent is kept.
VoxelGrid ResizeVolume(const VoxelGrid& grid, Dims target, Interpolation mode);

struct LesionSpec {
  std::array<double, 3> center = {0, 0, 0};
  double radius = 0;
  float intensity_delta = 0.5f;
};

struct BackgroundSpec {
  float base = 0.2f;
  float noise_amplitude = 0.0f;
};

// Synthetic volume with a spherical lesion. Returns {volume, mask}; the mask
// is 1 exactly on {p : |p - center| <= radius} over integer voxel coordinates.
// Every voxel is base + noise * U[-1, 1), lesion voxels add the delta.
// Throws InvalidPhantomSpec when the sphere leaves the volume.
std::pair<VoxelGrid, VoxelGrid> MakePhantom(Dims dims, const LesionSpec& lesion,
                                            const BackgroundSpec& background,
                                            uint64_t seed);

}  // namespace rex3d

#endif  // REX3D_VOLUME_IO_H_
