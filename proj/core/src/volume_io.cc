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

#include "rex3d/volume_io.h"

#include <zlib.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "rex3d/errors.h"
#include "rex3d/random.h"

namespace rex3d {
namespace {

// Little-endian field access independent of the host byte order.
template <typename T>
T ReadLe(std::span<const uint8_t> bytes, size_t offset) {
  using U = std::conditional_t<sizeof(T) == 2, uint16_t,
                               std::conditional_t<sizeof(T) == 4, uint32_t, uint8_t>>;
  U raw = 0;
  for (size_t i = 0; i < sizeof(T); ++i) {
    raw |= static_cast<U>(static_cast<U>(bytes[offset + i]) << (8 * i));
  }
  return std::bit_cast<T>(raw);
}

template <typename T>
void WriteLe(std::span<uint8_t> bytes, size_t offset, T value) {
  using U = std::conditional_t<sizeof(T) == 2, uint16_t,
                               std::conditional_t<sizeof(T) == 4, uint32_t, uint8_t>>;
  const U raw = std::bit_cast<U>(value);
  for (size_t i = 0; i < sizeof(T); ++i) {
    bytes[offset + i] = static_cast<uint8_t>(raw >> (8 * i));
  }
}

enum class FileKind { kNifti, kNiftiGz, kRaw };

bool EndsWith(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() &&
         s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

FileKind KindOf(const std::filesystem::path& path) {
  const std::string name = path.filename().string();
  if (EndsWith(name, ".nii.gz")) return FileKind::kNiftiGz;
  if (EndsWith(name, ".nii")) return FileKind::kNifti;
  if (EndsWith(name, ".raw")) return FileKind::kRaw;
  throw FormatError("unrecognized volume extension: " + path.string());
}

std::vector<uint8_t> ReadPlain(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                             std::istreambuf_iterator<char>());
  if (in.bad()) throw IoError("read failed: " + path.string());
  return bytes;
}

std::vector<uint8_t> ReadGzip(const std::filesystem::path& path) {
  gzFile file = gzopen(path.c_str(), "rb");
  if (file == nullptr) throw IoError("cannot open " + path.string());
  std::vector<uint8_t> bytes;
  std::array<uint8_t, 1 << 16> chunk;
  for (;;) {
    const int n = gzread(file, chunk.data(), static_cast<unsigned>(chunk.size()));
    if (n < 0) {
      int errnum = 0;
      const std::string msg = gzerror(file, &errnum);
      gzclose(file);
      throw TruncatedFile("gzip stream error in " + path.string() + ": " + msg);
    }
    if (n == 0) break;
    bytes.insert(bytes.end(), chunk.begin(), chunk.begin() + n);
  }
  gzclose(file);
  return bytes;
}

void WritePlain(const std::filesystem::path& path, std::span<const uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open for writing: " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed: " + path.string());
}

void WriteGzip(const std::filesystem::path& path, std::span<const uint8_t> bytes) {
  gzFile file = gzopen(path.c_str(), "wb6");
  if (file == nullptr) throw IoError("cannot open for writing: " + path.string());
  size_t offset = 0;
  while (offset < bytes.size()) {
    const unsigned n = static_cast<unsigned>(
        std::min<size_t>(bytes.size() - offset, 1u << 30));
    if (gzwrite(file, bytes.data() + offset, n) != static_cast<int>(n)) {
      gzclose(file);
      throw IoError("gzip write failed: " + path.string());
    }
    offset += n;
  }
  if (gzclose(file) != Z_OK) throw IoError("gzip close failed: " + path.string());
}

std::filesystem::path SidecarPath(const std::filesystem::path& raw) {
  std::filesystem::path p = raw;
  p.replace_extension(".dims");
  return p;
}

VoxelGrid DecodeNifti(std::span<const uint8_t> bytes) {
  const NiftiHeader header = NiftiHeader::Parse(bytes);
  Dims dims{header.dim[1], header.dim[2], header.dim[3]};
  const int64_t count = dims.VoxelCount();
  const int bpv = BytesPerVoxel(header.datatype);
  const size_t offset = static_cast<size_t>(header.vox_offset);
  const size_t needed = offset + static_cast<size_t>(count) * bpv;
  if (bytes.size() < needed) {
    throw TruncatedFile("NIfTI payload truncated: need " + std::to_string(needed) +
                        " bytes, have " + std::to_string(bytes.size()));
  }

  float slope = header.scl_slope;
  if (slope == 0.0f || !std::isfinite(slope)) slope = 1.0f;
  float inter = std::isfinite(header.scl_inter) ? header.scl_inter : 0.0f;
  const bool identity = slope == 1.0f && inter == 0.0f;

  std::vector<float> data(static_cast<size_t>(count));
  for (int64_t i = 0; i < count; ++i) {
    const size_t at = offset + static_cast<size_t>(i) * bpv;
    float stored = 0.0f;
    switch (header.datatype) {
      case NiftiDatatype::kUint8:
        stored = static_cast<float>(bytes[at]);
        break;
      case NiftiDatatype::kInt16:
        stored = static_cast<float>(ReadLe<int16_t>(bytes, at));
        break;
      case NiftiDatatype::kFloat32:
        stored = ReadLe<float>(bytes, at);
        break;
    }
    data[i] = identity ? stored : slope * stored + inter;
  }

  Spacing spacing;
  auto pix = [&](int i) {
    const float v = std::fabs(header.pixdim[i]);
    return (v > 0.0f && std::isfinite(v)) ? v : 1.0f;
  };
  spacing = {pix(1), pix(2), pix(3)};
  return VoxelGrid(dims, std::move(data), spacing);
}

std::vector<uint8_t> EncodeNifti(const VoxelGrid& grid, NiftiDatatype type) {
  const Dims& dims = grid.dims();
  constexpr int64_t kMaxDim = std::numeric_limits<int16_t>::max();
  if (dims.x > kMaxDim || dims.y > kMaxDim || dims.z > kMaxDim) {
    throw InvalidArgument("dimension exceeds NIfTI-1 limit: " + dims.ToString());
  }
  NiftiHeader header;
  header.datatype = type;
  header.dim = {3, static_cast<int16_t>(dims.x), static_cast<int16_t>(dims.y),
                static_cast<int16_t>(dims.z), 1, 1, 1, 1};
  header.pixdim = {1.0f, grid.spacing().x, grid.spacing().y, grid.spacing().z,
                   1.0f, 1.0f, 1.0f, 1.0f};

  const int bpv = BytesPerVoxel(type);
  std::vector<uint8_t> bytes(kNiftiMinVoxOffset + grid.size() * bpv, 0);
  const auto head = header.Serialize();
  std::copy(head.begin(), head.end(), bytes.begin());
  std::span<uint8_t> out(bytes);
  const auto data = grid.data();
  for (int64_t i = 0; i < grid.size(); ++i) {
    const size_t at = kNiftiMinVoxOffset + static_cast<size_t>(i) * bpv;
    switch (type) {
      case NiftiDatatype::kUint8:
        out[at] = static_cast<uint8_t>(
            std::clamp(std::lround(data[i]), 0L, 255L));
        break;
      case NiftiDatatype::kInt16:
        WriteLe<int16_t>(out, at, static_cast<int16_t>(
            std::clamp(std::lround(data[i]), -32768L, 32767L)));
        break;
      case NiftiDatatype::kFloat32:
        WriteLe<float>(out, at, data[i]);
        break;
    }
  }
  return bytes;
}

VoxelGrid LoadRaw(const std::filesystem::path& path) {
  const std::filesystem::path sidecar = SidecarPath(path);
  std::ifstream dims_in(sidecar);
  if (!dims_in) throw IoError("missing raw sidecar " + sidecar.string());
  Dims dims;
  if (!(dims_in >> dims.x >> dims.y >> dims.z) || dims.x < 1 || dims.y < 1 ||
      dims.z < 1) {
    throw FormatError("malformed raw sidecar " + sidecar.string());
  }
  const std::vector<uint8_t> bytes = ReadPlain(path);
  const size_t needed = static_cast<size_t>(dims.VoxelCount()) * 4;
  if (bytes.size() < needed) {
    throw TruncatedFile("raw payload truncated: need " + std::to_string(needed) +
                        " bytes, have " + std::to_string(bytes.size()));
  }
  std::vector<float> data(static_cast<size_t>(dims.VoxelCount()));
  for (size_t i = 0; i < data.size(); ++i) data[i] = ReadLe<float>(bytes, 4 * i);
  return VoxelGrid(dims, std::move(data));
}

void SaveRaw(const VoxelGrid& grid, const std::filesystem::path& path) {
  std::vector<uint8_t> bytes(static_cast<size_t>(grid.size()) * 4);
  for (int64_t i = 0; i < grid.size(); ++i) {
    WriteLe<float>(bytes, 4 * static_cast<size_t>(i), grid[i]);
  }
  WritePlain(path, bytes);
  std::ofstream sidecar(SidecarPath(path), std::ios::trunc);
  sidecar << grid.dims().x << ' ' << grid.dims().y << ' ' << grid.dims().z << '\n';
  if (!sidecar) throw IoError("write failed: " + SidecarPath(path).string());
}

}  // namespace

int BytesPerVoxel(NiftiDatatype type) {
  switch (type) {
    case NiftiDatatype::kUint8:
      return 1;
    case NiftiDatatype::kInt16:
      return 2;
    case NiftiDatatype::kFloat32:
      return 4;
  }
  throw UnsupportedDatatype(static_cast<int>(type));
}

NiftiHeader NiftiHeader::Parse(std::span<const uint8_t> bytes) {
  if (bytes.size() < static_cast<size_t>(kNiftiHeaderSize)) {
    throw TruncatedFile("NIfTI header truncated: " + std::to_string(bytes.size()) +
                        " bytes");
  }
  NiftiHeader h;
  const int32_t sizeof_hdr = ReadLe<int32_t>(bytes, 0);
  if (sizeof_hdr != kNiftiHeaderSize) {
    throw FormatError("sizeof_hdr is " + std::to_string(sizeof_hdr) +
                      ", expected 348 (little-endian NIfTI-1)");
  }
  std::memcpy(h.magic.data(), bytes.data() + 344, 4);
  if (h.magic != std::array<char, 4>{'n', '+', '1', '\0'}) {
    throw FormatError("bad NIfTI magic; only single-file \"n+1\" is supported");
  }
  const int16_t code = ReadLe<int16_t>(bytes, 70);
  if (code != 2 && code != 4 && code != 16) throw UnsupportedDatatype(code);
  h.datatype = static_cast<NiftiDatatype>(code);

  for (int i = 0; i < 8; ++i) h.dim[i] = ReadLe<int16_t>(bytes, 40 + 2 * i);
  const int rank = h.dim[0];
  if (rank < 1 || rank > 7) {
    throw FormatError("dim[0] out of range: " + std::to_string(rank));
  }
  for (int i = rank + 1; i < 8; ++i) h.dim[i] = 1;
  for (int i = 1; i <= 3; ++i) {
    if (h.dim[i] < 1) throw FormatError("non-positive dimension in dim[]");
  }
  for (int i = 4; i <= rank; ++i) {
    if (h.dim[i] != 1) throw FormatError("only 3D volumes are supported");
  }
  for (int i = 0; i < 8; ++i) h.pixdim[i] = ReadLe<float>(bytes, 76 + 4 * i);
  h.vox_offset = ReadLe<float>(bytes, 108);
  if (!(h.vox_offset >= static_cast<float>(kNiftiMinVoxOffset))) {
    throw FormatError("vox_offset below 352");
  }
  h.scl_slope = ReadLe<float>(bytes, 112);
  h.scl_inter = ReadLe<float>(bytes, 116);
  return h;
}

std::array<uint8_t, kNiftiHeaderSize> NiftiHeader::Serialize() const {
  std::array<uint8_t, kNiftiHeaderSize> bytes{};
  std::span<uint8_t> out(bytes);
  WriteLe<int32_t>(out, 0, kNiftiHeaderSize);
  for (int i = 0; i < 8; ++i) WriteLe<int16_t>(out, 40 + 2 * i, dim[i]);
  WriteLe<int16_t>(out, 70, static_cast<int16_t>(datatype));
  WriteLe<int16_t>(out, 72, static_cast<int16_t>(8 * BytesPerVoxel(datatype)));
  for (int i = 0; i < 8; ++i) WriteLe<float>(out, 76 + 4 * i, pixdim[i]);
  WriteLe<float>(out, 108, vox_offset);
  WriteLe<float>(out, 112, scl_slope);
  WriteLe<float>(out, 116, scl_inter);
  bytes[123] = 2;  // xyzt_units: millimetres
  std::memcpy(bytes.data() + 344, magic.data(), 4);
  return bytes;
}

VoxelGrid LoadVolume(const std::filesystem::path& path) {
  switch (KindOf(path)) {
    case FileKind::kNifti:
      return DecodeNifti(ReadPlain(path));
    case FileKind::kNiftiGz:
      return DecodeNifti(ReadGzip(path));
    case FileKind::kRaw:
      return LoadRaw(path);
  }
  throw FormatError("unreachable");
}

void SaveVolume(const VoxelGrid& grid, const std::filesystem::path& path,
                NiftiDatatype type) {
  switch (KindOf(path)) {
    case FileKind::kNifti:
      WritePlain(path, EncodeNifti(grid, type));
      return;
    case FileKind::kNiftiGz:
      WriteGzip(path, EncodeNifti(grid, type));
      return;
    case FileKind::kRaw:
      if (type != NiftiDatatype::kFloat32) {
        throw InvalidArgument("raw volumes are always float32");
      }
      SaveRaw(grid, path);
      return;
  }
}

VoxelGrid NormalizeIntensity(const VoxelGrid& grid) {
  const auto data = grid.data();
  const auto [lo_it, hi_it] = std::minmax_element(data.begin(), data.end());
  const double lo = *lo_it;
  const double range = static_cast<double>(*hi_it) - lo;
  VoxelGrid out(grid.dims(), 0.0f, grid.spacing());
  if (!(range > 0.0)) return out;
  auto dst = out.data();
  for (size_t i = 0; i < data.size(); ++i) {
    dst[i] = static_cast<float>(
        std::clamp((static_cast<double>(data[i]) - lo) / range, 0.0, 1.0));
  }
  return out;
}

VoxelGrid ResizeVolume(const VoxelGrid& grid, Dims target, Interpolation mode) {
  if (target.x < 1 || target.y < 1 || target.z < 1) {
    throw InvalidArgument("target dims must be >= 1, got " + target.ToString());
  }
  const Dims& src = grid.dims();
  if (target == src) return grid;

  const Spacing spacing{
      grid.spacing().x * static_cast<float>(src.x) / static_cast<float>(target.x),
      grid.spacing().y * static_cast<float>(src.y) / static_cast<float>(target.y),
      grid.spacing().z * static_cast<float>(src.z) / static_cast<float>(target.z)};
  VoxelGrid out(target, 0.0f, spacing);

  // Per axis: lower source index and fractional weight for every output index.
  struct Sample {
    int64_t lo;
    int64_t hi;
    double t;
  };
  auto axis_samples = [&](int64_t n_src, int64_t n_dst) {
    std::vector<Sample> s(static_cast<size_t>(n_dst));
    for (int64_t i = 0; i < n_dst; ++i) {
      double c = static_cast<double>(i) * static_cast<double>(n_src) /
                 static_cast<double>(n_dst);
      c = std::clamp(c, 0.0, static_cast<double>(n_src - 1));
      if (mode == Interpolation::kNearest) {
        const int64_t k = std::min<int64_t>(
            static_cast<int64_t>(std::floor(c + 0.5)), n_src - 1);
        s[i] = {k, k, 0.0};
      } else {
        const int64_t lo = static_cast<int64_t>(std::floor(c));
        const int64_t hi = std::min(lo + 1, n_src - 1);
        s[i] = {lo, hi, c - static_cast<double>(lo)};
      }
    }
    return s;
  };
  const auto sx = axis_samples(src.x, target.x);
  const auto sy = axis_samples(src.y, target.y);
  const auto sz = axis_samples(src.z, target.z);

  for (int64_t z = 0; z < target.z; ++z) {
    for (int64_t y = 0; y < target.y; ++y) {
      for (int64_t x = 0; x < target.x; ++x) {
        const Sample& a = sx[x];
        const Sample& b = sy[y];
        const Sample& c = sz[z];
        auto v = [&](int64_t i, int64_t j, int64_t k) {
          return static_cast<double>(grid.at(i, j, k));
        };
        // std::lerp is exact at the endpoints, bounded and constant-preserving.
        const double c00 = std::lerp(v(a.lo, b.lo, c.lo), v(a.hi, b.lo, c.lo), a.t);
        const double c10 = std::lerp(v(a.lo, b.hi, c.lo), v(a.hi, b.hi, c.lo), a.t);
        const double c01 = std::lerp(v(a.lo, b.lo, c.hi), v(a.hi, b.lo, c.hi), a.t);
        const double c11 = std::lerp(v(a.lo, b.hi, c.hi), v(a.hi, b.hi, c.hi), a.t);
        const double c0 = std::lerp(c00, c10, b.t);
        const double c1 = std::lerp(c01, c11, b.t);
        out.at(x, y, z) = static_cast<float>(std::lerp(c0, c1, c.t));
      }
    }
  }
  return out;
}

std::pair<VoxelGrid, VoxelGrid> MakePhantom(Dims dims, const LesionSpec& lesion,
                                            const BackgroundSpec& background,
                                            uint64_t seed) {
  if (dims.x < 1 || dims.y < 1 || dims.z < 1) {
    throw InvalidPhantomSpec("phantom dims must be >= 1, got " + dims.ToString());
  }
  if (!(lesion.radius >= 0.0) || !(background.noise_amplitude >= 0.0f)) {
    throw InvalidPhantomSpec("radius and noise amplitude must be non-negative");
  }
  for (int a = 0; a < 3; ++a) {
    if (lesion.center[a] - lesion.radius < 0.0 ||
        lesion.center[a] + lesion.radius > static_cast<double>(dims[a] - 1)) {
      throw InvalidPhantomSpec("lesion sphere does not fit in " + dims.ToString());
    }
  }

  VoxelGrid volume(dims, background.base);
  VoxelGrid mask(dims, 0.0f);
  Rng rng(seed);
  const double r2 = lesion.radius * lesion.radius;
  for (int64_t z = 0; z < dims.z; ++z) {
    for (int64_t y = 0; y < dims.y; ++y) {
      for (int64_t x = 0; x < dims.x; ++x) {
        float v = background.base;
        if (background.noise_amplitude > 0.0f) {
          v += static_cast<float>(background.noise_amplitude *
                                  rng.Uniform(-1.0, 1.0));
        }
        const double dx = static_cast<double>(x) - lesion.center[0];
        const double dy = static_cast<double>(y) - lesion.center[1];
        const double dz = static_cast<double>(z) - lesion.center[2];
        if (dx * dx + dy * dy + dz * dz <= r2) {
          v += lesion.intensity_delta;
          mask.at(x, y, z) = 1.0f;
        }
        volume.at(x, y, z) = v;
      }
    }
  }
  return {std::move(volume), std::move(mask)};
}

}  // namespace rex3d
