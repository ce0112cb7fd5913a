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

#include "cli/render.h"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <fstream>

#include "rex3d/errors.h"

namespace rex3d::cli {

Plane ParsePlane(std::string_view name) {
  if (name == "axial") return Plane::kAxial;
  if (name == "sagittal") return Plane::kSagittal;
  if (name == "coronal") return Plane::kCoronal;
  throw InvalidArgument("unknown plane \"" + std::string(name) + "\"");
}

const char* PlaneName(Plane plane) {
  switch (plane) {
    case Plane::kAxial:
      return "axial";
    case Plane::kSagittal:
      return "sagittal";
    case Plane::kCoronal:
      return "coronal";
  }
  return "?";
}

const std::array<Rgb, 256>& DivergingColormap() {
  static const std::array<Rgb, 256> kMap = [] {
    std::array<Rgb, 256> m;
    for (int i = 0; i < 256; ++i) {
      const double t = i / 255.0;
      auto u8 = [](double v) { return static_cast<uint8_t>(std::lround(v)); };
      if (t <= 0.5) {
        const uint8_t c = u8(255.0 * 2.0 * t);
        m[i] = {c, c, 255};
      } else {
        const uint8_t c = u8(255.0 * 2.0 * (1.0 - t));
        m[i] = {255, c, c};
      }
    }
    return m;
  }();
  return kMap;
}

namespace {

struct PlaneGeometry {
  int64_t width;
  int64_t height;
  int64_t depth;  // extent along the fixed axis
};

PlaneGeometry Geometry(const Dims& d, Plane plane) {
  switch (plane) {
    case Plane::kAxial:
      return {d.x, d.y, d.z};
    case Plane::kSagittal:
      return {d.y, d.z, d.x};
    case Plane::kCoronal:
      return {d.x, d.z, d.y};
  }
  return {0, 0, 0};
}

int64_t VoxelIndex(const VoxelGrid& g, Plane plane, int64_t slice, int64_t col,
                   int64_t row) {
  switch (plane) {
    case Plane::kAxial:
      return g.Index(col, row, slice);
    case Plane::kSagittal:
      return g.Index(slice, col, row);
    case Plane::kCoronal:
      return g.Index(col, slice, row);
  }
  return 0;
}

void DrawContour(const VoxelGrid& mask, Plane plane, int64_t slice,
                 const PlaneGeometry& geo, Rgb color, Image& img) {
  auto inside = [&](int64_t c, int64_t r) {
    if (c < 0 || r < 0 || c >= geo.width || r >= geo.height) return false;
    return mask[VoxelIndex(mask, plane, slice, c, r)] != 0.0f;
  };
  for (int64_t r = 0; r < geo.height; ++r) {
    for (int64_t c = 0; c < geo.width; ++c) {
      if (!inside(c, r)) continue;
      if (inside(c - 1, r) && inside(c + 1, r) && inside(c, r - 1) &&
          inside(c, r + 1)) {
        continue;
      }
      const size_t at = 3 * static_cast<size_t>(r * geo.width + c);
      img.rgb[at] = color.r;
      img.rgb[at + 1] = color.g;
      img.rgb[at + 2] = color.b;
    }
  }
}

}  // namespace

int64_t ResolveSlice(const Dims& dims, Plane plane, std::optional<int64_t> slice) {
  const int64_t depth = Geometry(dims, plane).depth;
  const int64_t s = slice.value_or(depth / 2);
  if (s < 0 || s >= depth) {
    throw InvalidArgument("slice " + std::to_string(s) + " outside " +
                          PlaneName(plane) + " range [0," + std::to_string(depth) + ")");
  }
  return s;
}

Image RenderSlice(const RenderInputs& in, Plane plane, int64_t slice,
                  const RenderSpec& spec) {
  if (in.base == nullptr) throw InvalidArgument("render needs a base volume");
  const VoxelGrid& base = *in.base;
  for (const VoxelGrid* v : {in.map, in.explanation, in.truth}) {
    if (v != nullptr && v->dims() != base.dims()) {
      throw InvalidArgument("overlay dims " + v->dims().ToString() +
                            " differ from base dims " + base.dims().ToString());
    }
  }
  if (!(spec.alpha >= 0.0 && spec.alpha <= 1.0)) {
    throw InvalidArgument("alpha must lie in [0, 1]");
  }
  slice = ResolveSlice(base.dims(), plane, slice);
  const PlaneGeometry geo = Geometry(base.dims(), plane);

  const auto [lo_it, hi_it] = std::minmax_element(base.data().begin(), base.data().end());
  const double lo = *lo_it;
  const double range = static_cast<double>(*hi_it) - lo;
  float map_max = 0.0f;
  if (in.map != nullptr) {
    map_max = *std::max_element(in.map->data().begin(), in.map->data().end());
  }
  const auto& cmap = DivergingColormap();

  Image img{geo.width, geo.height, std::vector<uint8_t>(3 * geo.width * geo.height)};
  for (int64_t r = 0; r < geo.height; ++r) {
    for (int64_t c = 0; c < geo.width; ++c) {
      const int64_t idx = VoxelIndex(base, plane, slice, c, r);
      const double t = range > 0.0 ? (base[idx] - lo) / range : 0.0;
      const double gray = std::round(255.0 * std::clamp(t, 0.0, 1.0));
      double px[3] = {gray, gray, gray};
      if (map_max > 0.0f && (*in.map)[idx] > 0.0f) {
        const double v = std::clamp((*in.map)[idx] / map_max, 0.0f, 1.0f);
        const Rgb col = cmap[static_cast<size_t>(std::lround(v * 255.0))];
        const double target[3] = {static_cast<double>(col.r),
                                  static_cast<double>(col.g),
                                  static_cast<double>(col.b)};
        for (int k = 0; k < 3; ++k) {
          px[k] = std::round((1.0 - spec.alpha) * gray + spec.alpha * target[k]);
        }
      }
      const size_t at = 3 * static_cast<size_t>(r * geo.width + c);
      for (int k = 0; k < 3; ++k) img.rgb[at + k] = static_cast<uint8_t>(px[k]);
    }
  }
  if (in.truth != nullptr) DrawContour(*in.truth, plane, slice, geo, spec.truth_color, img);
  if (in.explanation != nullptr) {
    DrawContour(*in.explanation, plane, slice, geo, spec.explanation_color, img);
  }
  return img;
}

std::vector<uint8_t> EncodePng(const Image& image) {
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr,
                                            nullptr, nullptr);
  if (png == nullptr) throw Error("png_create_write_struct failed");
  png_infop info = png_create_info_struct(png);
  if (info == nullptr) {
    png_destroy_write_struct(&png, nullptr);
    throw Error("png_create_info_struct failed");
  }
  std::vector<uint8_t> bytes;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw Error("PNG encoding failed");
  }
  png_set_write_fn(
      png, &bytes,
      [](png_structp p, png_bytep data, png_size_t n) {
        auto* out = static_cast<std::vector<uint8_t>*>(png_get_io_ptr(p));
        out->insert(out->end(), data, data + n);
      },
      [](png_structp) {});
  png_set_IHDR(png, info, static_cast<png_uint_32>(image.width),
               static_cast<png_uint_32>(image.height), 8, PNG_COLOR_TYPE_RGB,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_set_compression_level(png, 6);
  png_write_info(png, info);
  for (int64_t r = 0; r < image.height; ++r) {
    png_write_row(png, const_cast<png_bytep>(image.rgb.data() + 3 * r * image.width));
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  return bytes;
}

void WritePng(const Image& image, const std::filesystem::path& path) {
  const std::vector<uint8_t> bytes = EncodePng(image);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open for writing: " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed: " + path.string());
}

}  // namespace rex3d::cli
