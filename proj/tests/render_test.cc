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

#include <cmath>

#include <gtest/gtest.h>

#include "rex3d/errors.h"
#include "support/test_support.h"

namespace rex3d::cli {
namespace {

// Decodes through libpng's simplified reader into packed RGB.
Image DecodePng(const std::vector<uint8_t>& bytes) {
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  EXPECT_NE(png_image_begin_read_from_memory(&image, bytes.data(), bytes.size()), 0);
  image.format = PNG_FORMAT_RGB;
  Image out{image.width, image.height, std::vector<uint8_t>(PNG_IMAGE_SIZE(image))};
  EXPECT_NE(png_image_finish_read(&image, nullptr, out.rgb.data(), 0, nullptr), 0);
  return out;
}

uint8_t ExpectedGray(const VoxelGrid& base, int64_t idx) {
  float lo = base[0], hi = base[0];
  for (float v : base.data()) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  return static_cast<uint8_t>(std::lround(255.0 * (base[idx] - lo) / (hi - lo)));
}

TEST(ColormapTest, EndpointsAndMiddle) {
  const auto& cmap = DivergingColormap();
  EXPECT_EQ(cmap[0], (Rgb{0, 0, 255}));
  EXPECT_EQ(cmap[255], (Rgb{255, 0, 0}));
  EXPECT_EQ(cmap[127], (Rgb{254, 254, 255}));
  EXPECT_EQ(cmap[128], (Rgb{255, 254, 254}));
  for (int i = 1; i < 128; ++i) EXPECT_GE(cmap[i].r, cmap[i - 1].r);
  for (int i = 129; i < 256; ++i) EXPECT_LE(cmap[i].g, cmap[i - 1].g);
}

TEST(RenderSliceTest, ZeroMapIsPureGrayscale) {
  const VoxelGrid base = testing::RandomVolume({32, 32, 32}, 1);
  const VoxelGrid zero({32, 32, 32}, 0.0f);
  const RenderSpec spec;
  for (Plane plane : {Plane::kAxial, Plane::kSagittal, Plane::kCoronal}) {
    const Image with_map = RenderSlice({&base, &zero, nullptr, nullptr}, plane, 16, spec);
    const Image without = RenderSlice({&base, nullptr, nullptr, nullptr}, plane, 16, spec);
    EXPECT_EQ(with_map.rgb, without.rgb);
    EXPECT_EQ(EncodePng(with_map), EncodePng(without));
    for (int64_t r = 0; r < with_map.height; ++r) {
      for (int64_t c = 0; c < with_map.width; ++c) {
        const Rgb px = with_map.Pixel(c, r);
        ASSERT_EQ(px.r, px.g);
        ASSERT_EQ(px.g, px.b);
      }
    }
  }
}

TEST(RenderSliceTest, PlaneGeometryAndVoxelMapping) {
  const VoxelGrid base = testing::RandomVolume({6, 5, 4}, 2);
  const RenderSpec spec;
  const Image axial = RenderSlice({&base}, Plane::kAxial, 2, spec);
  EXPECT_EQ(axial.width, 6);
  EXPECT_EQ(axial.height, 5);
  EXPECT_EQ(axial.Pixel(3, 1).r, ExpectedGray(base, base.Index(3, 1, 2)));
  const Image sagittal = RenderSlice({&base}, Plane::kSagittal, 1, spec);
  EXPECT_EQ(sagittal.width, 5);
  EXPECT_EQ(sagittal.height, 4);
  EXPECT_EQ(sagittal.Pixel(4, 3).r, ExpectedGray(base, base.Index(1, 4, 3)));
  const Image coronal = RenderSlice({&base}, Plane::kCoronal, 0, spec);
  EXPECT_EQ(coronal.width, 6);
  EXPECT_EQ(coronal.height, 4);
  EXPECT_EQ(coronal.Pixel(5, 2).r, ExpectedGray(base, base.Index(5, 0, 2)));
}

TEST(RenderSliceTest, MapBlendsOnlyWherePositive) {
  const VoxelGrid base({4, 4, 1}, std::vector<float>(16, 0.0f));
  VoxelGrid b = base;
  b[15] = 1.0f;
  VoxelGrid map({4, 4, 1}, 0.0f);
  map[0] = 2.0f;  // max -> red
  map[1] = 1.0f;  // half -> cmap[128]
  RenderSpec spec;
  spec.alpha = 0.5;
  const Image img = RenderSlice({&b, &map}, Plane::kAxial, 0, spec);
  EXPECT_EQ(img.Pixel(0, 0), (Rgb{128, 0, 0}));
  const Rgb half = DivergingColormap()[128];
  EXPECT_EQ(img.Pixel(1, 0).r, static_cast<uint8_t>(std::round(0.5 * half.r)));
  EXPECT_EQ(img.Pixel(2, 0), (Rgb{0, 0, 0}));
  EXPECT_EQ(img.Pixel(3, 3), (Rgb{255, 255, 255}));
}

TEST(RenderSliceTest, FullPlaneMaskContourIsTheBorderRing) {
  const VoxelGrid base = testing::RandomVolume({8, 8, 8}, 3);
  const VoxelGrid full({8, 8, 8}, 1.0f);
  const Image img = RenderSlice({&base, nullptr, &full}, Plane::kAxial, 4, RenderSpec{});
  const Image plain = RenderSlice({&base}, Plane::kAxial, 4, RenderSpec{});
  for (int64_t r = 0; r < 8; ++r) {
    for (int64_t c = 0; c < 8; ++c) {
      const bool ring = r == 0 || c == 0 || r == 7 || c == 7;
      if (ring) {
        ASSERT_EQ(img.Pixel(c, r), kExplanationColor);
      } else {
        ASSERT_EQ(img.Pixel(c, r), plain.Pixel(c, r));
      }
    }
  }
}

TEST(RenderSliceTest, ExplanationDrawnOverTruth) {
  const VoxelGrid base = testing::RandomVolume({8, 8, 1}, 4);
  VoxelGrid square({8, 8, 1}, 0.0f);
  for (int64_t y = 2; y < 6; ++y) {
    for (int64_t x = 2; x < 6; ++x) square.at(x, y, 0) = 1.0f;
  }
  VoxelGrid dot({8, 8, 1}, 0.0f);
  dot.at(2, 2, 0) = 1.0f;
  const Image img = RenderSlice({&base, nullptr, &dot, &square}, Plane::kAxial, 0, RenderSpec{});
  EXPECT_EQ(img.Pixel(2, 2), kExplanationColor);
  EXPECT_EQ(img.Pixel(3, 2), kTruthColor);
  EXPECT_EQ(img.Pixel(5, 5), kTruthColor);
  EXPECT_NE(img.Pixel(3, 3), kTruthColor);
}

TEST(RenderSliceTest, SliceResolutionAndErrors) {
  EXPECT_EQ(ResolveSlice({32, 32, 32}, Plane::kAxial, std::nullopt), 16);
  EXPECT_EQ(ResolveSlice({7, 9, 5}, Plane::kAxial, std::nullopt), 2);
  EXPECT_EQ(ResolveSlice({7, 9, 5}, Plane::kSagittal, std::nullopt), 3);
  EXPECT_EQ(ResolveSlice({7, 9, 5}, Plane::kCoronal, std::nullopt), 4);
  EXPECT_THROW(ResolveSlice({7, 9, 5}, Plane::kAxial, 5), InvalidArgument);
  EXPECT_THROW(ResolveSlice({7, 9, 5}, Plane::kAxial, -1), InvalidArgument);
  const VoxelGrid base({4, 4, 4});
  RenderSpec spec;
  spec.alpha = 1.5;
  EXPECT_THROW(RenderSlice({&base}, Plane::kAxial, 0, spec), InvalidArgument);
  const VoxelGrid other({4, 4, 5});
  EXPECT_THROW(RenderSlice({&base, &other}, Plane::kAxial, 0, RenderSpec{}), Error);
  EXPECT_EQ(ParsePlane("coronal"), Plane::kCoronal);
  EXPECT_THROW(ParsePlane("oblique"), InvalidArgument);
}

TEST(EncodePngTest, DecodesToSamePixelsAndIsStable) {
  const auto [volume, mask] = testing::StandardPhantom(1);
  VoxelGrid map({32, 32, 32}, 0.0f);
  for (int64_t i = 0; i < map.size(); ++i) map[i] = mask[i] * 3.0f;
  const Image img = RenderSlice({&volume, &map, &mask, &mask}, Plane::kAxial, 16, RenderSpec{});
  EXPECT_EQ(img.width, 32);
  EXPECT_EQ(img.height, 32);
  const auto bytes = EncodePng(img);
  EXPECT_EQ(bytes, EncodePng(img));
  const Image back = DecodePng(bytes);
  EXPECT_EQ(back.width, 32);
  EXPECT_EQ(back.height, 32);
  EXPECT_EQ(back.rgb, img.rgb);
}

}  // namespace
}  // namespace rex3d::cli
