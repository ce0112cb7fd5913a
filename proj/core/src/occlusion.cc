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

#include "rex3d/occlusion.h"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <stdexcept>

#include "rex3d/errors.h"
#include "rex3d/volume_io.h"

namespace rex3d {

OcclusionSpec OcclusionSpec::Donor(VoxelGrid reference) {
  return {DonorVolume{std::make_shared<const VoxelGrid>(std::move(reference))}};
}

void OcclusionSpec::Validate(const Dims& dims) const {
  if (const auto* donor = std::get_if<DonorVolume>(&strategy_)) {
    if (donor->reference == nullptr) {
      throw DonorShapeMismatch("donor occlusion without a reference volume");
    }
    if (donor->reference->dims() != dims) {
      throw DonorShapeMismatch("donor dims " + donor->reference->dims().ToString() +
                               " differ from subject dims " + dims.ToString());
    }
  }
}

std::string OcclusionSpec::Describe() const {
  struct Visitor {
    std::string operator()(const ZeroValue&) const { return "zero"; }
    std::string operator()(const ConstantValue& c) const {
      char buf[64];
      std::snprintf(buf, sizeof buf, "value:%.9g", static_cast<double>(c.value));
      return buf;
    }
    std::string operator()(const DonorVolume&) const { return "donor"; }
  };
  return std::visit(Visitor{}, strategy_);
}

OcclusionSpec ParseOcclusion(std::string_view text) {
  const auto colon = text.find(':');
  const std::string_view kind = text.substr(0, colon);
  const std::string arg =
      colon == std::string_view::npos ? "" : std::string(text.substr(colon + 1));
  if (kind == "zero" && colon == std::string_view::npos) return OcclusionSpec::Zero();
  if (kind == "value" && !arg.empty()) {
    size_t used = 0;
    float v = 0.0f;
    try {
      v = std::stof(arg, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != arg.size()) throw InvalidArgument("bad occlusion value: " + arg);
    return OcclusionSpec::Constant(v);
  }
  if (kind == "mean" && !arg.empty()) {
    const std::filesystem::path list_path(arg);
    std::ifstream list(list_path);
    if (!list) throw IoError("cannot open cohort list " + arg);
    std::vector<VoxelGrid> cohort;
    std::string line;
    while (std::getline(list, line)) {
      line.erase(line.find_last_not_of(" \t\r") + 1);
      if (line.empty() || line[0] == '#') continue;
      std::filesystem::path p(line);
      if (p.is_relative()) p = list_path.parent_path() / p;
      cohort.push_back(LoadVolume(p));
    }
    return OcclusionSpec::Constant(MeanIntensityValue(cohort));
  }
  if (kind == "donor" && !arg.empty()) {
    return OcclusionSpec::Donor(LoadVolume(arg));
  }
  throw InvalidArgument("unknown occlusion \"" + std::string(text) +
                        "\"; expected zero, value:<v>, mean:<list>, donor:<path>");
}

void Mutant::SetVerdict(bool pass, double confidence) {
  if (verdict_ != Verdict::kUnevaluated) {
    throw std::logic_error("mutant verdict already set");
  }
  verdict_ = pass ? Verdict::kPass : Verdict::kFail;
  confidence_ = confidence;
}

namespace {

VoxelGrid OccludedBase(const VoxelGrid& d, const OcclusionSpec& spec) {
  spec.Validate(d.dims());
  struct Visitor {
    const VoxelGrid& d;
    VoxelGrid operator()(const ZeroValue&) const {
      return VoxelGrid(d.dims(), 0.0f, d.spacing());
    }
    VoxelGrid operator()(const ConstantValue& c) const {
      return VoxelGrid(d.dims(), c.value, d.spacing());
    }
    VoxelGrid operator()(const DonorVolume& donor) const {
      VoxelGrid out = *donor.reference;
      out.set_spacing(d.spacing());
      return out;
    }
  };
  return std::visit(Visitor{d}, spec.strategy());
}

}  // namespace

VoxelGrid ApplyMask(const VoxelGrid& d, std::span<const Region> kept,
                    const OcclusionSpec& spec) {
  VoxelGrid out = OccludedBase(d, spec);
  const Dims& dims = d.dims();
  const auto src = d.data();
  auto dst = out.data();
  for (const Region& r : kept) {
    if (!r.FitsIn(dims)) {
      throw InvalidArgument("kept region " + r.ToString() + " outside " +
                            dims.ToString());
    }
    const int64_t run = r.row.Extent();
    for (int64_t z = r.depth.start; z < r.depth.end; ++z) {
      for (int64_t y = r.col.start; y < r.col.end; ++y) {
        const int64_t at = d.Index(r.row.start, y, z);
        std::copy_n(src.begin() + at, run, dst.begin() + at);
      }
    }
  }
  return out;
}

VoxelGrid ApplyVoxelMask(const VoxelGrid& d, const VoxelGrid& keep_mask,
                         const OcclusionSpec& spec) {
  if (keep_mask.dims() != d.dims()) {
    throw InvalidArgument("mask dims " + keep_mask.dims().ToString() +
                          " differ from volume dims " + d.dims().ToString());
  }
  VoxelGrid out = OccludedBase(d, spec);
  for (int64_t i = 0; i < d.size(); ++i) {
    if (keep_mask[i] != 0.0f) out[i] = d[i];
  }
  return out;
}

float MeanIntensityValue(std::span<const VoxelGrid> cohort) {
  if (cohort.empty()) throw EmptyCohort("mean occlusion needs at least one volume");
  double sum = 0.0;
  int64_t count = 0;
  for (const VoxelGrid& v : cohort) {
    if (v.dims() != cohort.front().dims()) {
      throw InvalidArgument("cohort volumes have differing dims");
    }
    for (const float x : v.data()) sum += x;
    count += v.size();
  }
  return static_cast<float>(sum / static_cast<double>(count));
}

}  // namespace rex3d
