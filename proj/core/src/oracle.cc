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

#include "rex3d/oracle.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "rex3d/errors.h"

namespace rex3d {

QueryBudget::QueryBudget(int64_t limit) : limit_(limit) {
  if (limit < 0) throw InvalidArgument("query budget must be non-negative");
}

void QueryBudget::Charge(int64_t count) {
  int64_t current = used_.load(std::memory_order_relaxed);
  do {
    if (current >= limit_) {
      throw BudgetExhausted("query budget of " + std::to_string(limit_) +
                            " model calls exhausted");
    }
  } while (!used_.compare_exchange_weak(current, current + count,
                                        std::memory_order_relaxed));
}

std::vector<OracleVerdict> ClassifyBatch(Oracle& oracle,
                                         std::span<const VoxelGrid> mutants,
                                         QueryBudget* budget) {
  if (mutants.empty()) throw InvalidArgument("empty classification batch");
  for (const VoxelGrid& m : mutants) {
    if (m.dims() != mutants.front().dims()) {
      throw InvalidArgument("batch volumes have differing dims");
    }
  }
  if (budget != nullptr) budget->Charge(static_cast<int64_t>(mutants.size()));
  std::vector<OracleVerdict> verdicts = oracle.Classify(mutants);
  if (verdicts.size() != mutants.size()) {
    throw ProtocolError("oracle returned " + std::to_string(verdicts.size()) +
                        " verdicts for " + std::to_string(mutants.size()) +
                        " volumes");
  }
  return verdicts;
}

OracleVerdict ClassifyOne(Oracle& oracle, const VoxelGrid& volume,
                          QueryBudget* budget) {
  return ClassifyBatch(oracle, std::span<const VoxelGrid>(&volume, 1), budget)
      .front();
}

double SquashConfidence(double stat, double tau) {
  return 1.0 / (1.0 + std::exp(-10.0 * (stat - tau)));
}

double RegionMean(const VoxelGrid& volume, const Region& region) {
  if (!region.FitsIn(volume.dims())) {
    throw InvalidArgument("oracle region " + region.ToString() + " outside " +
                          volume.dims().ToString());
  }
  double sum = 0.0;
  for (int64_t z = region.depth.start; z < region.depth.end; ++z) {
    for (int64_t y = region.col.start; y < region.col.end; ++y) {
      for (int64_t x = region.row.start; x < region.row.end; ++x) {
        sum += volume.at(x, y, z);
      }
    }
  }
  return sum / static_cast<double>(RegionVoxelCount(region));
}

namespace {

Region SphereBounds(const SphereLesion& s) {
  Region r;
  for (const Axis a : kAllAxes) {
    const int i = static_cast<int>(a);
    r[a] = {static_cast<int64_t>(std::ceil(s.center[i] - s.radius)),
            static_cast<int64_t>(std::floor(s.center[i] + s.radius)) + 1};
  }
  return r;
}

}  // namespace

double SphereMean(const VoxelGrid& volume, const SphereLesion& sphere) {
  const Region box = SphereBounds(sphere);
  const Dims& dims = volume.dims();
  const double r2 = sphere.radius * sphere.radius;
  double sum = 0.0;
  int64_t count = 0;
  for (int64_t z = std::max<int64_t>(box.depth.start, 0);
       z < std::min(box.depth.end, dims.z); ++z) {
    for (int64_t y = std::max<int64_t>(box.col.start, 0);
         y < std::min(box.col.end, dims.y); ++y) {
      for (int64_t x = std::max<int64_t>(box.row.start, 0);
           x < std::min(box.row.end, dims.x); ++x) {
        const double dx = static_cast<double>(x) - sphere.center[0];
        const double dy = static_cast<double>(y) - sphere.center[1];
        const double dz = static_cast<double>(z) - sphere.center[2];
        if (dx * dx + dy * dy + dz * dz <= r2) {
          sum += volume.at(x, y, z);
          ++count;
        }
      }
    }
  }
  if (count == 0) {
    throw InvalidArgument("sphere oracle contains no voxels of a " +
                          dims.ToString() + " volume");
  }
  return sum / static_cast<double>(count);
}

namespace {

std::string Num(double v) {
  std::ostringstream os;
  os.precision(std::numeric_limits<double>::max_digits10);
  os << v;
  return os.str();
}

std::string RegionArgs(const Region& r) {
  return std::to_string(r.row.start) + "," + std::to_string(r.row.end) + "," +
         std::to_string(r.col.start) + "," + std::to_string(r.col.end) + "," +
         std::to_string(r.depth.start) + "," + std::to_string(r.depth.end);
}

OracleVerdict Decide(double stat, double tau) {
  return {stat > tau ? 1 : 0, SquashConfidence(stat, tau)};
}

class RegionMeanOracle final : public Oracle {
 public:
  explicit RegionMeanOracle(RegionMeanThreshold p) : p_(p) {}

  std::vector<OracleVerdict> Classify(std::span<const VoxelGrid> batch) override {
    std::vector<OracleVerdict> out;
    out.reserve(batch.size());
    for (const VoxelGrid& v : batch) out.push_back(Decide(RegionMean(v, p_.region), p_.tau));
    return out;
  }
  std::optional<Region> DependencyRegion() const override { return p_.region; }
  std::string Describe() const override {
    return "region:" + RegionArgs(p_.region) + "," + Num(p_.tau);
  }

 private:
  RegionMeanThreshold p_;
};

class SphereOracle final : public Oracle {
 public:
  explicit SphereOracle(SphereLesion p) : p_(p) {}

  std::vector<OracleVerdict> Classify(std::span<const VoxelGrid> batch) override {
    std::vector<OracleVerdict> out;
    out.reserve(batch.size());
    for (const VoxelGrid& v : batch) out.push_back(Decide(SphereMean(v, p_), p_.tau));
    return out;
  }
  std::optional<Region> DependencyRegion() const override { return SphereBounds(p_); }
  std::string Describe() const override {
    return "sphere:" + Num(p_.center[0]) + "," + Num(p_.center[1]) + "," +
           Num(p_.center[2]) + "," + Num(p_.radius) + "," + Num(p_.tau);
  }

 private:
  SphereLesion p_;
};

class ConjunctionOracle final : public Oracle {
 public:
  explicit ConjunctionOracle(Conjunction p) : p_(std::move(p)) {
    if (p_.terms.empty()) throw InvalidArgument("conjunction needs at least one term");
  }

  std::vector<OracleVerdict> Classify(std::span<const VoxelGrid> batch) override {
    std::vector<OracleVerdict> out;
    out.reserve(batch.size());
    for (const VoxelGrid& v : batch) {
      double margin = std::numeric_limits<double>::infinity();
      for (const auto& term : p_.terms) {
        margin = std::min(margin, RegionMean(v, term.region) - term.tau);
      }
      out.push_back(Decide(margin, 0.0));
    }
    return out;
  }
  std::optional<Region> DependencyRegion() const override {
    Region box = p_.terms.front().region;
    for (const auto& term : p_.terms) {
      for (const Axis a : kAllAxes) {
        box[a].start = std::min(box[a].start, term.region[a].start);
        box[a].end = std::max(box[a].end, term.region[a].end);
      }
    }
    return box;
  }
  std::string Describe() const override {
    std::string s = "conj:";
    for (size_t i = 0; i < p_.terms.size(); ++i) {
      if (i > 0) s += ";";
      s += RegionArgs(p_.terms[i].region) + "," + Num(p_.terms[i].tau);
    }
    return s;
  }

 private:
  Conjunction p_;
};

class ConstantOracle final : public Oracle {
 public:
  explicit ConstantOracle(ConstantLabel p) : p_(p) {}

  std::vector<OracleVerdict> Classify(std::span<const VoxelGrid> batch) override {
    return std::vector<OracleVerdict>(batch.size(), OracleVerdict{p_.label, 1.0});
  }
  std::string Describe() const override { return "const:" + std::to_string(p_.label); }

 private:
  ConstantLabel p_;
};

std::vector<double> ParseNumbers(std::string_view text, std::string_view what) {
  std::vector<double> out;
  std::string item;
  std::istringstream in{std::string(text)};
  while (std::getline(in, item, ',')) {
    size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != item.size()) {
      throw InvalidArgument("bad number \"" + item + "\" in " + std::string(what));
    }
    out.push_back(v);
  }
  return out;
}

RegionMeanThreshold ParseRegionTerm(std::string_view text) {
  const auto n = ParseNumbers(text, text);
  if (n.size() != 7) {
    throw InvalidArgument("region term needs x0,x1,y0,y1,z0,z1,tau: " +
                          std::string(text));
  }
  Region r{{static_cast<int64_t>(n[0]), static_cast<int64_t>(n[1])},
           {static_cast<int64_t>(n[2]), static_cast<int64_t>(n[3])},
           {static_cast<int64_t>(n[4]), static_cast<int64_t>(n[5])}};
  if (!r.IsValid()) throw InvalidArgument("empty oracle region " + r.ToString());
  return {r, n[6]};
}

}  // namespace

std::unique_ptr<Oracle> MakeSyntheticOracle(SyntheticOracleKind kind) {
  struct Visitor {
    std::unique_ptr<Oracle> operator()(RegionMeanThreshold& p) const {
      return std::make_unique<RegionMeanOracle>(p);
    }
    std::unique_ptr<Oracle> operator()(SphereLesion& p) const {
      return std::make_unique<SphereOracle>(p);
    }
    std::unique_ptr<Oracle> operator()(Conjunction& p) const {
      return std::make_unique<ConjunctionOracle>(std::move(p));
    }
    std::unique_ptr<Oracle> operator()(ConstantLabel& p) const {
      return std::make_unique<ConstantOracle>(p);
    }
  };
  return std::visit(Visitor{}, kind);
}

SyntheticOracleKind ParseOracleKind(std::string_view text) {
  const auto colon = text.find(':');
  if (colon == std::string_view::npos) {
    throw InvalidArgument("oracle spec needs kind:args, got \"" + std::string(text) + "\"");
  }
  const std::string_view kind = text.substr(0, colon);
  const std::string_view args = text.substr(colon + 1);
  if (kind == "sphere") {
    const auto n = ParseNumbers(args, text);
    if (n.size() != 5) throw InvalidArgument("sphere oracle needs cx,cy,cz,r,tau");
    if (n[3] < 0) throw InvalidArgument("sphere radius must be non-negative");
    return SphereLesion{{n[0], n[1], n[2]}, n[3], n[4]};
  }
  if (kind == "region") return ParseRegionTerm(args);
  if (kind == "conj") {
    Conjunction c;
    std::string term;
    std::istringstream in{std::string(args)};
    while (std::getline(in, term, ';')) c.terms.push_back(ParseRegionTerm(term));
    if (c.terms.empty()) throw InvalidArgument("conjunction needs at least one term");
    return c;
  }
  if (kind == "const") {
    const auto n = ParseNumbers(args, text);
    if (n.size() != 1) throw InvalidArgument("const oracle needs one label");
    return ConstantLabel{static_cast<int>(n[0])};
  }
  throw InvalidArgument("unknown oracle kind \"" + std::string(kind) + "\"");
}

}  // namespace rex3d
