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

// Acceptance suite. Prints one PASS/FAIL line per criterion and exits
// non-zero if any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "cli/commands.h"
#include "cli/render.h"
#include "rex3d/experiment.h"
#include "rex3d/explanation.h"
#include "rex3d/random.h"
#include "rex3d/region.h"
#include "rex3d/responsibility.h"
#include "rex3d/volume_io.h"
#include "support/test_support.h"

namespace rex3d {
namespace {

using Clock = std::chrono::steady_clock;

struct CriterionResult {
  bool pass = false;
  std::string detail;
};

double Seconds(Clock::time_point since) {
  return std::chrono::duration<double>(Clock::now() - since).count();
}

std::string Format(const char* fmt, auto... args) {
  char buf[256];
  std::snprintf(buf, sizeof buf, fmt, args...);
  return buf;
}

std::string Slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// The default matrix: the standard sphere phantom and oracle, three
// occlusion strategies, twenty seeds, default search configuration.
ExperimentPlan DefaultMatrix() {
  ExperimentPlan plan;
  plan.phantoms.push_back(PhantomSpec{});
  plan.oracles = {"sphere:auto"};
  plan.occlusions = {"zero", "mean", "donor"};
  plan.configs = {SearchConfig{}};
  for (uint64_t s = 1; s <= 20; ++s) plan.seeds.push_back(s);
  return plan;
}

struct MatrixCell {
  CellOutcome outcome;
  bool sufficient = false;
  bool minimal = false;
  int64_t violations = 0;
};

std::vector<MatrixCell> RunMatrix(const ExperimentPlan& plan, double* seconds) {
  const auto start = Clock::now();
  std::vector<MatrixCell> cells;
  for (size_t occ = 0; occ < plan.occlusions.size(); ++occ) {
    for (size_t s = 0; s < plan.seeds.size(); ++s) {
      MatrixCell cell;
      cell.outcome = RunCell(plan, {0, 0, occ, 0, s}, /*record_increments=*/true);
      cell.violations = cell.outcome.row.error.empty()
                            ? LocalityAudit(cell.outcome.run->increments,
                                            cell.outcome.dependency,
                                            cell.outcome.volume.dims())
                            : -2;
      cells.push_back(std::move(cell));
    }
  }
  *seconds = Seconds(start);
  return cells;
}

CriterionResult BruteForceEquivalence() {
  const auto start = Clock::now();
  const Dims dims{8, 8, 8};
  const VoxelGrid ones(dims, 1.0f);
  int matched = 0, total = 0;
  for (uint64_t seed : {42u, 1u, 2u, 3u, 2024u}) {
    SearchConfig cfg;
    cfg.max_depth = 1;
    cfg.iterations = 1;
    cfg.seed = seed;
    for (auto make : {testing::SinglePartFixture, testing::ConjunctionFixture,
                      testing::DisjunctionFixture}) {
      auto engine_oracle = make(dims, seed);
      auto reference_oracle = make(dims, seed);
      const RunResult run = GenerateRespMap(*engine_oracle, ones, OcclusionSpec::Zero(), cfg);
      const VoxelGrid expected = testing::EnumerateDepthOneMap(ones, *reference_oracle, seed);
      matched += run.map.grid().BitEquals(expected);
      ++total;
    }
  }
  const double secs = Seconds(start);
  return {matched == total && secs < 1.0,
          Format("%d/%d maps identical to full enumeration (3 fixtures x 5 seeds), %.3f s",
                 matched, total, secs)};
}

CriterionResult Locality(const std::vector<MatrixCell>& cells, double seconds) {
  int64_t violations = 0;
  int audited = 0, failed = 0;
  for (const auto& c : cells) {
    if (c.violations < 0) {
      ++failed;
      continue;
    }
    violations += c.violations;
    ++audited;
  }
  return {violations == 0 && failed == 0 && audited == 60 && seconds < 60.0,
          Format("%lld violations over %d runs (20 seeds x zero/mean/donor), %d errors, %.1f s",
                 static_cast<long long>(violations), audited, failed, seconds)};
}

CriterionResult Sufficiency(const std::vector<MatrixCell>& cells) {
  int ok = 0;
  for (const auto& c : cells) ok += c.sufficient;
  return {ok == static_cast<int>(cells.size()),
          Format("%d/%zu explanations reproduce the target with the complement occluded", ok,
                 cells.size())};
}

CriterionResult Minimality(const std::vector<MatrixCell>& cells) {
  int ok = 0;
  for (const auto& c : cells) ok += c.minimal;
  return {ok == static_cast<int>(cells.size()),
          Format("%d/%zu explanations lose the target without their final batch", ok,
                 cells.size())};
}

CriterionResult Localization(const std::vector<MatrixCell>& cells) {
  int hits = 0, runs = 0;
  double min_cov = 1.0, sum_cov = 0.0;
  for (const auto& c : cells) {
    if (c.outcome.row.occlusion != "zero") continue;
    ++runs;
    const auto& r = c.outcome.row;
    hits += r.error.empty() && r.coverage >= 0.5 && r.iou > 0.0;
    min_cov = std::min(min_cov, r.coverage);
    sum_cov += r.coverage;
  }
  return {runs == 20 && hits >= 16,
          Format("%d/%d seeds with coverage >= 0.5 and IoU > 0 (min coverage %.3f, mean %.3f)",
                 hits, runs, min_cov, sum_cov / std::max(runs, 1))};
}

CriterionResult PartitionProperties() {
  Rng rng(10000);
  const Dims dims{16, 16, 16};
  int draws = 0, failures = 0;
  while (draws < 10000) {
    const Region head = draws < 2000 ? Region::Whole({8, 8, 8}) : testing::RandomRegion(dims, rng);
    int splittable = 0;
    for (Axis a : kAllAxes) splittable += head[a].Extent() >= 2;
    if (splittable < 2) continue;
    ++draws;
    Rng probe = rng;
    const SplitChoice c = DrawSplit(head, probe);
    const auto parts = GenerateMasks(head, rng);
    bool ok = parts == SplitRegion(head, c) && c.first != c.second &&
              c.first_coord > head[c.first].start && c.first_coord < head[c.first].end &&
              c.second_coord > head[c.second].start && c.second_coord < head[c.second].end;
    for (const Region& p : parts) {
      ok = ok && p.IsValid();
      for (Axis a : kAllAxes) {
        ok = ok && p[a].start >= head[a].start && p[a].end <= head[a].end;
      }
    }
    for (int64_t z = head.depth.start; ok && z < head.depth.end; ++z) {
      for (int64_t y = head.col.start; y < head.col.end; ++y) {
        for (int64_t x = head.row.start; x < head.row.end; ++x) {
          int hits = 0;
          for (const Region& p : parts) hits += p.Contains(x, y, z);
          ok = ok && hits == 1;
        }
      }
    }
    failures += !ok;
  }
  return {failures == 0,
          Format("%d draws (2000 on [0,8)^3, rest on random heads), %d failures", draws,
                 failures)};
}

CriterionResult Determinism() {
  testing::TempDir tmp;
  int identical = 0, total = 0;
  // Library level: maps and manifests of repeated runs.
  auto oracle = MakeSyntheticOracle(ParseOracleKind(testing::kStandardSphere));
  for (uint64_t seed : {3u, 11u, 42u}) {
    const auto [volume, mask] = testing::StandardPhantom(seed);
    for (const auto& spec : {OcclusionSpec::Zero(), OcclusionSpec::Constant(0.1f)}) {
      SearchConfig cfg;
      cfg.seed = seed;
      cfg.record_increments = true;
      const RunResult a = GenerateRespMap(*oracle, volume, spec, cfg);
      cfg.workers = 4;
      const RunResult b = GenerateRespMap(*oracle, volume, spec, cfg);
      SaveVolume(a.map.grid(), tmp / "a.nii");
      SaveVolume(b.map.grid(), tmp / "b.nii");
      auto ma = RunManifest(a, cfg, spec, *oracle);
      auto mb = RunManifest(b, cfg, spec, *oracle);
      for (auto* m : {&ma, &mb}) {
        m->erase("wall_ms");
        m->erase("timestamp");
      }
      identical += Slurp(tmp / "a.nii") == Slurp(tmp / "b.nii") && ma.dump() == mb.dump();
      ++total;
    }
  }
  // Tool level: two explain invocations.
  const auto [volume, mask] = testing::StandardPhantom(42);
  SaveVolume(volume, tmp / "p.nii");
  for (const char* dir : {"r1", "r2"}) {
    cli::Run({"explain", "--input", (tmp / "p.nii").string(), "--oracle",
              testing::kStandardSphere, "--seed", "42", "--out", (tmp / dir).string()});
  }
  auto m1 = nlohmann::json::parse(Slurp(tmp / "r1" / "manifest.json"));
  auto m2 = nlohmann::json::parse(Slurp(tmp / "r2" / "manifest.json"));
  for (auto* m : {&m1, &m2}) {
    m->erase("wall_ms");
    m->erase("timestamp");
  }
  identical += Slurp(tmp / "r1" / "respmap.nii") == Slurp(tmp / "r2" / "respmap.nii") &&
               Slurp(tmp / "r1" / "explanation.nii") == Slurp(tmp / "r2" / "explanation.nii") &&
               !Slurp(tmp / "r1" / "respmap.nii").empty() && m1 == m2;
  ++total;
  return {identical == total,
          Format("%d/%d repeated runs bit-identical (maps and manifests, timestamp and wall "
                 "time excluded)", identical, total)};
}

CriterionResult Budget(const std::vector<MatrixCell>& cells) {
  int64_t worst_excess = INT64_MIN;
  int runs = 0, over = 0;
  auto check = [&](int64_t calls, int64_t limit) {
    ++runs;
    over += calls > limit + 14;
    worst_excess = std::max(worst_excess, calls - limit);
  };
  for (const auto& c : cells) check(c.outcome.row.model_calls, c.outcome.row.l_max);
  // Tight budgets stress the truncation path.
  auto oracle = MakeSyntheticOracle(ParseOracleKind(testing::kStandardSphere));
  Rng rng(77);
  for (int trial = 0; trial < 60; ++trial) {
    const auto [volume, mask] = testing::StandardPhantom(rng.NextU64());
    SearchConfig cfg;
    cfg.search_limit = rng.UniformInt(14, 400);
    cfg.iterations = static_cast<int>(rng.UniformInt(1, 25));
    cfg.seed = rng.NextU64();
    check(GenerateRespMap(*oracle, volume, OcclusionSpec::Zero(), cfg).model_calls,
          cfg.search_limit);
  }
  return {over == 0, Format("%d/%d runs within l_max + 14 (largest calls - l_max: %lld)",
                            runs - over, runs, static_cast<long long>(worst_excess))};
}

CriterionResult NiftiRoundTrip() {
  testing::TempDir tmp;
  Rng rng(100);
  int ok = 0;
  for (int i = 0; i < 100; ++i) {
    const Dims dims{rng.UniformInt(1, 24), rng.UniformInt(1, 24), rng.UniformInt(1, 24)};
    VoxelGrid g = testing::RandomVolume(dims, rng.NextU64(), -1e4f, 1e4f);
    g.set_spacing({static_cast<float>(rng.Uniform(0.1, 4)), static_cast<float>(rng.Uniform(0.1, 4)),
                   static_cast<float>(rng.Uniform(0.1, 4))});
    bool same = true;
    for (const char* name : {"v.nii", "v.nii.gz"}) {
      SaveVolume(g, tmp / name);
      const VoxelGrid back = LoadVolume(tmp / name);
      same = same && back.BitEquals(g) && back.spacing() == g.spacing();
    }
    ok += same;
  }
  return {ok == 100, Format("%d/100 random volumes bit-exact through .nii and .nii.gz", ok)};
}

CriterionResult Rendering() {
  testing::TempDir tmp;
  const auto [volume, mask] = testing::StandardPhantom(5);
  auto oracle = MakeSyntheticOracle(ParseOracleKind(testing::kStandardSphere));
  const RunResult run = GenerateRespMap(*oracle, volume, OcclusionSpec::Zero(), {});
  const Explanation e = ExtractExplanation(run.map, volume, *oracle, OcclusionSpec::Zero(),
                                           run.target);
  const VoxelGrid zero(volume.dims(), 0.0f);
  int stable = 0, gray = 0, planes = 0;
  for (cli::Plane plane : {cli::Plane::kAxial, cli::Plane::kSagittal, cli::Plane::kCoronal}) {
    ++planes;
    const cli::RenderInputs in{&volume, &run.map.grid(), &e.mask, &mask};
    const auto a = cli::EncodePng(cli::RenderSlice(in, plane, 16, {}));
    const auto b = cli::EncodePng(cli::RenderSlice(in, plane, 16, {}));
    stable += a == b && !a.empty();

    const cli::Image img = cli::RenderSlice({&volume, &zero}, plane, 16, {});
    const auto [lo, hi] = std::minmax_element(volume.data().begin(), volume.data().end());
    bool all_gray = true;
    for (int64_t r = 0; r < img.height; ++r) {
      for (int64_t c = 0; c < img.width; ++c) {
        const int64_t x = plane == cli::Plane::kSagittal ? 16 : c;
        const int64_t y = plane == cli::Plane::kAxial ? r : plane == cli::Plane::kSagittal ? c : 16;
        const int64_t z = plane == cli::Plane::kAxial ? 16 : r;
        const auto v = static_cast<uint8_t>(
            std::lround(255.0 * (volume.at(x, y, z) - *lo) / (*hi - *lo)));
        all_gray = all_gray && img.Pixel(c, r) == cli::Rgb{v, v, v};
      }
    }
    gray += all_gray;
  }
  // Tool level: repeated renders write identical files.
  SaveVolume(volume, tmp / "p.nii");
  SaveVolume(run.map.grid(), tmp / "map.nii");
  for (const char* dir : {"a", "b"}) {
    cli::Run({"render", "--input", (tmp / "p.nii").string(), "--map",
              (tmp / "map.nii").string(), "--out", (tmp / dir).string()});
  }
  bool files_same = true;
  for (const char* name : {"axial.png", "sagittal.png", "coronal.png"}) {
    const std::string a = Slurp(tmp / "a" / name);
    files_same = files_same && !a.empty() && a == Slurp(tmp / "b" / name);
  }
  return {stable == planes && gray == planes && files_same,
          Format("%d/%d planes byte-identical on re-render, %d/%d zero-map renders equal the "
                 "grayscale base, CLI files %s", stable, planes, gray, planes,
                 files_same ? "identical" : "differ")};
}

}  // namespace
}  // namespace rex3d

int main() {
  using namespace rex3d;
  setenv("REX3D_LOG", "warn", /*overwrite=*/0);
  const ExperimentPlan plan = DefaultMatrix();
  double matrix_seconds = 0.0;
  std::vector<MatrixCell> cells = RunMatrix(plan, &matrix_seconds);

  // Re-check every extraction against a fresh oracle and the cell's occlusion.
  for (auto& c : cells) {
    const CellOutcome& o = c.outcome;
    if (!o.row.error.empty()) continue;
    auto oracle = MakeSyntheticOracle(ParseOracleKind(testing::kStandardSphere));
    c.sufficient =
        VerifySufficiency(*o.explanation, o.volume, *oracle, *o.occlusion).label ==
        o.run->target.label;
    c.minimal = FinalBatchIsNecessary(*o.explanation, o.run->map, o.volume, *oracle,
                                      *o.occlusion, o.run->target);
  }

  struct Criterion {
    const char* name;
    std::function<CriterionResult()> run;
  };
  const std::vector<Criterion> criteria = {
      {"brute-force equivalence", BruteForceEquivalence},
      {"locality", [&] { return Locality(cells, matrix_seconds); }},
      {"sufficiency", [&] { return Sufficiency(cells); }},
      {"approximate minimality", [&] { return Minimality(cells); }},
      {"localization quality", [&] { return Localization(cells); }},
      {"partition properties", PartitionProperties},
      {"determinism", Determinism},
      {"budget", [&] { return Budget(cells); }},
      {"nifti round-trip", NiftiRoundTrip},
      {"rendering", Rendering},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    CriterionResult v;
    try {
      v = c.run();
    } catch (const std::exception& e) {
      v = {false, std::string("threw: ") + e.what()};
    }
    std::printf("%s  %-24s %s\n", v.pass ? "PASS" : "FAIL", c.name, v.detail.c_str());
    failed += !v.pass;
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed,
              criteria.size());
  return failed == 0 ? 0 : 1;
}
