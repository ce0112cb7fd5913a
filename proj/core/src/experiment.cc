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

#include "rex3d/experiment.h"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <map>
#include <mutex>
#include <set>
#include <thread>

#include "rex3d/csv.h"
#include "rex3d/errors.h"
#include "rex3d/random.h"

namespace rex3d {
namespace {

std::string FormatDouble(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

template <typename T>
std::array<T, 3> Triple(const nlohmann::json& j, const char* key) {
  const auto& a = j.at(key);
  if (!a.is_array() || a.size() != 3) {
    throw InvalidArgument(std::string("\"") + key + "\" must be a 3-element array");
  }
  return {a[0].get<T>(), a[1].get<T>(), a[2].get<T>()};
}

PhantomSpec PhantomFromJson(const nlohmann::json& j) {
  PhantomSpec p;
  p.id = j.value("id", p.id);
  if (j.contains("dims")) {
    const auto d = Triple<int64_t>(j, "dims");
    p.dims = {d[0], d[1], d[2]};
  }
  if (j.contains("center")) p.lesion.center = Triple<double>(j, "center");
  p.lesion.radius = j.value("radius", p.lesion.radius);
  p.lesion.intensity_delta = j.value("delta", p.lesion.intensity_delta);
  p.background.base = j.value("base", p.background.base);
  p.background.noise_amplitude = j.value("noise", p.background.noise_amplitude);
  if (j.contains("seed")) p.seed = j.at("seed").get<uint64_t>();
  return p;
}

nlohmann::json PhantomToJson(const PhantomSpec& p) {
  nlohmann::json j = {{"id", p.id},
                      {"dims", {p.dims.x, p.dims.y, p.dims.z}},
                      {"center", p.lesion.center},
                      {"radius", p.lesion.radius},
                      {"delta", p.lesion.intensity_delta},
                      {"base", p.background.base},
                      {"noise", p.background.noise_amplitude}};
  if (p.seed) j["seed"] = *p.seed;
  return j;
}

// Affine map of `grid` with the range [lo, hi] onto [0, 1], clamped.
VoxelGrid NormalizeWithRange(const VoxelGrid& grid, double lo, double hi) {
  VoxelGrid out(grid.dims(), 0.0f, grid.spacing());
  const double range = hi - lo;
  if (!(range > 0.0)) return out;
  for (int64_t i = 0; i < grid.size(); ++i) {
    out[i] = static_cast<float>(
        std::clamp((static_cast<double>(grid[i]) - lo) / range, 0.0, 1.0));
  }
  return out;
}

std::pair<VoxelGrid, VoxelGrid> PreparedPhantom(const ExperimentPlan& plan,
                                                const PhantomSpec& spec,
                                                uint64_t seed) {
  auto [volume, truth] = MakePhantom(spec.dims, spec.lesion, spec.background, seed);
  if (plan.normalize) volume = NormalizeIntensity(volume);
  return {std::move(volume), std::move(truth)};
}

std::unique_ptr<Oracle> CellOracle(const std::string& text, const PhantomSpec& phantom) {
  if (text == "sphere:auto") {
    return MakeSyntheticOracle(
        SphereLesion{phantom.lesion.center, phantom.lesion.radius, 0.5});
  }
  return MakeSyntheticOracle(ParseOracleKind(text));
}

OcclusionSpec CellOcclusion(const std::string& text, const ExperimentPlan& plan,
                            const PhantomSpec& phantom, uint64_t phantom_seed) {
  if (text == "mean") {
    std::vector<VoxelGrid> cohort;
    for (const uint64_t s : plan.seeds) {
      cohort.push_back(PreparedPhantom(plan, phantom, phantom.seed.value_or(s)).first);
    }
    return OcclusionSpec::Constant(MeanIntensityValue(cohort));
  }
  if (text == "donor") {
    LesionSpec healthy = phantom.lesion;
    healthy.intensity_delta = 0.0f;
    const VoxelGrid subject =
        MakePhantom(phantom.dims, phantom.lesion, phantom.background, phantom_seed).first;
    VoxelGrid donor = MakePhantom(phantom.dims, healthy, phantom.background,
                                  MixSeed(phantom_seed, 0xD0D0))
                          .first;
    if (plan.normalize) {
      const auto [lo, hi] = std::minmax_element(subject.data().begin(),
                                                subject.data().end());
      donor = NormalizeWithRange(donor, *lo, *hi);
    }
    return OcclusionSpec::Donor(std::move(donor));
  }
  return ParseOcclusion(text);
}

std::vector<CellIndex> EnumerateCells(const ExperimentPlan& plan) {
  std::vector<CellIndex> cells;
  for (size_t p = 0; p < plan.phantoms.size(); ++p)
    for (size_t o = 0; o < plan.oracles.size(); ++o)
      for (size_t c = 0; c < plan.occlusions.size(); ++c)
        for (size_t g = 0; g < plan.configs.size(); ++g)
          for (size_t s = 0; s < plan.seeds.size(); ++s)
            cells.push_back({p, o, c, g, s});
  return cells;
}

ResultRow IdentityRow(const ExperimentPlan& plan, const CellIndex& cell) {
  ResultRow row;
  const SearchConfig& cfg = plan.configs[cell.config];
  row.phantom_id = plan.phantoms[cell.phantom].id;
  row.oracle = plan.oracles[cell.oracle];
  row.occlusion = plan.occlusions[cell.occlusion];
  row.seed = plan.seeds[cell.seed];
  row.d_max = cfg.max_depth;
  row.l_max = cfg.search_limit;
  row.iterations = cfg.iterations;
  return row;
}

}  // namespace

int64_t ExperimentPlan::CellCount() const {
  return static_cast<int64_t>(phantoms.size() * oracles.size() *
                              occlusions.size() * configs.size() * seeds.size());
}

void ExperimentPlan::Validate() const {
  if (CellCount() == 0) throw InvalidArgument("experiment plan has no cells");
  const std::set<uint64_t> unique(seeds.begin(), seeds.end());
  if (unique.size() != seeds.size()) throw InvalidArgument("plan seeds must be distinct");
  for (const auto& cfg : configs) cfg.Validate();
  if (!(batch_fraction > 0.0 && batch_fraction <= 1.0)) {
    throw InvalidArgument("batch fraction must lie in (0, 1]");
  }
  if (workers < 1) throw InvalidArgument("workers must be >= 1");
}

ExperimentPlan ExperimentPlan::FromJson(const nlohmann::json& j) {
  ExperimentPlan plan;
  try {
    for (const auto& p : j.value("phantoms", nlohmann::json::array())) {
      plan.phantoms.push_back(PhantomFromJson(p));
    }
    plan.oracles = j.value("oracles", std::vector<std::string>{});
    plan.occlusions = j.value("occlusions", std::vector<std::string>{});
    if (j.contains("configs")) {
      for (const auto& c : j.at("configs")) plan.configs.push_back(SearchConfig::FromJson(c));
    } else {
      plan.configs.push_back(SearchConfig{});
    }
    plan.seeds = j.value("seeds", std::vector<uint64_t>{});
    plan.output_dir = j.value("output_dir", std::string("."));
    plan.batch_fraction = j.value("batch_fraction", plan.batch_fraction);
    plan.normalize = j.value("normalize", plan.normalize);
    plan.workers = j.value("workers", plan.workers);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("invalid experiment plan: ") + e.what());
  }
  return plan;
}

nlohmann::json ExperimentPlan::ToJson() const {
  nlohmann::json phantoms_json = nlohmann::json::array();
  for (const auto& p : phantoms) phantoms_json.push_back(PhantomToJson(p));
  nlohmann::json configs_json = nlohmann::json::array();
  for (const auto& c : configs) configs_json.push_back(c.ToJson());
  return {{"phantoms", phantoms_json}, {"oracles", oracles},
          {"occlusions", occlusions},  {"configs", configs_json},
          {"seeds", seeds},            {"output_dir", output_dir.string()},
          {"batch_fraction", batch_fraction}, {"normalize", normalize},
          {"workers", workers}};
}

ExperimentPlan ExperimentPlan::Load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open plan " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("plan " + path.string() + " is not valid JSON: " + e.what());
  }
  return FromJson(j);
}

const std::vector<std::string>& ResultColumns() {
  static const std::vector<std::string> kColumns = {
      "phantom_id", "oracle",      "occlusion",       "seed", "d_max",
      "l_max",      "iterations",  "model_calls",     "passing_mutants",
      "iou",        "dice",        "coverage",        "wall_ms", "error"};
  return kColumns;
}

std::vector<std::string> ResultRow::ToFields() const {
  char wall[32];
  std::snprintf(wall, sizeof wall, "%.3f", wall_ms);
  return {phantom_id,
          oracle,
          occlusion,
          std::to_string(seed),
          std::to_string(d_max),
          std::to_string(l_max),
          std::to_string(iterations),
          std::to_string(model_calls),
          std::to_string(passing_mutants),
          FormatDouble(iou),
          FormatDouble(dice),
          FormatDouble(coverage),
          wall,
          error};
}

ResultRow ResultRow::FromFields(const std::vector<std::string>& f) {
  if (f.size() != ResultColumns().size()) {
    throw FormatError("results row has " + std::to_string(f.size()) + " fields, expected " +
                      std::to_string(ResultColumns().size()));
  }
  ResultRow r;
  try {
    r.phantom_id = f[0];
    r.oracle = f[1];
    r.occlusion = f[2];
    r.seed = std::stoull(f[3]);
    r.d_max = std::stoi(f[4]);
    r.l_max = std::stoll(f[5]);
    r.iterations = std::stoi(f[6]);
    r.model_calls = std::stoll(f[7]);
    r.passing_mutants = std::stoll(f[8]);
    r.iou = std::stod(f[9]);
    r.dice = std::stod(f[10]);
    r.coverage = std::stod(f[11]);
    r.wall_ms = std::stod(f[12]);
    r.error = f[13];
  } catch (const std::exception&) {
    throw FormatError("unparsable results row for " + f[0]);
  }
  return r;
}

std::string ResultRow::CellKey() const {
  const auto fields = ToFields();
  std::string key;
  for (size_t i = 0; i < 7; ++i) key += fields[i] + '\x1f';
  return key;
}

CellOutcome RunCell(const ExperimentPlan& plan, const CellIndex& cell,
                    bool record_increments) {
  CellOutcome out;
  out.row = IdentityRow(plan, cell);
  const auto start = std::chrono::steady_clock::now();
  try {
    const PhantomSpec& phantom = plan.phantoms[cell.phantom];
    const uint64_t seed = plan.seeds[cell.seed];
    const uint64_t phantom_seed = phantom.seed.value_or(seed);
    SearchConfig cfg = plan.configs[cell.config];
    cfg.seed = seed;
    cfg.record_increments = record_increments;
    cfg.workers = 1;

    std::tie(out.volume, out.truth) = PreparedPhantom(plan, phantom, phantom_seed);
    const auto oracle = CellOracle(plan.oracles[cell.oracle], phantom);
    out.dependency = oracle->DependencyRegion();
    out.occlusion =
        CellOcclusion(plan.occlusions[cell.occlusion], plan, phantom, phantom_seed);
    const OcclusionSpec& spec = *out.occlusion;

    out.run = GenerateRespMap(*oracle, out.volume, spec, cfg);
    out.row.model_calls = out.run->model_calls;
    out.row.passing_mutants = out.run->passing_mutants;
    out.explanation = ExtractExplanation(out.run->map, out.volume, *oracle, spec,
                                         out.run->target, plan.batch_fraction);
    const OverlapMetrics m = ExplanationOverlap(out.explanation->mask, out.truth);
    out.row.iou = m.iou;
    out.row.dice = m.dice;
    out.row.coverage = m.coverage;
  } catch (const std::exception& e) {
    out.row.error = e.what();
  }
  out.row.wall_ms = std::chrono::duration<double, std::milli>(
                        std::chrono::steady_clock::now() - start)
                        .count();
  return out;
}

std::vector<ResultRow> RunExperiment(const ExperimentPlan& plan, bool resume) {
  plan.Validate();
  std::filesystem::create_directories(plan.output_dir);
  const std::filesystem::path csv_path = plan.output_dir / "results.csv";

  std::map<std::string, ResultRow> done;
  const bool have_file = std::filesystem::exists(csv_path) &&
                         std::filesystem::file_size(csv_path) > 0;
  if (resume && have_file) {
    std::ifstream in(csv_path, std::ios::binary);
    const auto rows = csv::Parse(in);
    if (rows.empty() || rows.front() != ResultColumns()) {
      throw FormatError("existing " + csv_path.string() + " has an unexpected header");
    }
    for (size_t i = 1; i < rows.size(); ++i) {
      ResultRow r = ResultRow::FromFields(rows[i]);
      done.emplace(r.CellKey(), std::move(r));
    }
  }

  std::ofstream out(csv_path, std::ios::binary |
                                  (resume && have_file ? std::ios::app : std::ios::trunc));
  if (!out) throw IoError("cannot write " + csv_path.string());
  if (!(resume && have_file)) {
    csv::WriteRow(out, ResultColumns());
    out.flush();
  }

  const std::vector<CellIndex> cells = EnumerateCells(plan);
  std::vector<std::optional<ResultRow>> results(cells.size());
  std::vector<bool> fresh(cells.size(), false);
  std::vector<size_t> pending;
  for (size_t i = 0; i < cells.size(); ++i) {
    const ResultRow identity = IdentityRow(plan, cells[i]);
    if (auto it = done.find(identity.CellKey()); it != done.end()) {
      results[i] = it->second;
    } else {
      pending.push_back(i);
    }
  }

  // Rows are appended in cell order by whichever worker completes the next
  // contiguous one.
  std::mutex mu;
  size_t flushed = 0;
  auto flush_ready = [&] {
    while (flushed < pending.size() && results[pending[flushed]].has_value()) {
      csv::WriteRow(out, results[pending[flushed]]->ToFields());
      ++flushed;
    }
    out.flush();
  };

  std::atomic<size_t> next{0};
  auto work = [&] {
    for (size_t k = next++; k < pending.size(); k = next++) {
      ResultRow row = RunCell(plan, cells[pending[k]]).row;
      std::lock_guard lock(mu);
      results[pending[k]] = std::move(row);
      fresh[pending[k]] = true;
      flush_ready();
    }
  };
  const int workers = std::max(1, std::min<int>(plan.workers, static_cast<int>(pending.size())));
  if (workers == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  if (!out) throw IoError("write failed: " + csv_path.string());

  std::vector<ResultRow> rows;
  rows.reserve(cells.size());
  for (auto& r : results) rows.push_back(std::move(*r));
  return rows;
}

int64_t LocalityAudit(std::span<const Increment> increments,
                      const std::optional<Region>& dependency, const Dims& dims) {
  if (!dependency) return -1;
  const Region whole = Region::Whole(dims);
  const Region& dep = *dependency;
  if (dep.row.start <= 0 && dep.col.start <= 0 && dep.depth.start <= 0 &&
      dep.row.end >= whole.row.end && dep.col.end >= whole.col.end &&
      dep.depth.end >= whole.depth.end) {
    return -1;
  }
  int64_t violations = 0;
  for (const Increment& inc : increments) {
    if (inc.amount > 0.0 && !RegionIntersects(inc.region, dep)) ++violations;
  }
  return violations;
}

int64_t LocalityAudit(const nlohmann::json& manifest,
                      const std::optional<Region>& dependency) {
  if (!manifest.contains("increments")) {
    throw InvalidArgument("manifest carries no increments log");
  }
  const auto d = manifest.at("dims");
  const Dims dims{d.at(0).get<int64_t>(), d.at(1).get<int64_t>(), d.at(2).get<int64_t>()};
  std::vector<Increment> incs;
  for (const auto& j : manifest.at("increments")) {
    incs.push_back({j.at("restart").get<int>(), j.at("level").get<int>(),
                    RegionFromJson(j.at("region")), j.at("amount").get<double>()});
  }
  return LocalityAudit(incs, dependency, dims);
}

}  // namespace rex3d
