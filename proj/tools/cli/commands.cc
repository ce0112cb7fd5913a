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

#include "cli/commands.h"

#include <spdlog/sinks/stdout_sinks.h>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <memory>
#include <optional>

#include <nlohmann/json.hpp>

#include "CLI11.hpp"
#include "cli/json_config.h"
#include "cli/render.h"
#include "rex3d/errors.h"
#include "rex3d/experiment.h"
#include "rex3d/explanation.h"
#include "rex3d/external_oracle.h"
#include "rex3d/occlusion.h"
#include "rex3d/oracle.h"
#include "rex3d/responsibility.h"
#include "rex3d/volume_io.h"

namespace rex3d::cli {
namespace {

namespace fs = std::filesystem;

std::shared_ptr<spdlog::logger> Logger() {
  static std::shared_ptr<spdlog::logger> logger = [] {
    auto l = spdlog::stderr_logger_st("rex3d");
    l->set_pattern("[%l] %v");
    const char* env = std::getenv("REX3D_LOG");
    const std::string level = env ? env : "info";
    if (level == "debug") {
      l->set_level(spdlog::level::debug);
    } else if (level == "warn") {
      l->set_level(spdlog::level::warn);
    } else {
      l->set_level(spdlog::level::info);
    }
    return l;
  }();
  return logger;
}

struct ExplainArgs {
  std::string input;
  std::string model;
  std::string oracle;
  std::string occlusion = "zero";
  std::string truth;
  std::string out;
  SearchConfig search;
  double batch_fraction = 0.01;
  int timeout_ms = 120'000;
};

struct RenderArgs {
  std::string input;
  std::string map;
  std::string explanation;
  std::string truth;
  std::string plane = "all";
  std::string slice = "mid";
  double alpha = 0.5;
  std::string out;
};

struct EvalArgs {
  std::string plan;
  std::string out;
  int workers = 0;
  bool resume = false;
};

struct PhantomArgs {
  std::vector<int64_t> dims = {32, 32, 32};
  std::vector<double> center = {16, 16, 16};
  double radius = 5;
  float delta = 0.6f;
  float base = 0.2f;
  float noise = 0.05f;
  uint64_t seed = 42;
  bool normalize = false;
  std::string out;
  std::string mask;
};

void WriteJson(const nlohmann::json& j, const fs::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open for writing: " + path.string());
  out << j.dump(2) << '\n';
  if (!out) throw IoError("write failed: " + path.string());
}

std::unique_ptr<Oracle> BuildOracle(const ExplainArgs& a, const Dims& dims) {
  if (!a.model.empty()) {
    if (a.model.rfind("cmd:", 0) != 0) {
      throw InvalidArgument("--model must have the form cmd:<command>");
    }
    ExternalOracleOptions options;
    options.timeout = std::chrono::milliseconds(a.timeout_ms);
    return SpawnExternalOracle(a.model.substr(4), dims, options);
  }
  return MakeSyntheticOracle(ParseOracleKind(a.oracle));
}

int Explain(const ExplainArgs& a) {
  const VoxelGrid volume = LoadVolume(a.input);
  Logger()->info("loaded {} ({})", a.input, volume.dims().ToString());
  const OcclusionSpec spec = ParseOcclusion(a.occlusion);
  spec.Validate(volume.dims());
  std::optional<VoxelGrid> truth;
  if (!a.truth.empty()) {
    truth = LoadVolume(a.truth);
    if (truth->dims() != volume.dims()) {
      throw IoError("truth mask dims " + truth->dims().ToString() +
                    " differ from input dims " + volume.dims().ToString());
    }
  }
  a.search.Validate();

  auto oracle = BuildOracle(a, volume.dims());
  const RunResult run = GenerateRespMap(*oracle, volume, spec, a.search);
  Logger()->info("target label {}, {} model calls, {} passing mutants{}",
                 run.target.label, run.model_calls, run.passing_mutants,
                 run.truncated ? " (budget reached)" : "");

  fs::create_directories(a.out);
  const fs::path out(a.out);
  SaveVolume(run.map.grid(), out / "respmap.nii");
  nlohmann::json manifest = RunManifest(run, a.search, spec, *oracle);
  manifest["input"] = a.input;

  int code = kExitOk;
  try {
    const Explanation e = ExtractExplanation(run.map, volume, *oracle, spec,
                                             run.target, a.batch_fraction);
    SaveVolume(e.mask, out / "explanation.nii", NiftiDatatype::kUint8);
    manifest["explanation"] = ExplanationToJson(e);
    if (truth) {
      const OverlapMetrics m = ExplanationOverlap(e.mask, *truth);
      manifest["explanation"]["overlap"] = {
          {"iou", m.iou}, {"dice", m.dice}, {"coverage", m.coverage}};
    }
    Logger()->info("explanation: {} voxels ({:.4f} of the volume)", e.voxel_count,
                   e.fraction);
  } catch (const NoSignal& e) {
    manifest["explanation"] = {{"error", e.what()}};
    Logger()->error("{}", e.what());
    code = kExitNoExplanation;
  } catch (const InsufficientMap& e) {
    manifest["explanation"] = {{"error", e.what()}};
    Logger()->error("{}", e.what());
    code = kExitNoExplanation;
  }
  WriteJson(manifest, out / "manifest.json");
  return code;
}

int Render(const RenderArgs& a) {
  const VoxelGrid base = LoadVolume(a.input);
  std::optional<VoxelGrid> map, explanation, truth;
  if (!a.map.empty()) map = LoadVolume(a.map);
  if (!a.explanation.empty()) explanation = LoadVolume(a.explanation);
  if (!a.truth.empty()) truth = LoadVolume(a.truth);
  for (const auto* v : {&map, &explanation, &truth}) {
    if (*v && (*v)->dims() != base.dims()) {
      throw IoError("overlay dims " + (*v)->dims().ToString() +
                    " differ from base dims " + base.dims().ToString());
    }
  }

  RenderSpec spec;
  spec.alpha = a.alpha;
  if (a.plane != "all") spec.planes = {ParsePlane(a.plane)};
  if (a.slice != "mid") {
    try {
      size_t used = 0;
      spec.slice = std::stoll(a.slice, &used);
      if (used != a.slice.size()) throw InvalidArgument("");
    } catch (const std::exception&) {
      throw InvalidArgument("--slice must be an integer or \"mid\"");
    }
  }

  const RenderInputs in{&base, map ? &*map : nullptr,
                        explanation ? &*explanation : nullptr,
                        truth ? &*truth : nullptr};
  fs::create_directories(a.out);
  for (const Plane plane : spec.planes) {
    const int64_t slice = ResolveSlice(base.dims(), plane, spec.slice);
    const fs::path path = fs::path(a.out) / (std::string(PlaneName(plane)) + ".png");
    WritePng(RenderSlice(in, plane, slice, spec), path);
    Logger()->info("wrote {} (slice {})", path.string(), slice);
  }
  return kExitOk;
}

int Eval(const EvalArgs& a) {
  ExperimentPlan plan;
  try {
    plan = ExperimentPlan::Load(a.plan);
  } catch (const Error& e) {
    Logger()->error("{}", e.what());
    return kExitIo;
  }
  if (!a.out.empty()) plan.output_dir = a.out;
  if (a.workers > 0) plan.workers = a.workers;
  plan.Validate();
  const auto rows = RunExperiment(plan, a.resume);
  int failed = 0;
  for (const auto& r : rows) failed += r.error.empty() ? 0 : 1;
  Logger()->info("{} cells, {} with errors, results in {}", rows.size(), failed,
                 (plan.output_dir / "results.csv").string());
  return kExitOk;
}

int Phantom(const PhantomArgs& a) {
  const Dims dims{a.dims[0], a.dims[1], a.dims[2]};
  auto [volume, mask] = MakePhantom(
      dims, LesionSpec{{a.center[0], a.center[1], a.center[2]}, a.radius, a.delta},
      BackgroundSpec{a.base, a.noise}, a.seed);
  if (a.normalize) volume = NormalizeIntensity(volume);
  SaveVolume(volume, a.out);
  if (!a.mask.empty()) SaveVolume(mask, a.mask, NiftiDatatype::kUint8);
  return kExitOk;
}

void AddSearchFlags(CLI::App* cmd, ExplainArgs& a) {
  cmd->add_option("--iterations", a.search.iterations, "Random restarts")
      ->capture_default_str();
  cmd->add_option("--max-depth", a.search.max_depth, "Maximum refinement depth")
      ->capture_default_str();
  cmd->add_option("--search-limit", a.search.search_limit,
                  "Model calls shared by all restarts")
      ->capture_default_str();
  cmd->add_option("--min-voxels", a.search.min_region_voxels,
                  "Regions smaller than this are not split")
      ->capture_default_str();
  cmd->add_option("--seed", a.search.seed, "Run seed")->capture_default_str();
  cmd->add_option("--workers", a.search.workers, "Restarts evaluated in parallel")
      ->capture_default_str();
  cmd->add_flag("--log-increments", a.search.record_increments,
                "Record every responsibility increment in the manifest");
}

// Maps library errors onto exit codes.
int Guarded(const std::function<int()>& body) {
  try {
    return body();
  } catch (const NoSignal& e) {
    Logger()->error("{}", e.what());
    return kExitNoExplanation;
  } catch (const InsufficientMap& e) {
    Logger()->error("{}", e.what());
    return kExitNoExplanation;
  } catch (const OracleError& e) {
    Logger()->error("oracle failure: {}", e.what());
    return kExitOracle;
  } catch (const IoError& e) {
    Logger()->error("{}", e.what());
    return kExitIo;
  } catch (const DonorShapeMismatch& e) {
    Logger()->error("{}", e.what());
    return kExitIo;
  } catch (const Error& e) {
    Logger()->error("{}", e.what());
    return kExitUsage;
  } catch (const std::filesystem::filesystem_error& e) {
    Logger()->error("{}", e.what());
    return kExitIo;
  } catch (const std::exception& e) {
    Logger()->error("unexpected failure: {}", e.what());
    return kExitIo;
  }
}

int Dispatch(int argc, char** argv) {
  CLI::App app{"rex3d: causal responsibility maps for black-box 3D classifiers"};
  // Consumed by ExpandConfig; declared so it shows in --help.
  std::string config_path;
  app.require_subcommand(1);

  ExplainArgs explain;
  CLI::App* explain_cmd = app.add_subcommand("explain", "Explain one input volume");
  explain_cmd->add_option("--config", config_path, "JSON file with flag values");
  explain_cmd->add_option("--input", explain.input, "Input volume (.nii, .nii.gz, .raw)")
      ->required();
  auto* model = explain_cmd->add_option("--model", explain.model,
                                        "External model: cmd:<adapter command>");
  auto* oracle = explain_cmd->add_option("--oracle", explain.oracle,
                                         "Synthetic oracle, e.g. sphere:cx,cy,cz,r,tau");
  model->excludes(oracle);
  explain_cmd->add_option("--occlusion", explain.occlusion,
                          "zero | value:<v> | mean:<list-file> | donor:<path>")
      ->capture_default_str();
  explain_cmd->add_option("--batch-fraction", explain.batch_fraction,
                          "Explanation growth step as a fraction of the volume")
      ->capture_default_str();
  explain_cmd->add_option("--truth", explain.truth,
                          "Ground-truth mask; overlap is added to the manifest");
  explain_cmd->add_option("--timeout", explain.timeout_ms,
                          "External model timeout per batch in milliseconds")
      ->capture_default_str();
  explain_cmd->add_option("--out", explain.out, "Output directory")->required();
  AddSearchFlags(explain_cmd, explain);

  RenderArgs render;
  CLI::App* render_cmd = app.add_subcommand("render", "Render slice overlays as PNG");
  render_cmd->add_option("--config", config_path, "JSON file with flag values");
  render_cmd->add_option("--input", render.input, "Base volume")->required();
  render_cmd->add_option("--map", render.map, "Responsibility map volume");
  render_cmd->add_option("--explanation", render.explanation, "Explanation mask");
  render_cmd->add_option("--truth", render.truth, "Ground-truth mask");
  render_cmd->add_option("--plane", render.plane, "axial | sagittal | coronal | all")
      ->capture_default_str();
  render_cmd->add_option("--slice", render.slice, "Slice index or \"mid\"")
      ->capture_default_str();
  render_cmd->add_option("--alpha", render.alpha, "Overlay opacity")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  render_cmd->add_option("--out", render.out, "Output directory")->required();

  EvalArgs eval;
  CLI::App* eval_cmd = app.add_subcommand("eval", "Run an experiment plan");
  eval_cmd->add_option("--config", config_path, "JSON file with flag values");
  eval_cmd->add_option("--plan", eval.plan, "Experiment plan (JSON)")->required();
  eval_cmd->add_option("--out", eval.out, "Override the plan's output directory");
  eval_cmd->add_option("--workers", eval.workers, "Cells evaluated in parallel");
  eval_cmd->add_flag("--resume", eval.resume, "Keep rows already in results.csv");

  PhantomArgs phantom;
  CLI::App* phantom_cmd = app.add_subcommand("phantom", "Write a synthetic lesion phantom");
  phantom_cmd->add_option("--dims", phantom.dims, "x,y,z")->delimiter(',')->expected(3)
      ->capture_default_str();
  phantom_cmd->add_option("--center", phantom.center, "Lesion centre x,y,z")
      ->delimiter(',')->expected(3)->capture_default_str();
  phantom_cmd->add_option("--radius", phantom.radius)->capture_default_str();
  phantom_cmd->add_option("--delta", phantom.delta, "Lesion intensity offset")
      ->capture_default_str();
  phantom_cmd->add_option("--base", phantom.base, "Background intensity")
      ->capture_default_str();
  phantom_cmd->add_option("--noise", phantom.noise, "Background noise amplitude")
      ->capture_default_str();
  phantom_cmd->add_option("--seed", phantom.seed)->capture_default_str();
  phantom_cmd->add_flag("--normalize", phantom.normalize, "Rescale to [0, 1]");
  phantom_cmd->add_option("--out", phantom.out, "Output volume")->required();
  phantom_cmd->add_option("--mask", phantom.mask, "Output lesion mask (u8)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  if (explain_cmd->parsed()) {
    if (explain.model.empty() && explain.oracle.empty()) {
      Logger()->error("explain needs --oracle or --model");
      std::cerr << explain_cmd->help();
      return kExitUsage;
    }
    return Guarded([&] { return Explain(explain); });
  }
  if (render_cmd->parsed()) return Guarded([&] { return Render(render); });
  if (eval_cmd->parsed()) return Guarded([&] { return Eval(eval); });
  if (phantom_cmd->parsed()) return Guarded([&] { return Phantom(phantom); });
  return kExitUsage;
}

}  // namespace

int Main(int argc, char** argv) {
  return Run(std::vector<std::string>(argv + std::min(argc, 1), argv + argc));
}

int Run(const std::vector<std::string>& args) {
  std::vector<std::string> storage = {"rex3d"};
  const int rc = Guarded([&] {
    const auto expanded = ExpandConfig(args);
    storage.insert(storage.end(), expanded.begin(), expanded.end());
    return kExitOk;
  });
  if (rc != kExitOk) return rc;
  std::vector<char*> argv;
  for (auto& s : storage) argv.push_back(s.data());
  return Dispatch(static_cast<int>(argv.size()), argv.data());
}

}  // namespace rex3d::cli
