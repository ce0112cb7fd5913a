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

#ifndef REX3D_EXPERIMENT_H_
#define REX3D_EXPERIMENT_H_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "rex3d/explanation.h"
#include "rex3d/occlusion.h"
#include "rex3d/oracle.h"
#include "rex3d/responsibility.h"
#include "rex3d/volume_io.h"

namespace rex3d {

struct PhantomSpec {
  std::string id = "phantom";
  Dims dims{32, 32, 32};
  LesionSpec lesion{{16, 16, 16}, 5, 0.6f};
  BackgroundSpec background{0.2f, 0.05f};
  // Noise seed; the cell seed is used when absent.
  std::optional<uint64_t> seed;
};

// Cross product of phantoms x oracles x occlusions x configs x seeds.
//
// Oracle strings use the command-line syntax, plus "sphere:auto" for a sphere
// oracle on the phantom's own lesion with tau 0.5. Occlusion strings use the
// command-line syntax, plus "mean" (mean of the normalized lesion phantoms
// over all plan seeds) and "donor" (a lesion-free phantom with the same
// background, normalized with the subject's range).
struct ExperimentPlan {
  std::vector<PhantomSpec> phantoms;
  std::vector<std::string> oracles;
  std::vector<std::string> occlusions;
  std::vector<SearchConfig> configs;
  std::vector<uint64_t> seeds;
  std::filesystem::path output_dir = ".";
  double batch_fraction = 0.01;
  bool normalize = true;
  int workers = 1;

  int64_t CellCount() const;
  // Throws InvalidArgument: empty cross product or repeated seeds.
  void Validate() const;

  static ExperimentPlan FromJson(const nlohmann::json& j);
  nlohmann::json ToJson() const;
  // Throws IoError when unreadable, FormatError when not valid JSON.
  static ExperimentPlan Load(const std::filesystem::path& path);
};

// Fixed results columns.
const std::vector<std::string>& ResultColumns();

struct ResultRow {
  std::string phantom_id;
  std::string oracle;
  std::string occlusion;
  uint64_t seed = 0;
  int d_max = 0;
  int64_t l_max = 0;
  int iterations = 0;
  int64_t model_calls = 0;
  int64_t passing_mutants = 0;
  double iou = 0.0;
  double dice = 0.0;
  double coverage = 0.0;
  double wall_ms = 0.0;
  std::string error;

  std::vector<std::string> ToFields() const;
  static ResultRow FromFields(const std::vector<std::string>& fields);
  // Identity of the cell a row belongs to (all columns before model_calls).
  std::string CellKey() const;
};

// Everything one cell produces.
struct CellOutcome {
  ResultRow row;
  VoxelGrid volume;
  VoxelGrid truth;
  std::optional<RunResult> run;
  std::optional<Explanation> explanation;
  std::optional<Region> dependency;
  std::optional<OcclusionSpec> occlusion;
};

struct CellIndex {
  size_t phantom = 0;
  size_t oracle = 0;
  size_t occlusion = 0;
  size_t config = 0;
  size_t seed = 0;
};

// Runs a single cell. Errors are caught and reported in row.error.
CellOutcome RunCell(const ExperimentPlan& plan, const CellIndex& cell,
                    bool record_increments = false);

// Runs every cell and writes <output_dir>/results.csv in cell order. With
// `resume`, rows already present in the CSV are kept and their cells skipped.
std::vector<ResultRow> RunExperiment(const ExperimentPlan& plan,
                                     bool resume = false);

// Counts positive increments whose part does not meet `dependency`. Returns
// -1 when there is no dependency region or it covers the whole volume.
int64_t LocalityAudit(std::span<const Increment> increments,
                      const std::optional<Region>& dependency,
                      const Dims& dims);

// Same, reading the "increments" array and "dims" from a run manifest.
int64_t LocalityAudit(const nlohmann::json& manifest,
                      const std::optional<Region>& dependency);

}  // namespace rex3d

#endif  // REX3D_EXPERIMENT_H_
