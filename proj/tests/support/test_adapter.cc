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

// Wire-protocol server used by the tests. Usage:
//   test_adapter <mode> [--shape X,Y,Z] [--oracle SPEC]
// Modes: zero, oracle, malformed, die, slow, wrongcount, wrongid, badconf,
// error.

#include <chrono>
#include <cstdio>
#include <iostream>
#include <memory>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "rex3d/oracle.h"
#include "rex3d/voxel_grid.h"

namespace {

using nlohmann::json;

void Send(const json& j) {
  std::cout << j.dump() << '\n';
  std::cout.flush();
}

std::vector<int64_t> ParseShape(const std::string& s) {
  std::vector<int64_t> out;
  size_t pos = 0;
  while (pos <= s.size()) {
    const size_t comma = s.find(',', pos);
    out.push_back(std::stoll(s.substr(pos, comma - pos)));
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 2) return 2;
  const std::string mode = argv[1];
  std::vector<int64_t> expected_shape;
  std::unique_ptr<rex3d::Oracle> oracle;
  for (int i = 2; i + 1 < argc; i += 2) {
    const std::string flag = argv[i];
    if (flag == "--shape") expected_shape = ParseShape(argv[i + 1]);
    if (flag == "--oracle") {
      oracle = rex3d::MakeSyntheticOracle(rex3d::ParseOracleKind(argv[i + 1]));
    }
  }

  std::string line;
  if (!std::getline(std::cin, line)) return 1;
  const json hello = json::parse(line);
  const auto shape = hello.at("shape").get<std::vector<int64_t>>();
  if (hello.at("proto") != 1 || hello.at("dtype") != "f32le" ||
      (!expected_shape.empty() && shape != expected_shape)) {
    Send({{"ok", false}, {"error", "shape mismatch"}});
    return 1;
  }
  Send({{"proto", 1}, {"ok", true}});
  const rex3d::Dims dims{shape[0], shape[1], shape[2]};

  while (std::getline(std::cin, line)) {
    const json req = json::parse(line);
    const int64_t id = req.at("id").get<int64_t>();
    if (id == -1) return 0;
    const int64_t count = req.at("count").get<int64_t>();
    std::vector<rex3d::VoxelGrid> batch;
    for (int64_t k = 0; k < count; ++k) {
      std::vector<float> data(static_cast<size_t>(dims.VoxelCount()));
      std::cin.read(reinterpret_cast<char*>(data.data()),
                    static_cast<std::streamsize>(data.size() * sizeof(float)));
      if (!std::cin) return 1;
      batch.emplace_back(dims, std::move(data));
    }

    if (mode == "die") return 3;
    if (mode == "malformed") {
      std::cout << "{\"id\":" << id << ",\"labels\":[0" << '\n';
      std::cout.flush();
      continue;
    }
    if (mode == "slow") std::this_thread::sleep_for(std::chrono::seconds(30));
    if (mode == "error") {
      Send({{"id", id}, {"error", "model crashed"}});
      continue;
    }

    std::vector<int> labels;
    std::vector<double> confidences;
    if (oracle) {
      for (const auto& v : oracle->Classify(batch)) {
        labels.push_back(v.label);
        confidences.push_back(v.confidence);
      }
    } else {
      labels.assign(batch.size(), 0);
      confidences.assign(batch.size(), 0.25);
    }
    if (mode == "wrongcount") labels.pop_back();
    if (mode == "badconf") confidences[0] = 1.5;
    Send({{"id", mode == "wrongid" ? id + 1 : id},
          {"labels", labels},
          {"confidences", confidences}});
  }
  return 0;
}
