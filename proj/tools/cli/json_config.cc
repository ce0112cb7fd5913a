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


#include "cli/json_config.h"

#include <fstream>
#include <set>

#include <nlohmann/json.hpp>

#include "rex3d/errors.h"

namespace rex3d::cli {
namespace {

constexpr std::string_view kConfigFlag = "--config";

std::string Scalar(const std::string& key, const nlohmann::json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number() || v.is_boolean()) return v.dump();
  throw FormatError("config value for \"" + key + "\" must be a scalar");
}

// Long flag name of an argument, or empty when it is not a long flag.
std::string FlagName(const std::string& arg) {
  if (arg.size() <= 2 || arg.compare(0, 2, "--") != 0) return {};
  return arg.substr(2, arg.find('=') - 2);
}

}  // namespace

std::vector<std::string> ExpandConfig(const std::vector<std::string>& args) {
  std::vector<std::string> out;
  std::string path;
  size_t insert_at = 0;
  std::set<std::string> given;
  for (size_t i = 0; i < args.size(); ++i) {
    const std::string& a = args[i];
    if (a == kConfigFlag && i + 1 < args.size()) {
      path = args[++i];
      insert_at = out.size();
      continue;
    }
    if (a.rfind(std::string(kConfigFlag) + "=", 0) == 0) {
      path = a.substr(kConfigFlag.size() + 1);
      insert_at = out.size();
      continue;
    }
    if (const std::string name = FlagName(a); !name.empty()) given.insert(name);
    out.push_back(a);
  }
  if (path.empty()) return out;

  std::ifstream in(path);
  if (!in) throw IoError("cannot read config file " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("config file " + path + " is not valid JSON: " + e.what());
  }
  if (!j.is_object()) throw FormatError("config file " + path + " must hold a JSON object");

  std::vector<std::string> expanded;
  for (const auto& [key, value] : j.items()) {
    if (given.count(key) > 0) continue;
    const std::string flag = "--" + key;
    if (value.is_boolean()) {
      if (value.get<bool>()) expanded.push_back(flag);
      continue;
    }
    if (value.is_array()) {
      for (const auto& v : value) {
        expanded.push_back(flag);
        expanded.push_back(Scalar(key, v));
      }
      continue;
    }
    expanded.push_back(flag);
    expanded.push_back(Scalar(key, value));
  }
  out.insert(out.begin() + static_cast<std::ptrdiff_t>(insert_at), expanded.begin(),
             expanded.end());
  return out;
}

}  // namespace rex3d::cli
