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


#ifndef REX3D_TOOLS_CLI_JSON_CONFIG_H_
#define REX3D_TOOLS_CLI_JSON_CONFIG_H_

#include <string>
#include <vector>

namespace rex3d::cli {

// Replaces "--config FILE" (or "--config=FILE") with the flags it holds.
// The file is a flat JSON object keyed by long flag names without dashes,
// e.g. {"max-depth": 3, "oracle": "sphere:..."}. Arrays repeat the flag,
// true booleans become bare flags, false ones are dropped. Flags given on
// the command line take precedence over file values.
//
// Throws IoError when the file is unreadable, FormatError when it is not a
// JSON object of scalars and arrays.
std::vector<std::string> ExpandConfig(const std::vector<std::string>& args);

}  // namespace rex3d::cli

#endif  // REX3D_TOOLS_CLI_JSON_CONFIG_H_
