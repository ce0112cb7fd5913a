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

#ifndef REX3D_TOOLS_CLI_COMMANDS_H_
#define REX3D_TOOLS_CLI_COMMANDS_H_

#include <string>
#include <vector>

namespace rex3d::cli {

// Exit codes shared by every subcommand.
enum ExitCode : int {
  kExitOk = 0,
  kExitUsage = 1,
  kExitIo = 2,
  kExitOracle = 3,
  kExitNoExplanation = 4,
};

// Entry point of the `rex3d` tool. Subcommands: explain, render, eval,
// phantom. Diagnostics go to stderr; stdout stays empty.
int Main(int argc, char** argv);

// Same, with the arguments following the program name.
int Run(const std::vector<std::string>& args);

}  // namespace rex3d::cli

#endif  // REX3D_TOOLS_CLI_COMMANDS_H_
