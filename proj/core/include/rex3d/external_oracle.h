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

#ifndef REX3D_EXTERNAL_ORACLE_H_
#define REX3D_EXTERNAL_ORACLE_H_

#include <chrono>
#include <memory>
#include <string>

#include "rex3d/oracle.h"
#include "rex3d/voxel_grid.h"

namespace rex3d {

struct ExternalOracleOptions {
  // Applies to the handshake and to each batch round trip.
  std::chrono::milliseconds timeout{120'000};
};

// Runs `command` through /bin/sh and talks to it over stdin/stdout:
//
//   -> {"proto":1,"shape":[x,y,z],"dtype":"f32le"}\n
//   <- {"proto":1,"ok":true}\n            (or {"ok":false,"error":"..."})
//   -> {"id":n,"count":k}\n  followed by k*x*y*z little-endian f32, x-fastest
//   <- {"id":n,"labels":[...],"confidences":[...]}\n
//   -> {"id":-1}\n                        (on destruction; child exits 0)
//
// Handshake failures raise ProtocolError, a dead child OracleUnavailable, and
// a missed deadline OracleTimeout. The handle is a serial channel.
std::unique_ptr<Oracle> SpawnExternalOracle(const std::string& command, Dims dims,
                                            ExternalOracleOptions options = {});

}  // namespace rex3d

#endif  // REX3D_EXTERNAL_ORACLE_H_
