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

#ifndef REX3D_CSV_H_
#define REX3D_CSV_H_

#include <istream>
#include <ostream>
#include <string>
#include <vector>

namespace rex3d::csv {

// RFC 4180: fields containing a comma, quote, CR or LF are quoted and quotes
// doubled. Rows end with CRLF.
void WriteRow(std::ostream& out, const std::vector<std::string>& fields);

// Parses a whole RFC 4180 document. Accepts LF or CRLF row ends. Throws
// rex3d::FormatError on an unterminated quoted field.
std::vector<std::vector<std::string>> Parse(std::istream& in);

}  // namespace rex3d::csv

#endif  // REX3D_CSV_H_
