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

#ifndef REX3D_ERRORS_H_
#define REX3D_ERRORS_H_

#include <stdexcept>
#include <string>

namespace rex3d {

// Root of every error raised by the library. Subclasses are grouped by the
// exit-code family the command-line tool maps them to.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// --- Volume and file errors -------------------------------------------------

class IoError : public Error {
 public:
  using Error::Error;
};

class FormatError : public IoError {
 public:
  using IoError::IoError;
};

class UnsupportedDatatype : public FormatError {
 public:
  UnsupportedDatatype(int code);
  int code() const { return code_; }

 private:
  int code_;
};

class TruncatedFile : public FormatError {
 public:
  using FormatError::FormatError;
};

class InvalidPhantomSpec : public Error {
 public:
  using Error::Error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// --- Partition --------------------------------------------------------------

class UnsplittableRegion : public Error {
 public:
  using Error::Error;
};

// --- Occlusion --------------------------------------------------------------

class DonorShapeMismatch : public Error {
 public:
  using Error::Error;
};

class EmptyCohort : public Error {
 public:
  using Error::Error;
};

// --- Model oracle -----------------------------------------------------------

class OracleError : public Error {
 public:
  using Error::Error;
};

class OracleUnavailable : public OracleError {
 public:
  using OracleError::OracleError;
};

class ProtocolError : public OracleError {
 public:
  using OracleError::OracleError;
};

class OracleTimeout : public OracleError {
 public:
  using OracleError::OracleError;
};

class BudgetExhausted : public OracleError {
 public:
  using OracleError::OracleError;
};

// --- Explanation ------------------------------------------------------------

class NoSignal : public Error {
 public:
  using Error::Error;
};

class InsufficientMap : public Error {
 public:
  using Error::Error;
};

}  // namespace rex3d

#endif  // REX3D_ERRORS_H_
