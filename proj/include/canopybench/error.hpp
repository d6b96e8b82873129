/* Copyright 2026 The canopybench Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace canopy {

enum class ErrorKind {
  InvalidArgument,
  UnsupportedFormat,
  CorruptFile,
  IoFailure,
  TileTooLarge,
  GeometryMismatch,
  UnitsMismatch,
  NoValidPixels,
  DomainMismatch,
  MissingScore,
  InvalidRecord,
  EmptySample,
  EmptySplit,
  CrownOutOfBounds,
  ConfigError,
  StageFailure,
};

std::string_view to_string(ErrorKind kind);

// All library failures surface as canopy::Error; kind() is the contract,
// what() carries context for humans.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(to_string(kind)) + ": " + message),
        kind_(kind),
        detail_(message) {}

  ErrorKind kind() const noexcept { return kind_; }
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorKind kind_;
  std::string detail_;
};

}  // namespace canopy
