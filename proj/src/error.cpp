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

#include "canopybench/error.hpp"

namespace canopy {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::UnsupportedFormat: return "UnsupportedFormat";
    case ErrorKind::CorruptFile: return "CorruptFile";
    case ErrorKind::IoFailure: return "IoFailure";
    case ErrorKind::TileTooLarge: return "TileTooLarge";
    case ErrorKind::GeometryMismatch: return "GeometryMismatch";
    case ErrorKind::UnitsMismatch: return "UnitsMismatch";
    case ErrorKind::NoValidPixels: return "NoValidPixels";
    case ErrorKind::DomainMismatch: return "DomainMismatch";
    case ErrorKind::MissingScore: return "MissingScore";
    case ErrorKind::InvalidRecord: return "InvalidRecord";
    case ErrorKind::EmptySample: return "EmptySample";
    case ErrorKind::EmptySplit: return "EmptySplit";
    case ErrorKind::CrownOutOfBounds: return "CrownOutOfBounds";
    case ErrorKind::ConfigError: return "ConfigError";
    case ErrorKind::StageFailure: return "StageFailure";
  }
  return "Unknown";
}

}  // namespace canopy
