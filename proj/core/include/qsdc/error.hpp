// Copyright 2026 The qsdc-sim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <stdexcept>
#include <string>

namespace qsdc {

// Root of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad input: malformed graphs, out-of-range parameters, schema violations.
class ValidationError : public Error {
 public:
  using Error::Error;
};

// The dense density-matrix backend cannot hold the requested network.
class CapacityError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

// Parameter outside the region where an analytic result holds.
class OutOfRegionError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

// Runtime failure during a simulation (diverged integration, lost signal,
// network partition).
class RuntimeFailure : public Error {
 public:
  using Error::Error;
};

class IntegrationDiverged : public RuntimeFailure {
 public:
  using RuntimeFailure::RuntimeFailure;
};

class DegenerateCoherence : public RuntimeFailure {
 public:
  using RuntimeFailure::RuntimeFailure;
};

class PartitionError : public RuntimeFailure {
 public:
  using RuntimeFailure::RuntimeFailure;
};

}  // namespace qsdc
