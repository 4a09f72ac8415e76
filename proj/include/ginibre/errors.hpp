// Copyright 2026 The Ginibre Overlaps Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <stdexcept>
#include <string>

namespace ginibre {

// Argument outside the mathematical domain of a formula.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Numerical procedure did not reach the requested accuracy. Carries the best
// estimate obtained before giving up.
class AccuracyError : public std::runtime_error {
 public:
  AccuracyError(const std::string& what, double best_estimate,
                double error_estimate)
      : std::runtime_error(what),
        best_estimate_(best_estimate),
        error_estimate_(error_estimate) {}

  double best_estimate() const noexcept { return best_estimate_; }
  double error_estimate() const noexcept { return error_estimate_; }

 private:
  double best_estimate_;
  double error_estimate_;
};

// Regime/ensemble combination for which no formula exists.
class InvalidRegimeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Eigenvalue of a perturbed matrix could not be matched unambiguously.
class TrackingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Spectrum of a real matrix could not be split into real eigenvalues and
// conjugate pairs.
class ClassificationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace ginibre
