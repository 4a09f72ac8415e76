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

#include <cmath>
#include <cstdint>
#include <string>
#include <string_view>

#include "ginibre/errors.hpp"

namespace ginibre {

// Eigenvalue location z = re + i im.
struct ComplexPoint {
  double re = 0.0;
  double im = 0.0;

  double abs2() const { return re * re + im * im; }
  double abs() const { return std::hypot(re, im); }
  ComplexPoint conj() const { return {re, -im}; }
  bool finite() const { return std::isfinite(re) && std::isfinite(im); }

  friend bool operator==(const ComplexPoint&, const ComplexPoint&) = default;
};

inline void require_finite(const ComplexPoint& z, const char* who) {
  if (!z.finite()) {
    throw DomainError(std::string(who) + ": point must have finite coordinates");
  }
}

enum class EnsembleKind { GinOE, GinUE };

inline std::string_view to_string(EnsembleKind k) {
  return k == EnsembleKind::GinOE ? "ginoe" : "ginue";
}

inline EnsembleKind parse_ensemble(std::string_view s) {
  if (s == "ginoe" || s == "GinOE") return EnsembleKind::GinOE;
  if (s == "ginue" || s == "GinUE") return EnsembleKind::GinUE;
  throw std::invalid_argument("unknown ensemble '" + std::string(s) +
                              "' (expected ginoe or ginue)");
}

// One eigenvalue of one sampled matrix with its self-overlap.
struct SpectralDatum {
  ComplexPoint z;
  double self_overlap = 1.0;
  bool is_real = false;
  std::int64_t sample_index = 0;
  std::int32_t eigen_index = 0;

  friend bool operator==(const SpectralDatum&, const SpectralDatum&) = default;
};

}  // namespace ginibre
