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

#include <array>
#include <cmath>
#include <string>

#include "ginibre/errors.hpp"
#include "ginibre/quadrature.hpp"
#include "ginibre/specfun.hpp"
#include "ginibre/theory.hpp"
#include "ginibre/types.hpp"

// Joint densities of an eigenvalue position and its self-overlap.
namespace ginibre {

// Self-overlap O >= 1 with its shifted and scaled forms.
struct OverlapVariable {
  double o = 1.0;
  double t = 0.0;      // O - 1
  double s = 0.0;      // t / N
  double sigma = 0.0;  // t / sqrt(N)

  static OverlapVariable from_o(double o, int n) {
    if (!(o >= 1.0)) throw DomainError("OverlapVariable: o must be >= 1");
    if (n < 1) throw DomainError("OverlapVariable: N must be >= 1");
    const double t = o - 1.0;
    return {o, t, t / n, t / std::sqrt(static_cast<double>(n))};
  }
};

namespace detail {

// Incomplete-gamma combinations of the finite-N GinUE joint density, each
// divided by Gamma(N) Gamma(N-1) so nothing overflows at large N.
struct FiniteJpdfCoefficients {
  double d1;  // d_1^{(N)}
  double d2;  // d_2^{(N)}
  double D1;
  double D2;
};

inline FiniteJpdfCoefficients finite_jpdf_coefficients(int n, double r2) {
  const double N = n;
  const double qm2 = reg_gamma_q(N - 2, r2);
  const double qm1 = reg_gamma_q(N - 1, r2);
  const double q0 = reg_gamma_q(N, r2);
  const double qp1 = reg_gamma_q(N + 1, r2);
  const double qp2 = reg_gamma_q(N + 2, r2);
  const double d1 = N * qm1 * qp1 - (N - 1) * q0 * q0;
  const double d2 = N * (N + 1) * qm1 * qp2 - N * (N - 1) * q0 * qp1;
  // (N-1)(N-2) d_1^{(N-1)} and (N-2) d_2^{(N-1)}, same normalization.
  const double e1 = (N - 1) * qm2 * q0 - (N - 2) * qm1 * qm1;
  const double e2 = N * qm2 * qp1 - (N - 2) * qm1 * q0;
  const double D1 = r2 * r2 * e1 + ((N - 1) * N - 2.0 * r2 * (N + r2)) * d1 -
                    r2 * (N - r2) * e2 + r2 * d2;
  const double D2 = 2.0 * N * d1 - r2 * e2;
  return {d1, d2, D1, D2};
}

// e^{r2} gamma(m, r2) / r2^m, the lower incomplete gamma rescaled; equals 1/m
// at r2 = 0.
inline double scaled_lower_gamma(int m, double r2) {
  if (r2 == 0.0) return 1.0 / m;
  const double p = reg_gamma_p(m, r2);
  return std::exp(r2 + ln_gamma(m) + std::log(p) - m * std::log(r2));
}

}  // namespace detail

// Joint density of (self-overlap O, eigenvalue z) for an N x N GinUE matrix.
inline double jpdf_ginue_finite(int n, double o, ComplexPoint z) {
  detail::require_dimension(n, 3, "jpdf_ginue_finite");
  require_finite(z, "jpdf_ginue_finite");
  if (!(o > 1.0)) {
    throw DomainError("jpdf_ginue_finite: support is O > 1, got O = " +
                      std::to_string(o));
  }
  if (std::isinf(o)) return 0.0;
  const double r2 = z.abs2();
  const auto c = detail::finite_jpdf_coefficients(n, r2);
  const double log_shape =
      r2 / o + (n - 2) * std::log1p(-1.0 / o) - 3.0 * std::log(o);
  const double bracket = c.D1 + r2 * c.D2 / o + r2 * r2 * c.d1 / (o * o);
  return std::exp(log_shape) * bracket / kPi;
}

struct AppendixIntegrals {
  double i1;
  double i2;
  double i3;
};

// Closed forms of I_j = int_1^inf e^{|z|^2/O} (O-1)^{N-2} O^{-(N+j-1)} dO,
// j = 1, 2, 3.
inline AppendixIntegrals appendix_I_integrals(int n, ComplexPoint z) {
  detail::require_dimension(n, 3, "appendix_I_integrals");
  require_finite(z, "appendix_I_integrals");
  const double N = n;
  const double r2 = z.abs2();
  const double a_nm1 = detail::scaled_lower_gamma(n - 1, r2);
  const double a_n = detail::scaled_lower_gamma(n, r2);
  const double a_np1 = detail::scaled_lower_gamma(n + 1, r2);
  const double i1 = a_nm1;
  const double i2 = (1.0 - (N - 1.0 - r2) * a_n) / (N - 1.0);
  const double poly = r2 * r2 - 2.0 * (N - 1.0) * r2 + N * (N - 1.0);
  const double i3 = ((N + 2.0 - N * N) + (N + 1.0) * r2) /
                        ((N + 1.0) * N * (N - 1.0)) +
                    a_np1 * poly / (N * (N - 1.0));
  return {i1, i2, i3};
}

// First moment int O P_N(O, z) dO assembled from the closed-form integrals.
inline double jpdf_ginue_finite_first_moment(int n, ComplexPoint z) {
  detail::require_dimension(n, 3, "jpdf_ginue_finite_first_moment");
  const double r2 = z.abs2();
  const auto c = detail::finite_jpdf_coefficients(n, r2);
  const auto I = appendix_I_integrals(n, z);
  return (c.D1 * I.i1 + r2 * c.D2 * I.i2 + r2 * r2 * c.d1 * I.i3) / kPi;
}

// Large-N joint density in the bulk, s = (O-1)/N, z = sqrt(N) w.
inline double jpdf_limit_bulk_ginue(double s, ComplexPoint w) {
  if (!(s > 0.0)) throw DomainError("jpdf_limit_bulk_ginue: s must be > 0");
  require_finite(w, "jpdf_limit_bulk_ginue");
  const double c = 1.0 - w.abs2();
  if (c <= 0.0) return 0.0;
  if (std::isinf(s)) return 0.0;
  return c * c / (kPi * s * s * s) * std::exp(-c / s);
}

// Large-N joint density at the edge, sigma = (O-1)/sqrt(N),
// |z| = sqrt(N) + eta.
inline double jpdf_limit_edge_ginue(double sigma, double eta) {
  if (!(sigma > 0.0)) {
    throw DomainError("jpdf_limit_edge_ginue: sigma must be > 0");
  }
  if (std::isnan(eta)) throw DomainError("jpdf_limit_edge_ginue: eta is NaN");
  if (std::isinf(sigma)) return 0.0;
  const double s2 = sigma * sigma;
  const double delta = 1.0 - 2.0 * sigma * eta;
  const double a = -delta * delta / (2.0 * s2);
  const double u = kSqrt2 * eta;
  const double c1 = 2.0 * s2 - delta;
  const double c2 = 4.0 * eta * s2 - delta * (2.0 * eta + sigma);
  const double c3 = 0.5 * (delta * delta - s2);
  double t1, t2, t3;
  if (eta >= 0.0) {
    // erfc(u) = erfcx(u) e^{-u^2}; every term then carries e^{a - u^2}.
    const double e = std::exp(a - u * u);
    const double ex = erfcx(u);
    t1 = e * c1 / kPi;
    t2 = -c2 * ex * e / kSqrt2Pi;
    t3 = c3 * ex * ex * e;
  } else {
    const double ec = erfc(u);
    t1 = std::exp(a - u * u) * c1 / kPi;
    t2 = -c2 * ec * std::exp(a) / kSqrt2Pi;
    // a + 2 eta^2 simplifies to -1/(2 sigma^2) + 2 eta / sigma.
    t3 = c3 * ec * ec * std::exp(-1.0 / (2.0 * s2) + 2.0 * eta / sigma);
  }
  return (t1 + t2 + t3) / (2.0 * kPi * s2 * s2 * sigma);
}

// Large-N joint density for real eigenvalues of a real Ginibre matrix in the
// bulk, x = Re z / sqrt(N), s = (O-1)/N.
inline double jpdf_limit_realbulk_ginoe(double s, double x) {
  if (!(s > 0.0)) throw DomainError("jpdf_limit_realbulk_ginoe: s must be > 0");
  if (!std::isfinite(x)) throw DomainError("jpdf_limit_realbulk_ginoe: x");
  const double c = 1.0 - x * x;
  if (c <= 0.0) return 0.0;
  if (std::isinf(s)) return 0.0;
  return c / (2.0 * kSqrt2Pi) * std::exp(-c / (2.0 * s)) / (s * s);
}

// int_0^T s P(s, x) ds for the real-bulk density. The untruncated moment
// diverges logarithmically, so the truncation T is explicit.
inline double realbulk_partial_first_moment(double x, double T,
                                            const QuadratureOptions& opts = {}) {
  if (!(T > 0.0) || !std::isfinite(T)) {
    throw DomainError("realbulk_partial_first_moment: T must be finite and > 0");
  }
  auto f = [x](double s) {
    return s > 0.0 ? s * jpdf_limit_realbulk_ginoe(s, x) : 0.0;
  };
  return integrate(f, 0.0, T, opts).value;
}

enum class LimitKind { BulkGinUE, EdgeGinUE, RealBulkGinOE };

// Limiting joint density divided by the matching limiting eigenvalue density.
// `param` is |w| (bulk), eta (edge) or x (real bulk).
inline double normalized_pdf(LimitKind kind, double value, double param) {
  switch (kind) {
    case LimitKind::BulkGinUE: {
      if (!(std::abs(param) < 1.0)) {
        throw DomainError("normalized_pdf: bulk density vanishes for |w| >= 1");
      }
      return kPi * jpdf_limit_bulk_ginue(value, {param, 0.0});
    }
    case LimitKind::EdgeGinUE: {
      const double rho = erfc(kSqrt2 * param) / (2.0 * kPi);
      if (!(rho > 0.0)) {
        throw DomainError("normalized_pdf: edge density underflows at eta");
      }
      return jpdf_limit_edge_ginue(value, param) / rho;
    }
    case LimitKind::RealBulkGinOE: {
      if (!(std::abs(param) < 1.0)) {
        throw DomainError("normalized_pdf: real bulk density vanishes for |x| >= 1");
      }
      return kSqrt2Pi * jpdf_limit_realbulk_ginoe(value, param);
    }
  }
  throw DomainError("normalized_pdf: unknown kind");
}

// Closed-form distribution functions of the normalized bulk densities.
inline double normalized_cdf_bulk(double s, double w_abs) {
  const double c = 1.0 - w_abs * w_abs;
  if (!(c > 0.0)) throw DomainError("normalized_cdf_bulk: |w| must be < 1");
  if (s <= 0.0) return 0.0;
  return std::exp(-c / s) * (1.0 + c / s);
}

inline double normalized_cdf_realbulk(double s, double x) {
  const double c = 1.0 - x * x;
  if (!(c > 0.0)) throw DomainError("normalized_cdf_realbulk: |x| must be < 1");
  if (s <= 0.0) return 0.0;
  return std::exp(-c / (2.0 * s));
}

}  // namespace ginibre
