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
#include <limits>
#include <optional>
#include <string>

#include "ginibre/errors.hpp"
#include "ginibre/quadrature.hpp"
#include "ginibre/specfun.hpp"
#include "ginibre/types.hpp"

// Mean eigenvalue densities and mean diagonal overlaps of the real (GinOE) and
// complex (GinUE) Ginibre ensembles with unit-variance entries, their scaling
// limits, and the characteristic-polynomial averages behind them.
namespace ginibre {

enum class Regime { Bulk, Edge, Depletion };

// Scaling coordinates. Each regime reads only its own fields:
//   bulk      -> w           (z = sqrt(N) w)
//   edge      -> eta, theta  (z = (sqrt(N) + eta) e^{i theta})
//   depletion -> xi, delta_strip  (z = sqrt(N) delta + i xi)
struct RegimeCoordinates {
  ComplexPoint w;
  double eta = 0.0;
  double theta = 0.0;
  double xi = 0.0;
  std::optional<double> delta_strip;
};

namespace detail {

inline void require_dimension(int n, int min_n, const char* who) {
  if (n < min_n) {
    throw DomainError(std::string(who) + ": matrix dimension must be >= " +
                      std::to_string(min_n) + ", got " + std::to_string(n));
  }
}

// r2^m e^{-r2} / Gamma(m), evaluated in log domain.
inline double scaled_power_exp(int m, double r2) {
  if (r2 == 0.0) return 0.0;
  return std::exp(log_poisson_term(m, r2) + std::log(static_cast<double>(m)));
}

}  // namespace detail

inline double density_ginue(int n, ComplexPoint z) {
  detail::require_dimension(n, 1, "density_ginue");
  require_finite(z, "density_ginue");
  return reg_gamma_q(n, z.abs2()) / kPi;
}

// Density of complex eigenvalues of a real Ginibre matrix.
inline double density_ginoe_complex(int n, ComplexPoint z) {
  detail::require_dimension(n, 2, "density_ginoe_complex");
  require_finite(z, "density_ginoe_complex");
  const double ay = std::abs(z.im);
  if (ay == 0.0) return 0.0;
  return std::sqrt(2.0 / kPi) * ay * erfcx(kSqrt2 * ay) *
         reg_gamma_q(n - 1, z.abs2());
}

inline double density(EnsembleKind kind, int n, ComplexPoint z) {
  return kind == EnsembleKind::GinUE ? density_ginue(n, z)
                                     : density_ginoe_complex(n, z);
}

inline double density_limit(Regime regime, const RegimeCoordinates& c,
                            EnsembleKind kind) {
  switch (regime) {
    case Regime::Bulk:
      return c.w.abs2() < 1.0 ? 1.0 / kPi : 0.0;
    case Regime::Edge:
      return erfc(kSqrt2 * c.eta) / (2.0 * kPi);
    case Regime::Depletion: {
      if (kind == EnsembleKind::GinUE) {
        throw InvalidRegimeError(
            "density_limit: the depletion regime exists only for GinOE");
      }
      const double ax = std::abs(c.xi);
      double rho = std::sqrt(2.0 / kPi) * ax * erfcx(kSqrt2 * ax);
      if (c.delta_strip) {
        const double d2 = *c.delta_strip * *c.delta_strip;
        if (d2 >= 1.0) rho = 0.0;
      }
      return rho;
    }
  }
  throw InvalidRegimeError("density_limit: unknown regime");
}

inline double overlap_ginue(int n, ComplexPoint z) {
  detail::require_dimension(n, 2, "overlap_ginue");
  require_finite(z, "overlap_ginue");
  const double r2 = z.abs2();
  const double bracket =
      reg_gamma_q(n, r2) * (n - r2) + detail::scaled_power_exp(n, r2);
  return bracket / kPi;
}

// 1 + sqrt(pi/2) erfcx(sqrt(2) y) / (2y): the result of integrating out the
// Schur variable delta.
inline double schur_delta_integral(double y) {
  if (!(y > 0.0)) {
    throw DomainError("schur_delta_integral: y must be > 0, got " +
                      std::to_string(y));
  }
  return 1.0 + std::sqrt(kPi / 2.0) * erfcx(kSqrt2 * y) / (2.0 * y);
}

// Same quantity from its defining integral
// (1/2y) int_0^inf d sqrt(d^2 + 4y^2) e^{-d^2/2} dd.
inline QuadratureResult schur_delta_integral_quadrature(
    double y, const QuadratureOptions& opts = {}) {
  if (!(y > 0.0)) {
    throw DomainError("schur_delta_integral_quadrature: y must be > 0");
  }
  auto r = integrate_semi_infinite(
      [y](double d) {
        return d * std::sqrt(d * d + 4.0 * y * y) * std::exp(-0.5 * d * d);
      },
      opts);
  r.value /= 2.0 * y;
  r.error /= 2.0 * y;
  return r;
}

inline double overlap_ginoe(int n, ComplexPoint z) {
  detail::require_dimension(n, 2, "overlap_ginoe");
  require_finite(z, "overlap_ginoe");
  if (z.im == 0.0) {
    throw DomainError(
        "overlap_ginoe: formula holds only for complex eigenvalues; the mean "
        "self-overlap diverges on the real line");
  }
  const double r2 = z.abs2();
  const double bracket = reg_gamma_q(n - 1, r2) * (n - 1 - r2) +
                         detail::scaled_power_exp(n - 1, r2);
  return schur_delta_integral(std::abs(z.im)) * bracket / kPi;
}

inline double overlap(EnsembleKind kind, int n, ComplexPoint z) {
  return kind == EnsembleKind::GinUE ? overlap_ginue(n, z) : overlap_ginoe(n, z);
}

// Expected self-overlap given an eigenvalue at z.
inline double conditional_mean(int n, ComplexPoint z, EnsembleKind kind) {
  if (kind == EnsembleKind::GinOE && z.im == 0.0) {
    throw DomainError("conditional_mean: GinOE requires Im z != 0");
  }
  const double rho = density(kind, n, z);
  if (!(rho >= std::numeric_limits<double>::min())) {
    throw DomainError("conditional_mean: density underflows at z (outside support)");
  }
  return overlap(kind, n, z) / rho;
}

inline double overlap_limit_bulk(ComplexPoint w) {
  require_finite(w, "overlap_limit_bulk");
  const double w2 = w.abs2();
  return w2 < 1.0 ? (1.0 - w2) / kPi : 0.0;
}

inline double overlap_limit_edge(double eta) {
  if (std::isnan(eta)) throw DomainError("overlap_limit_edge: eta is NaN");
  const double u = kSqrt2 * eta;
  if (eta < 0.0) {
    return (std::exp(-u * u) / kSqrt2Pi - eta * erfc(u)) / kPi;
  }
  // e^{-u^2} [1/sqrt(2 pi) - eta erfcx(u)]; the bracket cancels for large u and
  // is then summed from its asymptotic series.
  double bracket;
  if (u > 8.0) {
    const double x = 1.0 / (2.0 * u * u);
    double term = 1.0, sum = 0.0;
    for (int m = 1; m < 40; ++m) {
      term *= -(2.0 * m - 1.0) * x;
      sum -= term;
      if (std::abs(term) < 1e-17 * std::abs(sum)) break;
    }
    bracket = sum / kSqrt2Pi;
  } else {
    bracket = 1.0 / kSqrt2Pi - eta * erfcx(u);
  }
  return std::exp(-u * u) * bracket / kPi;
}

inline double overlap_limit_depletion(double xi,
                                      std::optional<double> delta_strip = {}) {
  if (xi == 0.0 || std::isnan(xi)) {
    throw DomainError(
        "overlap_limit_depletion: xi must be nonzero (real-axis divergence)");
  }
  double v = schur_delta_integral(std::abs(xi)) / kPi;
  if (delta_strip) {
    const double d2 = *delta_strip * *delta_strip;
    v *= d2 < 1.0 ? 1.0 - d2 : 0.0;
  }
  return v;
}

// Gamma(N-M+1, N x)/Gamma(N-M+1); tends to the step function Theta[1-x].
inline double theta_n_m(int n, int m, double x) {
  if (n - m + 1 < 1) {
    throw DomainError("theta_n_m: requires N - M + 1 >= 1");
  }
  if (!(x >= 0.0)) throw DomainError("theta_n_m: x must be >= 0");
  return reg_gamma_q(n - m + 1, static_cast<double>(n) * x);
}

namespace detail {

// log of e^{-R} D^{n/2} P_n(s/sqrt(D)) with s = mu + R + |z|^2 and
// D = (R + |z|^2)^2 + mu^2 + 2 mu (|z|^2 - R). Uses q_k = P_k(t)/t^k, which
// stays in (0, 1] for t >= 1, so nothing overflows.
inline double log_det_integrand(int n, double r2, double mu, double R) {
  const double s = mu + R + r2;
  if (s <= 0.0) return -std::numeric_limits<double>::infinity();
  const double d = (R + r2) * (R + r2) + mu * mu + 2.0 * mu * (r2 - R);
  const double rho = d / (s * s);
  double q0 = 1.0, q1 = 1.0;
  for (int k = 1; k < n; ++k) {
    const double q2 = ((2.0 * k + 1.0) * q1 - k * rho * q0) / (k + 1.0);
    q0 = q1;
    q1 = q2;
  }
  return -R + n * std::log(s) + std::log(q1);
}

}  // namespace detail

// Average of det[(x - G)^2 + y^2] style characteristic-polynomial products
// over an n x n real Ginibre block, as a one-dimensional integral.
inline double avg_det_charpoly(int n, ComplexPoint z, double mu,
                               QuadratureOptions opts = {}) {
  if (n < 1) throw DomainError("avg_det_charpoly: n must be >= 1");
  require_finite(z, "avg_det_charpoly");
  if (!(mu >= 0.0) || !std::isfinite(mu)) {
    throw DomainError("avg_det_charpoly: mu must be finite and >= 0");
  }
  const double r2 = z.abs2();
  // Put the first panel boundary near the integrand's bulk.
  opts.initial_width = std::max(1.0, static_cast<double>(n) / 4.0);
  auto f = [&](double R) {
    return std::exp(detail::log_det_integrand(n, r2, mu, R));
  };
  return integrate_semi_infinite(f, opts).value;
}

struct DetAverageAtZero {
  double value;       // average at mu = 0
  double derivative;  // d/dmu at mu = 0
};

inline DetAverageAtZero avg_det_mu_derivative(int n, ComplexPoint z) {
  detail::require_dimension(n, 3, "avg_det_mu_derivative");
  require_finite(z, "avg_det_mu_derivative");
  const double r2 = z.abs2();
  // e^{r2} Gamma(N-1, r2)
  const double value =
      std::exp(r2 + ln_gamma(n - 1) + log_reg_gamma_q(n - 1, r2));
  const double power = r2 == 0.0 ? 0.0 : std::exp((n - 1) * std::log(r2));
  return {value, (n - 2 - r2) * value + power};
}

}  // namespace ginibre
