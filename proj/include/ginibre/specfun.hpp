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
#include <string>

#include "ginibre/errors.hpp"
#include "ginibre/quadrature.hpp"

namespace ginibre {

inline constexpr double kPi = 3.141592653589793238462643383279502884;
inline constexpr double kSqrtPi = 1.772453850905516027298167483341145182;
inline constexpr double kSqrt2 = 1.414213562373095048801688724209698079;
inline constexpr double kSqrt2Pi = 2.506628274631000502415765284811045253;

// Arguments of the regularized incomplete gamma function.
struct RegularizedGammaArgs {
  double n;
  double a;

  void validate() const {
    if (!(n > 0.0) || !std::isfinite(n)) {
      throw DomainError("incomplete gamma: shape n must be finite and > 0, got " +
                        std::to_string(n));
    }
    if (!(a >= 0.0)) {
      throw DomainError("incomplete gamma: argument a must be >= 0, got " +
                        std::to_string(a));
    }
  }
};

inline double ln_gamma(double x) {
  if (!(x > 0.0)) {
    throw DomainError("ln_gamma: argument must be > 0, got " + std::to_string(x));
  }
  return std::lgamma(x);
}

// log(1 + x) - x without cancellation for small |x|.
inline double log1pmx(double x) {
  if (std::abs(x) > 0.5) return std::log1p(x) - x;
  // -x^2/2 + x^3/3 - ...
  double term = x;
  double sum = 0.0;
  for (int k = 2; k < 200; ++k) {
    term *= -x;
    const double add = term / k;
    sum += add;
    if (std::abs(add) <= 1e-17 * std::abs(sum)) break;
  }
  return sum;
}

namespace detail {

// Tail of Stirling's series: lgamma(n+1) - (n ln n - n + ln(2 pi n)/2).
inline double stirling_tail(double n) {
  const double r = 1.0 / n;
  const double r2 = r * r;
  return r * (1.0 / 12.0 -
              r2 * (1.0 / 360.0 -
                    r2 * (1.0 / 1260.0 - r2 * (1.0 / 1680.0 - r2 / 1188.0))));
}

}  // namespace detail

// ln(a^n e^{-a} / Gamma(n+1)), accurate near the crossover a ~ n for large n.
inline double log_poisson_term(double n, double a) {
  if (a == 0.0) return -std::numeric_limits<double>::infinity();
  if (n >= 15.0) {
    const double eps = (a - n) / n;
    return n * log1pmx(eps) - 0.5 * std::log(2.0 * kPi * n) -
           detail::stirling_tail(n);
  }
  return n * std::log(a) - a - std::lgamma(n + 1.0);
}

double log_reg_gamma_q(double n, double a);

namespace detail {

struct GammaPQ {
  double p;
  double q;
};

// Series for P(n,a), valid for a < n + 1.
inline double gamma_p_series(double n, double a) {
  double term = 1.0;
  double sum = 1.0;
  for (int k = 1; k < 1000000; ++k) {
    term *= a / (n + k);
    sum += term;
    if (term < sum * 1e-17) break;
  }
  return std::exp(log_poisson_term(n, a)) * sum;
}

inline GammaPQ gamma_pq(double n, double a) {
  RegularizedGammaArgs{n, a}.validate();
  if (a == 0.0) return {0.0, 1.0};
  if (std::isinf(a)) return {1.0, 0.0};
  if (a < n + 1.0) {
    const double p = gamma_p_series(n, a);
    return {p, 1.0 - p};
  }
  const double q = std::exp(log_reg_gamma_q(n, a));
  return {1.0 - q, q};
}

}  // namespace detail

// Q(n,a) = Gamma(n,a)/Gamma(n).
inline double reg_gamma_q(double n, double a) { return detail::gamma_pq(n, a).q; }

// P(n,a) = 1 - Q(n,a), computed directly where it is small.
inline double reg_gamma_p(double n, double a) { return detail::gamma_pq(n, a).p; }

// ln Q(n,a), finite even where Q itself underflows.
inline double log_reg_gamma_q(double n, double a) {
  RegularizedGammaArgs{n, a}.validate();
  if (a == 0.0) return 0.0;
  if (std::isinf(a)) return -std::numeric_limits<double>::infinity();
  if (a < n + 1.0) return std::log1p(-detail::gamma_p_series(n, a));
  constexpr double tiny = 1e-300;
  double b = a + 1.0 - n;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < 1000000; ++i) {
    const double an = -i * (i - n);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < 1e-16) break;
  }
  return log_poisson_term(n, a) + std::log(n) + std::log(h);
}

inline double erfc(double x) { return std::erfc(x); }

// e^{x^2} erfc(x) for x >= 0 by W. J. Cody's rational Chebyshev
// approximations.
inline double erfcx(double x) {
  if (!(x >= 0.0)) {
    throw DomainError("erfcx: argument must be >= 0, got " + std::to_string(x));
  }
  static constexpr double a[5] = {3.1611237438705656, 113.864154151050156,
                                  377.485237685302021, 3209.37758913846947,
                                  0.185777706184603153};
  static constexpr double b[4] = {23.6012909523441209, 244.024637934444173,
                                  1282.61652607737228, 2844.23683343917062};
  static constexpr double c[9] = {
      0.564188496988670089, 8.88314979438837594, 66.1191906371416295,
      298.635138197400131,  881.95222124176909,  1712.04761263407058,
      2051.07837782607147,  1230.33935479799725, 2.15311535474403846e-8};
  static constexpr double d[8] = {
      15.7449261107098347, 117.693950891312499, 537.181101862009858,
      1621.38957456669019, 3290.79923573345963, 4362.61909014324716,
      3439.36767414372164, 1230.33935480374942};
  static constexpr double p[6] = {
      0.305326634961232344, 0.360344899949804439, 0.125781726111229246,
      0.0160837851487422766, 6.58749161529837803e-4, 0.0163153871373020978};
  static constexpr double q[5] = {2.56852019228982242, 1.87295284992346047,
                                  0.527905102951428412, 0.0605183413124413191,
                                  0.00233520497626869185};
  constexpr double sqrpi = 0.56418958354775628695;  // 1/sqrt(pi)
  constexpr double xhuge = 6.71e7;

  const double y = x;
  if (y <= 0.46875) {
    const double ysq = y > 1.11e-16 ? y * y : 0.0;
    double xnum = a[4] * ysq;
    double xden = ysq;
    for (int i = 0; i < 3; ++i) {
      xnum = (xnum + a[i]) * ysq;
      xden = (xden + b[i]) * ysq;
    }
    const double erf_val = y * (xnum + a[3]) / (xden + b[3]);
    return std::exp(ysq) * (1.0 - erf_val);
  }
  if (y <= 4.0) {
    double xnum = c[8] * y;
    double xden = y;
    for (int i = 0; i < 7; ++i) {
      xnum = (xnum + c[i]) * y;
      xden = (xden + d[i]) * y;
    }
    return (xnum + c[7]) / (xden + d[7]);
  }
  if (y >= xhuge) return sqrpi / y;
  const double ysq = 1.0 / (y * y);
  double xnum = p[5] * ysq;
  double xden = ysq;
  for (int i = 0; i < 4; ++i) {
    xnum = (xnum + p[i]) * ysq;
    xden = (xden + q[i]) * ysq;
  }
  const double r = ysq * (xnum + p[4]) / (xden + q[4]);
  return (sqrpi - r) / y;
}

// Legendre polynomial P_n(t) for t >= 1 by the three-term recurrence.
// Returns +inf once the value exceeds the double range.
inline double legendre_p(int n, double t) {
  if (n < 0) throw DomainError("legendre_p: degree must be >= 0");
  if (!(t >= 1.0)) {
    throw DomainError("legendre_p: argument must be >= 1, got " + std::to_string(t));
  }
  if (n == 0) return 1.0;
  double p0 = 1.0, p1 = t;
  for (int k = 1; k < n; ++k) {
    const double p2 = ((2.0 * k + 1.0) * t * p1 - k * p0) / (k + 1.0);
    if (std::isinf(p2)) return std::numeric_limits<double>::infinity();
    p0 = p1;
    p1 = p2;
  }
  return p1;
}

// ln P_n(t) for t >= 1 with periodic rescaling, usable where P_n overflows.
inline double log_legendre_p(int n, double t) {
  if (n < 0) throw DomainError("log_legendre_p: degree must be >= 0");
  if (!(t >= 1.0)) {
    throw DomainError("log_legendre_p: argument must be >= 1, got " +
                      std::to_string(t));
  }
  if (n == 0) return 0.0;
  double p0 = 1.0, p1 = t, log_scale = 0.0;
  for (int k = 1; k < n; ++k) {
    const double p2 = ((2.0 * k + 1.0) * t * p1 - k * p0) / (k + 1.0);
    p0 = p1;
    p1 = p2;
    if (p1 > 1e200) {
      p0 *= 1e-200;
      p1 *= 1e-200;
      log_scale += 200.0 * std::log(10.0);
    }
  }
  return log_scale + std::log(p1);
}

}  // namespace ginibre
