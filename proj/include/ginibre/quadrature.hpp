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

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <queue>
#include <utility>
#include <vector>

#include "ginibre/errors.hpp"

namespace ginibre {

struct QuadratureOptions {
  double abs_tol = 1e-12;
  double rel_tol = 1e-10;
  int max_panels = 2000;
  // Width of the first panel of a semi-infinite integral; later panels
  // double in width.
  double initial_width = 1.0;
};

struct QuadratureResult {
  double value = 0.0;
  double error = 0.0;
  // Set when the error estimate could not be pushed below the requested
  // tolerance because segments reached round-off resolution.
  bool accuracy_warning = false;
  int panels = 0;
};

namespace detail {

struct GkSegment {
  double a, b, value, error;
  bool refinable;
  bool operator<(const GkSegment& o) const { return error < o.error; }
};

// 15-point Kronrod rule with embedded 7-point Gauss rule; error estimate as
// in QUADPACK's qk15.
template <class F>
GkSegment gauss_kronrod15(F& f, double a, double b) {
  static constexpr std::array<double, 8> xgk = {
      0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
      0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
      0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
      0.207784955007898467600689403773245, 0.0};
  static constexpr std::array<double, 8> wgk = {
      0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
      0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
      0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
      0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
  static constexpr std::array<double, 4> wg = {
      0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
      0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

  const double centr = 0.5 * (a + b);
  const double hlgth = 0.5 * (b - a);
  const double dhlgth = std::abs(hlgth);

  std::array<double, 7> fv1{}, fv2{};
  const double fc = f(centr);
  double resg = fc * wg[3];
  double resk = fc * wgk[7];
  double resabs = std::abs(resk);
  for (int j = 0; j < 3; ++j) {
    const int jtw = 2 * j + 1;
    const double absc = hlgth * xgk[jtw];
    const double f1 = f(centr - absc);
    const double f2 = f(centr + absc);
    fv1[jtw] = f1;
    fv2[jtw] = f2;
    resg += wg[j] * (f1 + f2);
    resk += wgk[jtw] * (f1 + f2);
    resabs += wgk[jtw] * (std::abs(f1) + std::abs(f2));
  }
  for (int j = 0; j < 4; ++j) {
    const int jtwm1 = 2 * j;
    const double absc = hlgth * xgk[jtwm1];
    const double f1 = f(centr - absc);
    const double f2 = f(centr + absc);
    fv1[jtwm1] = f1;
    fv2[jtwm1] = f2;
    resk += wgk[jtwm1] * (f1 + f2);
    resabs += wgk[jtwm1] * (std::abs(f1) + std::abs(f2));
  }
  const double reskh = resk * 0.5;
  double resasc = wgk[7] * std::abs(fc - reskh);
  for (int j = 0; j < 7; ++j) {
    resasc += wgk[j] * (std::abs(fv1[j] - reskh) + std::abs(fv2[j] - reskh));
  }
  const double result = resk * hlgth;
  resabs *= dhlgth;
  resasc *= dhlgth;
  double abserr = std::abs((resk - resg) * hlgth);
  if (resasc != 0.0 && abserr != 0.0) {
    abserr = resasc * std::min(1.0, std::pow(200.0 * abserr / resasc, 1.5));
  }
  constexpr double eps = std::numeric_limits<double>::epsilon();
  constexpr double uflow = std::numeric_limits<double>::min();
  if (resabs > uflow / (50.0 * eps)) {
    abserr = std::max(eps * 50.0 * resabs, abserr);
  }
  if (!std::isfinite(result) || !std::isfinite(abserr)) {
    throw DomainError("quadrature: integrand produced a non-finite value");
  }
  const bool refinable =
      dhlgth > 64.0 * eps * std::max(std::abs(centr), 1e-300);
  return {a, b, result, abserr, refinable};
}

// Global adaptive refinement state shared by the finite and semi-infinite
// drivers.
class AdaptiveIntegrator {
 public:
  explicit AdaptiveIntegrator(const QuadratureOptions& opts) : opts_(opts) {}

  template <class F>
  void add(F& f, double a, double b) {
    push(gauss_kronrod15(f, a, b));
  }

  double value() const { return value_; }
  double error() const { return error_; }
  int panels() const { return panels_; }
  bool warning() const { return warning_; }

  double tolerance() const {
    return std::max(opts_.abs_tol, opts_.rel_tol * std::abs(value_));
  }

  // Bisects the worst segments until the global error meets tolerance.
  template <class F>
  void refine(F& f) {
    while (error_ > tolerance()) {
      if (heap_.empty()) {
        warning_ = true;
        return;
      }
      GkSegment worst = heap_.top();
      if (!worst.refinable) {
        heap_.pop();
        frozen_.push_back(worst);
        warning_ = true;
        continue;
      }
      if (panels_ >= opts_.max_panels) {
        throw AccuracyError(
            "quadrature: subdivision budget exhausted before convergence",
            value_, error_);
      }
      heap_.pop();
      value_ -= worst.value;
      error_ -= worst.error;
      --panels_;
      const double mid = 0.5 * (worst.a + worst.b);
      push(gauss_kronrod15(f, worst.a, mid));
      push(gauss_kronrod15(f, mid, worst.b));
      recompute_if_drifted();
    }
  }

 private:
  void push(const GkSegment& s) {
    heap_.push(s);
    value_ += s.value;
    error_ += s.error;
    ++panels_;
  }

  // Running sums accumulate cancellation error; resum from scratch now and
  // then.
  void recompute_if_drifted() {
    if (++updates_ % 64 != 0) return;
    auto copy = heap_;
    double v = 0.0, e = 0.0;
    while (!copy.empty()) {
      v += copy.top().value;
      e += copy.top().error;
      copy.pop();
    }
    for (const auto& s : frozen_) {
      v += s.value;
      e += s.error;
    }
    value_ = v;
    error_ = std::max(e, 0.0);
  }

  QuadratureOptions opts_;
  std::priority_queue<GkSegment> heap_;
  std::vector<GkSegment> frozen_;
  double value_ = 0.0;
  double error_ = 0.0;
  int panels_ = 0;
  long updates_ = 0;
  bool warning_ = false;
};

}  // namespace detail

// Adaptive Gauss-Kronrod integration over a finite interval [a, b].
template <class F>
QuadratureResult integrate(F&& f, double a, double b,
                           const QuadratureOptions& opts = {}) {
  if (!std::isfinite(a) || !std::isfinite(b)) {
    throw DomainError("integrate: interval end points must be finite");
  }
  if (a == b) return {};
  detail::AdaptiveIntegrator acc(opts);
  acc.add(f, a, b);
  acc.refine(f);
  return {acc.value(), acc.error(), acc.warning(), acc.panels()};
}

// Integral of f over [0, inf). Panels of doubling width are appended until two
// consecutive panels contribute less than a tenth of the tolerance implied by
// the running total; the union is then refined adaptively.
template <class F>
QuadratureResult integrate_semi_infinite(F&& f,
                                         const QuadratureOptions& opts = {}) {
  if (!(opts.initial_width > 0.0)) {
    throw DomainError("integrate_semi_infinite: initial width must be > 0");
  }
  detail::AdaptiveIntegrator acc(opts);
  double lo = 0.0;
  double width = opts.initial_width;
  int quiet_panels = 0;
  constexpr int kMaxDoublings = 80;
  for (int k = 0; k < kMaxDoublings; ++k) {
    const double hi = lo + width;
    const double before = acc.value();
    acc.add(f, lo, hi);
    acc.refine(f);
    const double panel = std::abs(acc.value() - before);
    const double total = std::abs(acc.value());
    const double envelope = 0.1 * std::max(opts.abs_tol, opts.rel_tol * total);
    if (total > 0.0 && panel <= envelope) {
      if (++quiet_panels >= 2) {
        return {acc.value(), acc.error(), acc.warning(), acc.panels()};
      }
    } else {
      quiet_panels = 0;
    }
    lo = hi;
    width *= 2.0;
  }
  if (acc.value() == 0.0) {
    return {0.0, acc.error(), acc.warning(), acc.panels()};
  }
  throw AccuracyError("integrate_semi_infinite: integrand does not decay",
                      acc.value(), acc.error());
}

// Gauss-Legendre nodes and weights on [-1, 1] by Newton iteration on P_n.
inline std::pair<std::vector<double>, std::vector<double>> gauss_legendre_rule(
    int n) {
  if (n < 1) throw DomainError("gauss_legendre_rule: n must be >= 1");
  std::vector<double> x(n), w(n);
  const double pi = std::acos(-1.0);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double z = std::cos(pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = z;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (z * p1 - p0) / (z * z - 1.0);
      const double dz = p1 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    // Final derivative at the converged node.
    double p0 = 1.0, p1 = z;
    for (int k = 2; k <= n; ++k) {
      const double p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    dp = n * (z * p1 - p0) / (z * z - 1.0);
    x[i] = -z;
    x[n - 1 - i] = z;
    w[i] = w[n - 1 - i] = 2.0 / ((1.0 - z * z) * dp * dp);
  }
  return {x, w};
}

}  // namespace ginibre
