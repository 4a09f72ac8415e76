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


#include <cmath>
#include <limits>

#include <gtest/gtest.h>

#include "ginibre/distributions.hpp"
#include "ginibre/errors.hpp"
#include "ginibre/quadrature.hpp"
#include "ginibre/theory.hpp"

// Pointwise references are 40-digit mpmath evaluations of the unsimplified
// densities (raw incomplete gamma products, plain erfc).
namespace ginibre {
namespace {

void expect_rel(double value, double reference, double tol) {
  EXPECT_LE(std::abs(value - reference), tol * std::abs(reference))
      << "value " << value << " reference " << reference;
}

QuadratureOptions tight() {
  QuadratureOptions o;
  o.rel_tol = 1e-13;
  o.abs_tol = 0.0;
  o.max_panels = 20000;
  return o;
}

// int_1^inf O^k P(O) dO through u = 1/O.
template <class F>
double moment_over_o(F&& pdf, int k) {
  auto g = [&](double u) {
    if (u <= 0.0 || u >= 1.0) return 0.0;
    const double o = 1.0 / u;
    return std::pow(o, k) * pdf(o) / (u * u);
  };
  return integrate(g, 0.0, 1.0, tight()).value;
}

// int_0^inf v^k p(v) dv through v = t / (1 - t).
template <class F>
double moment_over_positive(F&& pdf, int k) {
  auto g = [&](double t) {
    if (t <= 0.0 || t >= 1.0) return 0.0;
    const double v = t / (1.0 - t);
    return std::pow(v, k) * pdf(v) / ((1.0 - t) * (1.0 - t));
  };
  return integrate(g, 0.0, 1.0, tight()).value;
}

TEST(OverlapVariable, Scalings) {
  const auto v = OverlapVariable::from_o(5.0, 4);
  EXPECT_EQ(v.t, 4.0);
  EXPECT_EQ(v.s, 1.0);
  EXPECT_EQ(v.sigma, 2.0);
  EXPECT_THROW(OverlapVariable::from_o(0.5, 4), DomainError);
}

TEST(JpdfFinite, PointValues) {
  expect_rel(jpdf_ginue_finite(5, 2.5, {0.7, 0.4}), 0.092681048932710047361, 1e-12);
  expect_rel(jpdf_ginue_finite(10, 7.0, {2.0, 1.0}), 0.01270862190094069263, 1e-12);
  EXPECT_THROW(jpdf_ginue_finite(5, 1.0, {0.0, 0.0}), DomainError);
  EXPECT_THROW(jpdf_ginue_finite(2, 2.0, {0.0, 0.0}), DomainError);
}

TEST(JpdfFinite, MomentsReproduceDensityAndOverlap) {
  for (int n : {3, 5, 10}) {
    for (double r : {0.5, 1.0, 2.0}) {
      const ComplexPoint z{r * 0.6, r * 0.8};
      auto pdf = [&](double o) { return jpdf_ginue_finite(n, o, z); };
      expect_rel(moment_over_o(pdf, 0), density_ginue(n, z), 1e-8);
      expect_rel(moment_over_o(pdf, 1), overlap_ginue(n, z), 1e-8);
      expect_rel(jpdf_ginue_finite_first_moment(n, z), overlap_ginue(n, z), 1e-10);
    }
  }
}

TEST(JpdfFinite, LargeNApproachesBulkLimit) {
  const int n = 500;
  const double sn = std::sqrt(static_cast<double>(n));
  const ComplexPoint w{0.3, 0.2};
  for (double s : {0.5, 1.0, 2.0}) {
    // O = 1 + N s: the density in (s, z) is N P_N(O, z).
    const double finite = n * jpdf_ginue_finite(n, 1.0 + n * s, {sn * w.re, sn * w.im});
    expect_rel(finite, jpdf_limit_bulk_ginue(s, w), 0.03);
  }
}

TEST(AppendixIntegrals, AgainstMpmathAndQuadrature) {
  const ComplexPoint z{0.8, 0.9};
  const auto I = appendix_I_integrals(6, z);
  expect_rel(I.i1, 0.26050099704142246874, 1e-12);
  expect_rel(I.i2, 0.051876869312379473088, 1e-11);
  expect_rel(I.i3, 0.016869821841445424957, 1e-11);
  for (int n : {3, 8, 20}) {
    for (double r : {0.0, 0.7, 2.5}) {
      const ComplexPoint p{r, 0.0};
      const auto c = appendix_I_integrals(n, p);
      const double vals[3] = {c.i1, c.i2, c.i3};
      for (int j = 1; j <= 3; ++j) {
        auto f = [&](double o) {
          return std::exp(r * r / o + (n - 2) * std::log(o - 1.0) - (n + j - 1) * std::log(o));
        };
        expect_rel(vals[j - 1], moment_over_o(f, 0), 1e-9);
      }
    }
  }
}

TEST(BulkLimit, MomentsAndTail) {
  for (double wa : {0.0, 0.5, 0.9}) {
    const ComplexPoint w{wa, 0.0};
    auto pdf = [&](double s) { return jpdf_limit_bulk_ginue(s, w); };
    expect_rel(moment_over_positive(pdf, 0), 1.0 / kPi, 1e-8);
    expect_rel(moment_over_positive(pdf, 1), (1.0 - wa * wa) / kPi, 1e-8);
    const double slope = std::log(pdf(1e4) / pdf(1e2)) / std::log(100.0);
    EXPECT_NEAR(slope, -3.0, 0.02);
  }
  EXPECT_EQ(jpdf_limit_bulk_ginue(1.0, {1.2, 0.0}), 0.0);
}

TEST(BulkLimit, NormalizedCdf) {
  for (double wa : {0.0, 0.6}) {
    for (double s : {0.1, 1.0, 7.0}) {
      auto pdf = [&](double v) { return v <= s ? normalized_pdf(LimitKind::BulkGinUE, v, wa) : 0.0; };
      QuadratureOptions o = tight();
      const double mass = integrate(pdf, 0.0, s, o).value;
      expect_rel(normalized_cdf_bulk(s, wa), mass, 1e-9);
    }
  }
}

TEST(EdgeLimit, PointValues) {
  expect_rel(jpdf_limit_edge_ginue(0.7, 0.0), 0.1801849559994855021, 1e-12);
  expect_rel(jpdf_limit_edge_ginue(2.0, -1.0), 0.067520835947802402889, 1e-12);
  expect_rel(jpdf_limit_edge_ginue(1.5, 1.5), 9.0051684793860678987e-8, 1e-10);
  expect_rel(jpdf_limit_edge_ginue(5.0, -3.0), 0.028147296396292510735, 1e-12);
}

TEST(EdgeLimit, MomentsMatchDensityAndOverlap) {
  for (double eta : {-1.0, 0.0, 1.0}) {
    auto pdf = [&](double s) { return jpdf_limit_edge_ginue(s, eta); };
    expect_rel(moment_over_positive(pdf, 0), erfc(kSqrt2 * eta) / (2.0 * kPi), 1e-6);
    expect_rel(moment_over_positive(pdf, 1), overlap_limit_edge(eta), 1e-6);
  }
}

TEST(EdgeLimit, SigmaTail) {
  const double slope = std::log(jpdf_limit_edge_ginue(1e4, 0.0) / jpdf_limit_edge_ginue(1e2, 0.0)) /
                       std::log(100.0);
  EXPECT_NEAR(slope, -3.0, 0.05);
}

TEST(RealBulkLimit, NormalizationTailAndLogMoment) {
  for (double x : {0.0, 0.5}) {
    auto pdf = [&](double s) { return normalized_pdf(LimitKind::RealBulkGinOE, s, x); };
    expect_rel(moment_over_positive(pdf, 0), 1.0, 1e-8);
    const double slope = std::log(pdf(1e4) / pdf(1e2)) / std::log(100.0);
    EXPECT_NEAR(slope, -2.0, 0.02);
    // Each decade of truncation adds the same amount, c/(2 sqrt(2 pi)) ln 10.
    const double m3 = realbulk_partial_first_moment(x, 1e3);
    const double m4 = realbulk_partial_first_moment(x, 1e4);
    const double m5 = realbulk_partial_first_moment(x, 1e5);
    const double step = (1.0 - x * x) / (2.0 * kSqrt2Pi) * std::log(10.0);
    EXPECT_NEAR(m4 - m3, step, 1e-3 * step);
    EXPECT_NEAR(m5 - m4, step, 1e-4 * step);
    expect_rel(normalized_cdf_realbulk(2.0, x),
               integrate(pdf, 0.0, 2.0, tight()).value, 1e-9);
  }
}

TEST(NormalizedPdf, DomainErrors) {
  EXPECT_THROW(normalized_pdf(LimitKind::BulkGinUE, 1.0, 1.0), DomainError);
  EXPECT_THROW(normalized_pdf(LimitKind::RealBulkGinOE, 1.0, -1.5), DomainError);
  EXPECT_THROW(jpdf_limit_bulk_ginue(0.0, {0.0, 0.0}), DomainError);
  EXPECT_THROW(realbulk_partial_first_moment(0.0, std::numeric_limits<double>::infinity()),
               DomainError);
}

}  // namespace
}  // namespace ginibre
