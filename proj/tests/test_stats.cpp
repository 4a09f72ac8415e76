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
#include <vector>

#include <gtest/gtest.h>

#include "ginibre/errors.hpp"
#include "ginibre/mc.hpp"
#include "ginibre/specfun.hpp"
#include "ginibre/stats.hpp"

namespace ginibre {
namespace {

SpectralDatum datum(double re, double im, double o) {
  SpectralDatum d;
  d.z = {re, im};
  d.self_overlap = o;
  return d;
}

BinSpec disk(std::vector<ComplexPoint> centers, double window, std::int64_t min_count = 2) {
  BinSpec s;
  s.centers = std::move(centers);
  s.window = window;
  s.min_count = min_count;
  return s;
}

TEST(Accumulator, MergeMatchesSequential) {
  Accumulator all, a, b;
  for (int i = 0; i < 100; ++i) {
    const double x = std::sin(0.37 * i) * 5.0 + i * 0.01;
    all.add(x);
    (i < 37 ? a : b).add(x);
  }
  a.merge(b);
  EXPECT_EQ(a.count, all.count);
  EXPECT_NEAR(a.mean, all.mean, 1e-13);
  EXPECT_NEAR(a.variance(), all.variance(), 1e-12);
}

TEST(ConditionalMeanSeries, SingleRecordIsLowStatistics) {
  const auto s = conditional_mean_series({datum(0.1, 0.1, 3.5)}, disk({{0.0, 0.0}}, 1.0));
  ASSERT_EQ(s.bins.size(), 1u);
  EXPECT_EQ(s.bins[0].count, 1);
  EXPECT_EQ(s.bins[0].mean, 3.5);
  EXPECT_TRUE(s.bins[0].low_statistics);
  EXPECT_TRUE(std::isnan(s.bins[0].std_error));
}

TEST(ConditionalMeanSeries, DuplicatedStream) {
  std::vector<SpectralDatum> recs;
  for (int i = 0; i < 40; ++i) recs.push_back(datum(0.01 * i, 0.2, 1.0 + 0.1 * i * i));
  auto twice = recs;
  twice.insert(twice.end(), recs.begin(), recs.end());
  const auto spec = disk({{0.0, 0.0}, {0.3, 0.2}}, 0.5);
  const auto a = conditional_mean_series(recs, spec);
  const auto b = conditional_mean_series(twice, spec);
  for (std::size_t k = 0; k < 2; ++k) {
    const double n = static_cast<double>(a.bins[k].count);
    EXPECT_EQ(b.bins[k].count, 2 * a.bins[k].count);
    EXPECT_NEAR(b.bins[k].mean, a.bins[k].mean, 1e-13 * a.bins[k].mean);
    // Unbiased variances: exact ratio sqrt((n-1)/(2n-1)), about 1/sqrt(2).
    EXPECT_NEAR(b.bins[k].std_error / a.bins[k].std_error, std::sqrt((n - 1.0) / (2.0 * n - 1.0)),
                1e-12);
  }
  EXPECT_THROW(conditional_mean_series({}, spec), DomainError);
}

TEST(ConditionalMeanSeries, FiltersAndEmptyBins) {
  auto spec = disk({{0.0, 0.0}, {10.0, 10.0}}, 1.0);
  spec.upper_half_only = true;
  std::vector<SpectralDatum> recs = {datum(0.0, 0.5, 2.0), datum(0.0, -0.5, 100.0),
                                     datum(0.2, 0.0, 50.0)};
  recs[2].is_real = true;
  const auto s = conditional_mean_series(recs, spec);
  EXPECT_EQ(s.bins[0].count, 1);
  EXPECT_EQ(s.bins[0].mean, 2.0);
  EXPECT_EQ(s.bins[1].count, 0);
  EXPECT_TRUE(s.bins[1].low_statistics);
  spec.include_real = true;
  EXPECT_EQ(conditional_mean_series(recs, spec).bins[0].count, 2);
}

TEST(BinSpec, Validation) {
  EXPECT_THROW(disk({}, 1.0).validate(), DomainError);
  EXPECT_THROW(disk({{0.0, 0.0}}, 0.0).validate(), DomainError);
  BinSpec a = disk({{-1.0, 0.0}}, 0.5);
  a.geometry = BinGeometry::Annulus;
  EXPECT_THROW(a.validate(), DomainError);
}

TEST(BinMeasure, Geometries) {
  EXPECT_NEAR(bin_measure(disk({{1.0, 2.0}}, 0.7), 0), kPi * 0.49, 1e-12);
  auto half = disk({{0.0, 0.0}}, 1.0);
  half.upper_half_only = true;
  EXPECT_NEAR(bin_measure(half, 0), kPi / 2.0, 1e-12);
  BinSpec ann = disk({{3.0, 0.0}}, 0.5);
  ann.geometry = BinGeometry::Annulus;
  EXPECT_NEAR(bin_measure(ann, 0), kPi * (3.5 * 3.5 - 2.5 * 2.5), 1e-10);
  BinSpec strip = disk({{0.0, 0.5}}, 2.0);
  strip.geometry = BinGeometry::Strip;
  strip.im_half_height = 0.25;
  EXPECT_NEAR(bin_measure(strip, 0), 4.0 * 0.5, 1e-12);
  strip.centers = {{0.0, 0.1}};
  strip.upper_half_only = true;
  EXPECT_NEAR(bin_measure(strip, 0), 4.0 * 0.35, 1e-12);
}

TEST(BinAveragedRatio, ConstantAndLinear) {
  const auto spec = disk({{1.0, 2.0}}, 0.5);
  EXPECT_NEAR(bin_averaged_ratio(spec, 0, [](ComplexPoint) { return 6.0; },
                                 [](ComplexPoint) { return 2.0; }),
              3.0, 1e-13);
  // A linear numerator averages to its centre value over a disk.
  EXPECT_NEAR(bin_averaged_ratio(spec, 0, [](ComplexPoint z) { return z.re + 3.0 * z.im; },
                                 [](ComplexPoint) { return 1.0; }),
              7.0, 1e-12);
}

TEST(DensityHistogram, GinueBulkIsUniform) {
  EnsembleConfig c;
  c.kind = EnsembleKind::GinUE;
  c.n = 100;
  c.samples = 400;
  c.master_seed = 31;
  const auto [recs, summary] = collect_campaign(c);
  const double r = 0.3 * 10.0;
  const auto spec = disk({{r / kSqrt2, r / kSqrt2}}, 1.0);
  const auto h = density_histogram(recs, spec, summary.accepted);
  EXPECT_LE(std::abs(h.bins[0].mean - 1.0 / kPi), 3.0 * h.bins[0].std_error);
  // Annuli tiling [0, 20] hold every eigenvalue.
  BinSpec tiles;
  tiles.geometry = BinGeometry::Annulus;
  tiles.window = 1.0;
  for (int k = 0; k < 10; ++k) tiles.centers.push_back({1.0 + 2.0 * k, 0.0});
  const auto t = density_histogram(recs, tiles, summary.accepted);
  double total = 0.0;
  for (std::size_t b = 0; b < t.bins.size(); ++b) {
    total += t.bins[b].mean * bin_measure(tiles, b);
  }
  EXPECT_NEAR(total, 100.0, 1e-9);
}

TEST(DensityHistogram, GinoeComplexDensityVanishesAtAxis) {
  EnsembleConfig c;
  c.n = 60;
  c.samples = 400;
  c.master_seed = 32;
  const auto [recs, summary] = collect_campaign(c);
  std::vector<double> dens;
  for (double h : {0.4, 0.1, 0.02}) {
    BinSpec s;
    s.centers = {{0.0, 0.0}};
    s.geometry = BinGeometry::Strip;
    s.window = 3.0;
    s.im_half_height = h;
    dens.push_back(density_histogram(recs, s, summary.accepted).bins[0].mean);
  }
  EXPECT_GT(dens[0], dens[1]);
  EXPECT_GT(dens[1], dens[2]);
  EXPECT_LT(dens[2], 0.1 / kPi);
  EXPECT_THROW(density_histogram(recs, disk({{0.0, 0.0}}, 1.0), 0), DomainError);
}

TEST(OverlapHistogram, PointMassForNormalInput) {
  const std::vector<double> ones(50, 1.0);
  const auto h = overlap_histogram(ones, OverlapScaling::BulkS, 10, ValueGrid::linear(0.0, 1.0, 10));
  EXPECT_EQ(h.counts[0], 50);
  EXPECT_NEAR(h.mass(), 1.0, 1e-14);
  EXPECT_THROW(overlap_histogram({}, OverlapScaling::Raw, 10, ValueGrid::linear(0.0, 1.0, 4)),
               DomainError);
}

TEST(OverlapHistogram, ScalingsAndOverflow) {
  EXPECT_EQ(scale_overlap(5.0, OverlapScaling::Raw, 4), 5.0);
  EXPECT_EQ(scale_overlap(5.0, OverlapScaling::BulkS, 4), 1.0);
  EXPECT_EQ(scale_overlap(5.0, OverlapScaling::EdgeSigma, 4), 2.0);
  const auto h = overlap_histogram({1.0, 2.0, 100.0}, OverlapScaling::Raw, 1,
                                   ValueGrid::linear(1.5, 10.0, 5));
  EXPECT_EQ(h.underflow, 1);
  EXPECT_EQ(h.overflow, 1);
  EXPECT_NEAR(h.in_grid_fraction(), 1.0 / 3.0, 1e-15);
}

TEST(Compare, ZeroAndShiftedTheory) {
  BinnedSeries s;
  for (int k = 0; k < 4; ++k) {
    BinStat b;
    b.center = {static_cast<double>(k), 1.0};
    b.count = 5000;
    b.mean = 2.0 + k;
    b.std_error = 0.1 * (k + 1);
    b.low_statistics = false;
    s.bins.push_back(b);
  }
  const auto exact = compare(s, [](std::size_t, const BinStat& b) { return b.mean; });
  for (const auto& r : exact.rows) EXPECT_EQ(r.z_score, 0.0);
  EXPECT_EQ(exact.fraction_within_3se, 1.0);
  const auto shifted =
      compare(s, [](std::size_t, const BinStat& b) { return b.mean + 10.0 * b.std_error; });
  for (const auto& r : shifted.rows) EXPECT_NEAR(std::abs(r.z_score), 10.0, 1e-12);
  EXPECT_EQ(shifted.fraction_within_3se, 0.0);
  EXPECT_NEAR(shifted.max_abs_z, 10.0, 1e-12);
}

TEST(TailSlope, PowerLawQuantiles) {
  // Quantiles of the density 2 v^{-3} on v >= 1.
  std::vector<double> v;
  const int m = 400000;
  for (int i = 0; i < m; ++i) v.push_back(1.0 / std::sqrt(1.0 - (i + 0.5) / m));
  const auto h = overlap_histogram(v, OverlapScaling::Raw, 1, ValueGrid::logarithmic(2.0, 50.0, 14));
  const auto fit = tail_slope(h, 2.0, 50.0);
  EXPECT_NEAR(fit.slope, -3.0, 0.02);
  EXPECT_GE(fit.bins_used, 10u);
  EXPECT_THROW(tail_slope(h, 2.0, 4.0), DomainError);
}

TEST(KsDistance, KnownValues) {
  EXPECT_NEAR(ks_distance({0.5}, [](double u) { return u; }), 0.5, 1e-15);
  std::vector<double> q;
  for (int i = 0; i < 100; ++i) q.push_back((i + 0.5) / 100.0);
  EXPECT_NEAR(ks_distance(q, [](double u) { return u; }), 0.005, 1e-14);
  EXPECT_THROW(ks_distance({}, [](double u) { return u; }), DomainError);
}

}  // namespace
}  // namespace ginibre
