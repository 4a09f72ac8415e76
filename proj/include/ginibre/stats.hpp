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
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "ginibre/errors.hpp"
#include "ginibre/quadrature.hpp"
#include "ginibre/specfun.hpp"
#include "ginibre/types.hpp"

// Estimators over record streams: binned conditional means, densities,
// overlap histograms, tail fits and theory comparisons.
namespace ginibre {

enum class BinGeometry { Disk, Annulus, Strip };

// Spatial bins. Geometry per bin centre c:
//   Disk     |z - c| <= window
//   Annulus  ||z| - c.re| <= window              (c.re is the radius)
//   Strip    |Re z - c.re| <= window, |Im z - c.im| <= im_half_height
// Filters apply to every bin.
struct BinSpec {
  std::vector<ComplexPoint> centers;
  double window = 1.0;
  BinGeometry geometry = BinGeometry::Disk;
  double im_half_height = std::numeric_limits<double>::infinity();
  double min_abs_im = 0.0;        // keep |Im z| >= min_abs_im
  double min_im_over_abs = -1.0;  // keep Im z >= f |z| when f > -1 (annulus sectors)
  bool upper_half_only = false;   // keep Im z >= 0
  bool include_real = false;      // keep records classified as real
  std::int64_t min_count = 1000;

  void validate() const {
    if (centers.empty()) throw DomainError("BinSpec: no bin centres");
    if (!(window > 0.0) || !std::isfinite(window)) {
      throw DomainError("BinSpec: window must be finite and > 0");
    }
    if (!(im_half_height > 0.0)) throw DomainError("BinSpec: im_half_height must be > 0");
    if (!(min_abs_im >= 0.0)) throw DomainError("BinSpec: min_abs_im must be >= 0");
    if (min_im_over_abs >= 1.0) throw DomainError("BinSpec: min_im_over_abs must be < 1");
    if (geometry == BinGeometry::Annulus) {
      for (const auto& c : centers) {
        if (!(c.re >= 0.0)) throw DomainError("BinSpec: annulus radius must be >= 0");
      }
      if (min_abs_im > 0.0) {
        throw DomainError("BinSpec: min_abs_im is not supported for annulus bins");
      }
      if (min_im_over_abs > -1.0 && min_im_over_abs < 0.0) {
        throw DomainError("BinSpec: annulus sectors need min_im_over_abs >= 0");
      }
    }
    for (const auto& c : centers) require_finite(c, "BinSpec");
  }

  bool passes_filters(const SpectralDatum& d) const {
    if (d.is_real && !include_real) return false;
    if (upper_half_only && d.z.im < 0.0 && !d.is_real) return false;
    if (std::abs(d.z.im) < min_abs_im) return false;
    if (min_im_over_abs > -1.0 && d.z.im < min_im_over_abs * d.z.abs()) return false;
    return true;
  }

  bool in_geometry(std::size_t bin, ComplexPoint z) const {
    const ComplexPoint& c = centers[bin];
    switch (geometry) {
      case BinGeometry::Disk:
        return std::hypot(z.re - c.re, z.im - c.im) <= window;
      case BinGeometry::Annulus:
        return std::abs(z.abs() - c.re) <= window;
      case BinGeometry::Strip:
        return std::abs(z.re - c.re) <= window && std::abs(z.im - c.im) <= im_half_height;
    }
    return false;
  }

  bool contains(std::size_t bin, const SpectralDatum& d) const {
    return passes_filters(d) && in_geometry(bin, d.z);
  }
};

// Mergeable running moments (Welford update, Chan merge).
struct Accumulator {
  std::int64_t count = 0;
  double mean = 0.0;
  double m2 = 0.0;

  void add(double x) {
    ++count;
    const double d = x - mean;
    mean += d / static_cast<double>(count);
    m2 += d * (x - mean);
  }

  void merge(const Accumulator& o) {
    if (o.count == 0) return;
    if (count == 0) {
      *this = o;
      return;
    }
    const double n1 = static_cast<double>(count), n2 = static_cast<double>(o.count);
    const double d = o.mean - mean;
    const double n = n1 + n2;
    mean += d * n2 / n;
    m2 += o.m2 + d * d * n1 * n2 / n;
    count += o.count;
  }

  double variance() const {
    return count > 1 ? m2 / static_cast<double>(count - 1) : 0.0;
  }

  // Sample standard deviation over sqrt(count); NaN below two entries.
  double std_error() const {
    if (count < 2) return std::numeric_limits<double>::quiet_NaN();
    return std::sqrt(variance() / static_cast<double>(count));
  }
};

struct BinStat {
  ComplexPoint center;
  std::int64_t count = 0;
  double mean = std::numeric_limits<double>::quiet_NaN();
  double std_error = std::numeric_limits<double>::quiet_NaN();
  bool low_statistics = true;
};

struct BinnedSeries {
  std::vector<BinStat> bins;
};

// Streaming form of conditional_mean_series; usable directly as a campaign
// sink and mergeable across partitions.
class BinnedAccumulator {
 public:
  explicit BinnedAccumulator(BinSpec spec) : spec_(std::move(spec)) {
    spec_.validate();
    acc_.resize(spec_.centers.size());
  }

  void add(const SpectralDatum& d) {
    if (!spec_.passes_filters(d)) return;
    for (std::size_t b = 0; b < acc_.size(); ++b) {
      if (spec_.in_geometry(b, d.z)) acc_[b].add(d.self_overlap);
    }
  }

  void add(const std::vector<SpectralDatum>& records) {
    for (const auto& d : records) add(d);
  }

  void merge(const BinnedAccumulator& o) {
    if (o.acc_.size() != acc_.size()) {
      throw DomainError("BinnedAccumulator::merge: bin layouts differ");
    }
    for (std::size_t b = 0; b < acc_.size(); ++b) acc_[b].merge(o.acc_[b]);
  }

  const BinSpec& spec() const { return spec_; }
  const std::vector<Accumulator>& accumulators() const { return acc_; }

  BinnedSeries series() const {
    BinnedSeries s;
    s.bins.resize(acc_.size());
    for (std::size_t b = 0; b < acc_.size(); ++b) {
      BinStat& st = s.bins[b];
      st.center = spec_.centers[b];
      st.count = acc_[b].count;
      if (st.count > 0) st.mean = acc_[b].mean;
      st.std_error = acc_[b].std_error();
      st.low_statistics = st.count < spec_.min_count;
    }
    return s;
  }

 private:
  BinSpec spec_;
  std::vector<Accumulator> acc_;
};

inline BinnedSeries conditional_mean_series(const std::vector<SpectralDatum>& records,
                                            const BinSpec& spec) {
  if (records.empty()) throw DomainError("conditional_mean_series: no records");
  BinnedAccumulator acc(spec);
  acc.add(records);
  return acc.series();
}

namespace detail {

// Parts of [lo, hi] allowed by the Im-based filters of a spec.
inline std::vector<std::pair<double, double>> allowed_im_intervals(const BinSpec& spec,
                                                                  double lo, double hi) {
  std::vector<std::pair<double, double>> parts;
  auto clip = [&](double a, double b) {
    a = std::max(a, lo);
    b = std::min(b, hi);
    if (b > a) parts.emplace_back(a, b);
  };
  const double inf = std::numeric_limits<double>::infinity();
  const double lower_cut = spec.upper_half_only ? 0.0 : -inf;
  if (spec.min_abs_im > 0.0) {
    if (!spec.upper_half_only) clip(-inf, -spec.min_abs_im);
    clip(std::max(spec.min_abs_im, lower_cut), inf);
  } else {
    clip(lower_cut, inf);
  }
  return parts;
}

}  // namespace detail

// Integral of f(z) over the filtered region of one bin by tensor
// Gauss-Legendre quadrature; `order` nodes per direction and sub-interval.
inline double integrate_over_bin(const BinSpec& spec, std::size_t bin,
                                 const std::function<double(ComplexPoint)>& f,
                                 int order = 48) {
  spec.validate();
  if (bin >= spec.centers.size()) throw DomainError("integrate_over_bin: bin out of range");
  const auto [x, w] = gauss_legendre_rule(order);
  const ComplexPoint c = spec.centers[bin];
  const double r = spec.window;
  double total = 0.0;
  switch (spec.geometry) {
    case BinGeometry::Disk: {
      // y = c.im + r sin(phi), chord half-width r cos(phi).
      for (const auto& [ylo, yhi] :
           detail::allowed_im_intervals(spec, c.im - r, c.im + r)) {
        const double plo = std::asin(std::clamp((ylo - c.im) / r, -1.0, 1.0));
        const double phi_hi = std::asin(std::clamp((yhi - c.im) / r, -1.0, 1.0));
        const double pm = 0.5 * (plo + phi_hi), ph = 0.5 * (phi_hi - plo);
        for (int i = 0; i < order; ++i) {
          const double phi = pm + ph * x[i];
          const double y = c.im + r * std::sin(phi);
          const double half = r * std::cos(phi);
          double inner = 0.0;
          for (int j = 0; j < order; ++j) {
            inner += w[j] * f({c.re + half * x[j], y});
          }
          total += w[i] * ph * r * std::cos(phi) * half * inner;
        }
      }
      break;
    }
    case BinGeometry::Annulus: {
      double t0 = spec.upper_half_only ? 0.0 : -kPi;
      double t1 = kPi;
      if (spec.min_im_over_abs > -1.0) {
        const double a = std::asin(spec.min_im_over_abs);
        t0 = std::max(t0, a);
        t1 = kPi - a;
      }
      const double rlo = std::max(0.0, c.re - r), rhi = c.re + r;
      const double rm = 0.5 * (rlo + rhi), rh = 0.5 * (rhi - rlo);
      const double tm = 0.5 * (t0 + t1), th = 0.5 * (t1 - t0);
      for (int i = 0; i < order; ++i) {
        const double rad = rm + rh * x[i];
        double inner = 0.0;
        for (int j = 0; j < order; ++j) {
          const double t = tm + th * x[j];
          inner += w[j] * f({rad * std::cos(t), rad * std::sin(t)});
        }
        total += w[i] * rh * rad * th * inner;
      }
      break;
    }
    case BinGeometry::Strip: {
      if (!std::isfinite(spec.im_half_height)) {
        throw DomainError("integrate_over_bin: strip needs a finite im_half_height");
      }
      const double xm = c.re, xh = r;
      for (const auto& [ylo, yhi] : detail::allowed_im_intervals(
               spec, c.im - spec.im_half_height, c.im + spec.im_half_height)) {
        const double ym = 0.5 * (ylo + yhi), yh = 0.5 * (yhi - ylo);
        for (int i = 0; i < order; ++i) {
          double inner = 0.0;
          for (int j = 0; j < order; ++j) inner += w[j] * f({xm + xh * x[j], ym + yh * x[i]});
          total += w[i] * yh * xh * inner;
        }
      }
      break;
    }
  }
  return total;
}

// Area of the filtered region of one bin.
inline double bin_measure(const BinSpec& spec, std::size_t bin) {
  return integrate_over_bin(spec, bin, [](ComplexPoint) { return 1.0; });
}

// Bin-averaged conditional mean int O / int rho, the quantity a finite-width
// bin actually estimates.
inline double bin_averaged_ratio(const BinSpec& spec, std::size_t bin,
                                 const std::function<double(ComplexPoint)>& numerator,
                                 const std::function<double(ComplexPoint)>& denominator,
                                 int order = 48) {
  const double num = integrate_over_bin(spec, bin, numerator, order);
  const double den = integrate_over_bin(spec, bin, denominator, order);
  if (!(den > 0.0)) throw DomainError("bin_averaged_ratio: density integrates to zero");
  return num / den;
}

// Number of records per sample and unit area; std_error from Poisson counts.
inline BinnedSeries density_histogram(const std::vector<SpectralDatum>& records,
                                      const BinSpec& spec, std::int64_t samples) {
  spec.validate();
  if (samples < 1) throw DomainError("density_histogram: samples must be >= 1");
  BinnedSeries s;
  s.bins.resize(spec.centers.size());
  for (std::size_t b = 0; b < spec.centers.size(); ++b) {
    const double area = bin_measure(spec, b);
    if (!(area > 0.0)) throw DomainError("density_histogram: bin has zero measure");
    std::int64_t count = 0;
    for (const auto& d : records) count += spec.contains(b, d) ? 1 : 0;
    const double norm = static_cast<double>(samples) * area;
    BinStat& st = s.bins[b];
    st.center = spec.centers[b];
    st.count = count;
    st.mean = static_cast<double>(count) / norm;
    st.std_error = std::sqrt(static_cast<double>(count)) / norm;
    st.low_statistics = count < spec.min_count;
  }
  return s;
}

enum class OverlapScaling { Raw, BulkS, EdgeSigma };

inline double scale_overlap(double o, OverlapScaling scaling, int n) {
  switch (scaling) {
    case OverlapScaling::Raw:
      return o;
    case OverlapScaling::BulkS:
      return (o - 1.0) / n;
    case OverlapScaling::EdgeSigma:
      return (o - 1.0) / std::sqrt(static_cast<double>(n));
  }
  return o;
}

// Bin edges for histograms.
struct ValueGrid {
  std::vector<double> edges;

  static ValueGrid linear(double lo, double hi, int bins) {
    if (!(hi > lo) || bins < 1) throw DomainError("ValueGrid::linear: bad range");
    ValueGrid g;
    g.edges.resize(bins + 1);
    for (int i = 0; i <= bins; ++i) g.edges[i] = lo + (hi - lo) * i / bins;
    return g;
  }

  static ValueGrid logarithmic(double lo, double hi, int bins) {
    if (!(lo > 0.0) || !(hi > lo) || bins < 1) {
      throw DomainError("ValueGrid::logarithmic: bad range");
    }
    ValueGrid g;
    g.edges.resize(bins + 1);
    const double a = std::log(lo), b = std::log(hi);
    for (int i = 0; i <= bins; ++i) g.edges[i] = std::exp(a + (b - a) * i / bins);
    g.edges.front() = lo;
    g.edges.back() = hi;
    return g;
  }

  bool is_log() const {
    if (edges.size() < 3 || edges.front() <= 0.0) return false;
    const double r1 = edges[1] / edges[0], r2 = edges[2] / edges[1];
    return std::abs(r1 - r2) < 1e-9 * r1 && std::abs(r1 - 1.0) > 1e-9;
  }
};

struct Histogram {
  std::vector<double> edges;
  std::vector<std::int64_t> counts;
  std::vector<double> density;  // unit mass over the grid
  std::int64_t total = 0;       // all selected values
  std::int64_t underflow = 0;
  std::int64_t overflow = 0;
  bool log_bins = false;

  std::size_t bins() const { return counts.size(); }
  double width(std::size_t i) const { return edges[i + 1] - edges[i]; }
  // Geometric centre for logarithmic bins, arithmetic otherwise.
  double center(std::size_t i) const {
    return log_bins ? std::sqrt(edges[i] * edges[i + 1]) : 0.5 * (edges[i] + edges[i + 1]);
  }
  double in_grid_fraction() const {
    return total > 0 ? static_cast<double>(total - underflow - overflow) / total : 0.0;
  }
  double mass() const {
    double m = 0.0;
    for (std::size_t i = 0; i < bins(); ++i) m += density[i] * width(i);
    return m;
  }
};

// Histogram of transformed self-overlaps; values outside the grid are counted
// as under- or overflow and excluded from the normalization.
inline Histogram overlap_histogram(const std::vector<double>& overlaps,
                                   OverlapScaling scaling, int n, const ValueGrid& grid) {
  if (overlaps.empty()) throw DomainError("overlap_histogram: empty selection");
  if (grid.edges.size() < 2) throw DomainError("overlap_histogram: grid needs >= 2 edges");
  if (n < 1) throw DomainError("overlap_histogram: n must be >= 1");
  Histogram h;
  h.edges = grid.edges;
  h.log_bins = grid.is_log();
  h.counts.assign(grid.edges.size() - 1, 0);
  for (double o : overlaps) {
    const double v = scale_overlap(o, scaling, n);
    ++h.total;
    if (v < h.edges.front()) {
      ++h.underflow;
      continue;
    }
    if (v > h.edges.back()) {
      ++h.overflow;
      continue;
    }
    auto it = std::upper_bound(h.edges.begin(), h.edges.end(), v);
    std::size_t i = static_cast<std::size_t>(it - h.edges.begin());
    i = i == 0 ? 0 : i - 1;
    if (i >= h.counts.size()) i = h.counts.size() - 1;
    ++h.counts[i];
  }
  const std::int64_t in_grid = h.total - h.underflow - h.overflow;
  h.density.assign(h.counts.size(), 0.0);
  if (in_grid > 0) {
    for (std::size_t i = 0; i < h.counts.size(); ++i) {
      h.density[i] = static_cast<double>(h.counts[i]) / (static_cast<double>(in_grid) * h.width(i));
    }
  }
  return h;
}

struct ComparisonRow {
  ComplexPoint center;
  std::int64_t count = 0;
  double theory = 0.0;
  double empirical = 0.0;
  double std_error = 0.0;
  double z_score = 0.0;
  double relative_error = 0.0;
  bool well_populated = false;
};

struct ComparisonReport {
  std::vector<ComparisonRow> rows;
  double max_abs_z = 0.0;
  double fraction_within_3se = 0.0;  // over well-populated bins
  std::size_t well_populated = 0;
};

// z = (empirical - theory) / std_error; a zero std_error gives z = 0 when the
// difference vanishes and +-inf otherwise.
inline double z_score(double empirical, double theory, double se) {
  const double diff = empirical - theory;
  if (se > 0.0) return diff / se;
  if (diff == 0.0) return 0.0;
  return diff > 0.0 ? std::numeric_limits<double>::infinity()
                    : -std::numeric_limits<double>::infinity();
}

inline ComparisonReport compare(
    const BinnedSeries& series,
    const std::function<double(std::size_t, const BinStat&)>& theory_curve) {
  ComparisonReport rep;
  std::size_t within = 0;
  for (std::size_t b = 0; b < series.bins.size(); ++b) {
    const BinStat& st = series.bins[b];
    ComparisonRow row;
    row.center = st.center;
    row.count = st.count;
    row.theory = theory_curve(b, st);
    row.empirical = st.mean;
    row.std_error = st.std_error;
    row.well_populated = !st.low_statistics && st.count > 1;
    row.z_score = z_score(st.mean, row.theory, st.std_error);
    row.relative_error = (st.mean - row.theory) / row.theory;
    if (row.well_populated) {
      ++rep.well_populated;
      rep.max_abs_z = std::max(rep.max_abs_z, std::abs(row.z_score));
      if (std::abs(row.z_score) <= 3.0) ++within;
    }
    rep.rows.push_back(row);
  }
  rep.fraction_within_3se =
      rep.well_populated > 0 ? static_cast<double>(within) / rep.well_populated : 0.0;
  return rep;
}

struct SlopeFit {
  double slope = 0.0;
  double std_error = 0.0;
  double intercept = 0.0;
  std::size_t bins_used = 0;
};

// Least-squares slope of log(density) against log(centre) over populated bins
// whose centres lie in [lo, hi].
inline SlopeFit tail_slope(const Histogram& h, double lo, double hi) {
  std::vector<double> xs, ys;
  for (std::size_t i = 0; i < h.bins(); ++i) {
    const double c = h.center(i);
    if (c < lo || c > hi || h.counts[i] == 0 || !(c > 0.0)) continue;
    xs.push_back(std::log(c));
    ys.push_back(std::log(h.density[i]));
  }
  if (xs.size() < 10) {
    throw DomainError("tail_slope: fewer than 10 populated bins in the fit range");
  }
  const double n = static_cast<double>(xs.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
  }
  SlopeFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  double rss = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double r = ys[i] - (f.intercept + f.slope * xs[i]);
    rss += r * r;
  }
  f.std_error = std::sqrt(rss / (n - 2.0) / sxx);
  f.bins_used = xs.size();
  return f;
}

// Kolmogorov-Smirnov sup-distance between the empirical distribution of
// `values` and `cdf`.
inline double ks_distance(std::vector<double> values,
                          const std::function<double(double)>& cdf) {
  if (values.empty()) throw DomainError("ks_distance: empty sample");
  std::sort(values.begin(), values.end());
  const double n = static_cast<double>(values.size());
  double d = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double f = cdf(values[i]);
    d = std::max({d, (i + 1) / n - f, f - i / n});
  }
  return d;
}

}  // namespace ginibre
