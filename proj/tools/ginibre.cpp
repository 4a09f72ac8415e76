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

// ginibre: sampling campaigns, theory curves, figure data and verification.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iostream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "ginibre/distributions.hpp"
#include "ginibre/io.hpp"
#include "ginibre/mc.hpp"
#include "ginibre/stats.hpp"
#include "ginibre/theory.hpp"
#include "ginibre/verify.hpp"

namespace fs = std::filesystem;
using namespace ginibre;

namespace {

enum ExitCode { kOk = 0, kUsage = 1, kIo = 2, kVerify = 3 };

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

const double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string fmt(double x) { return verify::fmt(x); }

// Evaluates f, mapping domain errors to NaN (e.g. points on the real axis).
double guarded(const std::function<double()>& f) {
  try {
    return f();
  } catch (const DomainError&) {
    return kNaN;
  }
}

std::vector<double> linspace(double lo, double hi, int count) {
  if (count < 2) throw UsageError("grid needs at least 2 points");
  std::vector<double> v(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) v[i] = lo + (hi - lo) * i / (count - 1);
  return v;
}

// Echo of the resolved options of the active subcommand; `ginibre --config
// <file>` re-runs it.
void write_config(const CLI::App& sub, const fs::path& path) {
  std::istringstream in(sub.config_to_str(true, false));
  std::string text = "[" + sub.get_name() + "]\n";
  for (std::string line; std::getline(in, line);) {
    // Unset optional and list options come out as empty strings.
    if (line.size() >= 3 && line.compare(line.size() - 3, 3, "=\"\"") == 0) continue;
    text += line + "\n";
  }
  write_text_file(path, text);
}

fs::path sidecar(const fs::path& out) { return fs::path(out.string() + ".config.toml"); }

void warn_rejections(const CampaignSummary& s) {
  if (s.rejection_warning) {
    std::cerr << "warning: " << s.rejected << " of " << s.config.samples
              << " matrices rejected (ill-conditioned eigenvector matrix)\n";
  }
}

// ------------------------------------------------------------------ sample

struct SampleArgs {
  std::string ensemble;
  int n = 0;
  std::int64_t samples = 0;
  std::uint64_t seed = 0;
  std::string out;
  double reject_threshold = 1e12;
};

int run_sample(const SampleArgs& a, const CLI::App& app) {
  EnsembleConfig cfg;
  cfg.kind = parse_ensemble(a.ensemble);
  cfg.n = a.n;
  cfg.samples = a.samples;
  cfg.master_seed = a.seed;
  cfg.reject_threshold = a.reject_threshold;
  RecordWriter writer(a.out);
  const auto summary = run_campaign(
      cfg, [&](const std::vector<SpectralDatum>& d) { writer.append(d); },
      campaign_options_from_env());
  writer.finish(header_for(summary));
  write_config(app, sidecar(a.out));
  warn_rejections(summary);
  std::cerr << "wrote " << summary.records << " records from " << summary.accepted
            << " matrices to " << a.out << "\n";
  return kOk;
}

// ------------------------------------------------------------------ theory

struct TheoryArgs {
  std::string ensemble = "ginoe";
  int n = 50;
  std::string region = "finite";
  std::string quantity = "conditional_mean";
  std::vector<double> grid{0.1, 5.0, 50};
  std::string line = "imag";
  double offset = 0.0;
  double param = 0.0;
  std::optional<double> delta;
  std::string out;
};

struct Curve {
  std::string abscissa;
  std::string formula;
  std::function<double(double)> f;
};

Curve theory_curve(const TheoryArgs& a) {
  const EnsembleKind kind = parse_ensemble(a.ensemble);
  const int n = a.n;
  const bool imag = a.line == "imag";
  auto point = [&, imag](double t) {
    return imag ? ComplexPoint{a.offset, t} : ComplexPoint{t, a.offset};
  };
  const std::string path = imag ? "Im" : "Re";
  const std::string q = a.quantity;
  const std::string kname(to_string(kind));

  if (a.region == "finite") {
    if (q == "density") {
      return {path + " z", kname + "_density_finite_n",
              [=](double t) { return density(kind, n, point(t)); }};
    }
    if (q == "overlap") {
      return {path + " z", kname + "_mean_self_overlap_finite_n",
              [=](double t) { return guarded([&] { return overlap(kind, n, point(t)); }); }};
    }
    if (q == "conditional_mean") {
      return {path + " z", kname + "_conditional_mean_finite_n", [=](double t) {
                return guarded([&] { return conditional_mean(n, point(t), kind); });
              }};
    }
    if (q == "pdf") {
      if (kind != EnsembleKind::GinUE) {
        throw UsageError("finite-N joint density of (O, z) is available for ginue only");
      }
      const ComplexPoint z{a.param, 0.0};
      return {"O", "ginue_joint_density_finite_n", [=](double o) {
                return guarded([&] { return jpdf_ginue_finite(n, o, z) / density_ginue(n, z); });
              }};
    }
  } else if (a.region == "bulk") {
    auto w = [&, imag](double t) { return imag ? ComplexPoint{a.offset, t} : ComplexPoint{t, a.offset}; };
    if (q == "density") {
      return {path + " w", "density_bulk_limit", [=](double t) {
                RegimeCoordinates c;
                c.w = w(t);
                return density_limit(Regime::Bulk, c, kind);
              }};
    }
    if (q == "overlap") {
      return {path + " w", "mean_self_overlap_bulk_limit",
              [=](double t) { return overlap_limit_bulk(w(t)); }};
    }
    if (q == "conditional_mean") {
      return {path + " w", "conditional_mean_bulk_limit", [=](double t) {
                const ComplexPoint p = w(t);
                return p.abs2() < 1.0 ? 1.0 - p.abs2() : kNaN;
              }};
    }
    if (q == "pdf") {
      const double wa = a.param;
      return {"s", "ginue_bulk_normalized_pdf", [=](double s) {
                return guarded([&] { return normalized_pdf(LimitKind::BulkGinUE, s, wa); });
              }};
    }
    if (q == "cdf") {
      const double wa = a.param;
      return {"s", "ginue_bulk_cdf", [=](double s) {
                return guarded([&] { return normalized_cdf_bulk(s, wa); });
              }};
    }
  } else if (a.region == "edge") {
    if (q == "density") {
      return {"eta", "density_edge_limit", [=](double eta) {
                RegimeCoordinates c;
                c.eta = eta;
                return density_limit(Regime::Edge, c, kind);
              }};
    }
    if (q == "overlap") {
      return {"eta", "mean_self_overlap_edge_limit", [](double eta) { return overlap_limit_edge(eta); }};
    }
    if (q == "conditional_mean") {
      return {"eta", "conditional_mean_edge_limit", [](double eta) {
                return overlap_limit_edge(eta) / (ginibre::erfc(kSqrt2 * eta) / (2.0 * kPi));
              }};
    }
    if (q == "pdf") {
      const double eta = a.param;
      return {"sigma", "ginue_edge_normalized_pdf", [=](double s) {
                return guarded([&] { return normalized_pdf(LimitKind::EdgeGinUE, s, eta); });
              }};
    }
  } else if (a.region == "depletion") {
    if (kind != EnsembleKind::GinOE) {
      throw UsageError("the depletion regime exists only for ginoe");
    }
    const std::optional<double> delta = a.delta;
    auto coords = [delta](double xi) {
      RegimeCoordinates c;
      c.xi = xi;
      c.delta_strip = delta;
      return c;
    };
    if (q == "density") {
      return {"xi", "ginoe_density_depletion_limit", [=](double xi) {
                return density_limit(Regime::Depletion, coords(xi), EnsembleKind::GinOE);
              }};
    }
    if (q == "overlap") {
      return {"xi", "ginoe_mean_self_overlap_depletion_limit", [=](double xi) {
                return guarded([&] { return overlap_limit_depletion(xi, delta); });
              }};
    }
    if (q == "conditional_mean") {
      return {"xi", "ginoe_conditional_mean_depletion_limit", [=](double xi) {
                return guarded([&] {
                  return overlap_limit_depletion(xi, delta) /
                         density_limit(Regime::Depletion, coords(xi), EnsembleKind::GinOE);
                });
              }};
    }
  } else if (a.region == "realbulk") {
    if (kind != EnsembleKind::GinOE) {
      throw UsageError("real eigenvalues exist only for ginoe");
    }
    const double x = a.param;
    if (q == "pdf") {
      return {"s", "ginoe_real_bulk_normalized_pdf", [=](double s) {
                return guarded([&] { return normalized_pdf(LimitKind::RealBulkGinOE, s, x); });
              }};
    }
    if (q == "cdf") {
      return {"s", "ginoe_real_bulk_cdf",
              [=](double s) { return guarded([&] { return normalized_cdf_realbulk(s, x); }); }};
    }
  }
  throw UsageError("quantity '" + q + "' is not available in region '" + a.region + "'");
}

int run_theory(const TheoryArgs& a, const CLI::App& app) {
  if (a.grid.size() != 3 || a.grid[2] < 2 || a.grid[2] != std::floor(a.grid[2])) {
    throw UsageError("--grid expects lo,hi,count with an integer count >= 2");
  }
  const Curve c = theory_curve(a);
  CsvWriter csv(a.out,
                {{"formula", c.formula},
                 {"ensemble", a.ensemble},
                 {"n", std::to_string(a.n)},
                 {"region", a.region},
                 {"quantity", a.quantity},
                 {"line", a.line + " (offset " + fmt(a.offset) + ")"},
                 {"param", fmt(a.param)}},
                {c.abscissa, a.quantity});
  for (double t : linspace(a.grid[0], a.grid[1], static_cast<int>(a.grid[2]))) {
    csv.row({t, c.f(t)});
  }
  csv.close();
  write_config(app, sidecar(a.out));
  return kOk;
}

// ------------------------------------------------------------------ figure

struct FigureArgs {
  std::string id;
  std::vector<std::string> records;
  std::vector<std::string> ensembles;
  std::vector<int> n;
  std::int64_t samples = 0;  // 0: preset
  std::uint64_t seed = 1;
  std::optional<double> window;
  std::string out;
};

// Records of one (ensemble, N) campaign, loaded or freshly sampled.
struct Source {
  EnsembleKind kind;
  int n;
  std::int64_t matrices = 0;
  std::string origin;
  std::vector<SpectralDatum> rows;
};

std::int64_t preset_samples(const std::string& id, int n) {
  if (id == "fig3") return std::max<std::int64_t>(1000, 200000 / n);
  return std::max<std::int64_t>(100, 100000 / n);
}

std::vector<int> preset_sizes(const std::string& id) {
  if (id == "fig3") return {8, 20, 50};
  return {250};
}

std::vector<EnsembleKind> preset_kinds(const std::string& id) {
  if (id == "fig6" || id == "fig7") return {EnsembleKind::GinOE};
  return {EnsembleKind::GinOE, EnsembleKind::GinUE};
}

std::vector<Source> figure_sources(const FigureArgs& a) {
  std::vector<EnsembleKind> kinds;
  for (const auto& e : a.ensembles) kinds.push_back(parse_ensemble(e));
  const auto allowed = preset_kinds(a.id);
  for (auto k : kinds) {
    if (std::find(allowed.begin(), allowed.end(), k) == allowed.end()) {
      throw UsageError(a.id + " is defined for ginoe only");
    }
  }
  std::vector<Source> out;
  if (!a.records.empty()) {
    for (const auto& path : a.records) {
      RecordFile f = read_record_file(path);
      const auto& h = f.header;
      if (std::find(allowed.begin(), allowed.end(), h.kind) == allowed.end()) {
        throw UsageError("record file " + path + " holds " + std::string(to_string(h.kind)) +
                         " data; " + a.id + " needs ginoe");
      }
      if (!kinds.empty() && std::find(kinds.begin(), kinds.end(), h.kind) == kinds.end()) {
        throw UsageError("record file " + path + " ensemble does not match --ensemble");
      }
      if (!a.n.empty() && std::find(a.n.begin(), a.n.end(), h.n) == a.n.end()) {
        throw UsageError("record file " + path + " has N=" + std::to_string(h.n) +
                         ", not among --n");
      }
      out.push_back({h.kind, h.n, h.samples, path, std::move(f.rows)});
    }
    return out;
  }
  if (kinds.empty()) kinds = allowed;
  const std::vector<int> sizes = a.n.empty() ? preset_sizes(a.id) : a.n;
  std::uint64_t seed = a.seed;
  for (int n : sizes) {
    for (auto kind : kinds) {
      EnsembleConfig cfg;
      cfg.kind = kind;
      cfg.n = n;
      cfg.samples = a.samples > 0 ? a.samples : preset_samples(a.id, n);
      cfg.master_seed = seed++;
      Source s{kind, n, 0, "sampled seed " + std::to_string(cfg.master_seed), {}};
      const auto summary = run_campaign(
          cfg, [&](const std::vector<SpectralDatum>& d) { s.rows.insert(s.rows.end(), d.begin(), d.end()); },
          campaign_options_from_env());
      warn_rejections(summary);
      s.matrices = summary.accepted;
      out.push_back(std::move(s));
    }
  }
  return out;
}

std::string tag(const Source& s) {
  return std::string(to_string(s.kind)) + "_N" + std::to_string(s.n);
}

using Meta = std::vector<std::pair<std::string, std::string>>;

Meta source_meta(const Source& s, const std::string& what, const std::string& region) {
  return {{"quantity", what},
          {"ensemble", std::string(to_string(s.kind))},
          {"n", std::to_string(s.n)},
          {"matrices", std::to_string(s.matrices)},
          {"source", s.origin},
          {"region", region}};
}

// Binned empirical series plus the bin-averaged theory, divided by `scale`.
void write_series(const fs::path& path, const Meta& meta, const std::string& abscissa,
                  const std::vector<double>& xs, const BinSpec& spec, const Source& s,
                  double scale, const std::function<double(std::size_t)>& theory) {
  const auto series = conditional_mean_series(s.rows, spec);
  CsvWriter csv(path, meta,
                {abscissa, "count", "mean", "std_error", "theory_bin_averaged", "well_populated"});
  for (std::size_t b = 0; b < series.bins.size(); ++b) {
    const auto& st = series.bins[b];
    csv.row({xs[b], static_cast<double>(st.count), st.mean / scale, st.std_error / scale,
             guarded([&] { return theory(b); }), st.low_statistics ? 0.0 : 1.0});
  }
  csv.close();
}

std::string gp_header(const std::string& id, const std::string& xlabel, const std::string& ylabel) {
  return "# gnuplot script; run from this directory: gnuplot " + id + ".gp\n"
         "set datafile separator ','\n"
         "set datafile commentschars '#'\n"
         "set key autotitle columnhead\n"
         "set terminal pngcairo size 900,600\n"
         "set output '" + id + ".png'\n"
         "set xlabel '" + xlabel + "'\n"
         "set ylabel '" + ylabel + "'\n";
}

struct FigureOutput {
  std::vector<std::string> files;
  std::string plot;
};

// Conditional mean along the imaginary axis at finite N.
FigureOutput figure3(const std::vector<Source>& sources, double window_override,
                     const fs::path& dir, bool has_window) {
  FigureOutput fo;
  std::string plot = "plot ";
  std::vector<int> sizes;
  for (const auto& s : sources) {
    const double sn = std::sqrt(static_cast<double>(s.n));
    const double window = has_window ? window_override : 1.0;
    std::vector<double> ys;
    BinSpec spec;
    for (int j = 0; j < 24; ++j) {
      const double y = sn * (j + 0.5) / 20.0;
      if (y <= window) continue;
      ys.push_back(y);
      spec.centers.push_back({0.0, y});
    }
    spec.window = window;
    spec.upper_half_only = true;
    const std::string name = "fig3_empirical_" + tag(s) + ".csv";
    write_series(dir / name,
                 source_meta(s, "conditional mean E(z) on the imaginary axis",
                             "disks |z - iy| <= " + fmt(window)),
                 "y", ys, spec, s, 1.0, [&](std::size_t b) {
                   return bin_averaged_ratio(
                       spec, b, [&](ComplexPoint z) { return overlap(s.kind, s.n, z); },
                       [&](ComplexPoint z) { return density(s.kind, s.n, z); });
                 });
    fo.files.push_back(name);
    plot += "'" + name + "' using 1:3:4 with yerrorbars title '" + tag(s) + "', ";
    if (std::find(sizes.begin(), sizes.end(), s.n) == sizes.end()) sizes.push_back(s.n);
  }
  for (int n : sizes) {
    const std::string name = "fig3_theory_N" + std::to_string(n) + ".csv";
    CsvWriter csv(dir / name,
                  {{"formula", "ginoe_conditional_mean_finite_n, ginue_conditional_mean_finite_n"},
                   {"n", std::to_string(n)},
                   {"path", "z = iy"}},
                  {"y", "ginoe", "ginue"});
    for (double y : linspace(0.02, 1.2 * std::sqrt(static_cast<double>(n)), 240)) {
      csv.row({y, guarded([&] { return conditional_mean(n, {0.0, y}, EnsembleKind::GinOE); }),
               guarded([&] { return conditional_mean(n, {0.0, y}, EnsembleKind::GinUE); })});
    }
    csv.close();
    fo.files.push_back(name);
    plot += "'" + name + "' using 1:2 with lines dt 2 title 'GinOE N=" + std::to_string(n) +
            "', '" + name + "' using 1:3 with lines title 'GinUE N=" + std::to_string(n) + "', ";
  }
  fo.plot = gp_header("fig3", "y", "E(iy)") + "set logscale y\n" + plot.substr(0, plot.size() - 2) + "\n";
  return fo;
}

// Bulk: E/N along the imaginary axis against the limiting and finite-N curves.
FigureOutput figure4(const std::vector<Source>& sources, std::optional<double> window,
                     const fs::path& dir) {
  FigureOutput fo;
  std::string plot = "plot ";
  std::vector<int> sizes;
  for (const auto& s : sources) {
    const double sn = std::sqrt(static_cast<double>(s.n));
    const double r = window.value_or(1.0);
    std::vector<double> vs;
    BinSpec spec;
    for (int j = 0; j < 24; ++j) {
      const double v = (j + 0.5) / 20.0;
      if (v * sn <= r) continue;
      vs.push_back(v);
      spec.centers.push_back({0.0, v * sn});
    }
    spec.window = r;
    spec.upper_half_only = true;
    const std::string name = "fig4_empirical_" + tag(s) + ".csv";
    write_series(dir / name,
                 source_meta(s, "E(z)/N at z = i v sqrt(N)", "disks of radius " + fmt(r)),
                 "v", vs, spec, s, s.n, [&](std::size_t b) {
                   return bin_averaged_ratio(
                              spec, b, [&](ComplexPoint z) { return overlap(s.kind, s.n, z); },
                              [&](ComplexPoint z) { return density(s.kind, s.n, z); }) /
                          s.n;
                 });
    fo.files.push_back(name);
    plot += "'" + name + "' using 1:3:4 with yerrorbars title '" + tag(s) + "', ";
    if (std::find(sizes.begin(), sizes.end(), s.n) == sizes.end()) sizes.push_back(s.n);
  }
  for (int n : sizes) {
    const std::string name = "fig4_theory_N" + std::to_string(n) + ".csv";
    const double sn = std::sqrt(static_cast<double>(n));
    CsvWriter csv(dir / name,
                  {{"formula", "conditional_mean_bulk_limit; finite-N conditional means / N"},
                   {"n", std::to_string(n)},
                   {"path", "z = i v sqrt(N)"}},
                  {"v", "bulk_limit", "ginoe_finite_n", "ginue_finite_n"});
    for (double v : linspace(0.005, 1.2, 240)) {
      const ComplexPoint z{0.0, v * sn};
      csv.row({v, v < 1.0 ? 1.0 - v * v : 0.0,
               guarded([&] { return conditional_mean(n, z, EnsembleKind::GinOE) / n; }),
               guarded([&] { return conditional_mean(n, z, EnsembleKind::GinUE) / n; })});
    }
    csv.close();
    fo.files.push_back(name);
    plot += "'" + name + "' using 1:2 with lines title 'bulk limit', '" + name +
            "' using 1:3 with lines dt 2 title 'GinOE N=" + std::to_string(n) + "', '" + name +
            "' using 1:4 with lines dt 3 title 'GinUE N=" + std::to_string(n) + "', ";
  }
  fo.plot = gp_header("fig4", "v = Im w", "E/N") + plot.substr(0, plot.size() - 2) + "\n";
  return fo;
}

// Edge: E/sqrt(N) in annuli |z| = sqrt(N) + eta.
FigureOutput figure5(const std::vector<Source>& sources, std::optional<double> window,
                     const fs::path& dir) {
  FigureOutput fo;
  std::string plot = "plot ";
  const auto etas = linspace(-3.0, 2.0, 21);
  for (const auto& s : sources) {
    const double sn = std::sqrt(static_cast<double>(s.n));
    BinSpec spec;
    for (double eta : etas) spec.centers.push_back({sn + eta, 0.0});
    spec.geometry = BinGeometry::Annulus;
    spec.window = window.value_or(1.0 / sn);
    spec.upper_half_only = true;
    if (s.kind == EnsembleKind::GinOE) spec.min_im_over_abs = 0.5;
    const std::string region =
        "annuli ||z| - sqrt(N) - eta| <= " + fmt(spec.window) +
        (s.kind == EnsembleKind::GinOE ? ", Im z >= |z|/2" : ", Im z >= 0");
    const std::string name = "fig5_empirical_" + tag(s) + ".csv";
    write_series(dir / name, source_meta(s, "E(z)/sqrt(N) at the edge", region), "eta", etas, spec,
                 s, sn, [&](std::size_t b) {
                   return bin_averaged_ratio(
                       spec, b, [&](ComplexPoint z) { return overlap_limit_edge(z.abs() - sn); },
                       [&](ComplexPoint z) { return ginibre::erfc(kSqrt2 * (z.abs() - sn)) / (2.0 * kPi); });
                 });
    fo.files.push_back(name);
    plot += "'" + name + "' using 1:3:4 with yerrorbars title '" + tag(s) + "', ";
  }
  const std::string name = "fig5_theory.csv";
  CsvWriter csv(dir / name, {{"formula", "conditional_mean_edge_limit"}}, {"eta", "edge_limit"});
  for (double eta : linspace(-3.0, 2.0, 201)) {
    csv.row({eta, overlap_limit_edge(eta) / (ginibre::erfc(kSqrt2 * eta) / (2.0 * kPi))});
  }
  csv.close();
  fo.files.push_back(name);
  plot += "'" + name + "' using 1:2 with lines title 'edge limit'";
  fo.plot = gp_header("fig5", "eta", "E/sqrt(N)") + plot + "\n";
  return fo;
}

// Depletion: E/N in thin strips above the origin.
FigureOutput figure6(const std::vector<Source>& sources, std::optional<double> window,
                     const fs::path& dir) {
  FigureOutput fo;
  std::string plot = "plot ";
  const auto xis = linspace(0.2, 5.0, 25);
  for (const auto& s : sources) {
    const double sn = std::sqrt(static_cast<double>(s.n));
    BinSpec spec;
    for (double xi : xis) spec.centers.push_back({0.0, xi});
    spec.geometry = BinGeometry::Strip;
    spec.window = window.value_or(1.0);
    spec.im_half_height = 0.5 * (xis[1] - xis[0]);
    spec.upper_half_only = true;
    const std::string region = "strips |Re z| <= " + fmt(spec.window) +
                               ", |Im z - xi| <= " + fmt(spec.im_half_height);
    const std::string name = "fig6_empirical_" + tag(s) + ".csv";
    write_series(dir / name, source_meta(s, "E(z)/N near the real axis", region), "xi", xis, spec,
                 s, s.n, [&](std::size_t b) {
                   return bin_averaged_ratio(
                       spec, b,
                       [&](ComplexPoint z) { return overlap_limit_depletion(z.im, z.re / sn); },
                       [&](ComplexPoint z) {
                         RegimeCoordinates c;
                         c.xi = z.im;
                         c.delta_strip = z.re / sn;
                         return density_limit(Regime::Depletion, c, EnsembleKind::GinOE);
                       });
                 });
    fo.files.push_back(name);
    plot += "'" + name + "' using 1:3:4 with yerrorbars title '" + tag(s) + "', ";
  }
  const std::string name = "fig6_theory.csv";
  CsvWriter csv(dir / name,
                {{"formula", "ginoe_conditional_mean_depletion_limit (delta = 0); bulk limit at w = 0"}},
                {"xi", "depletion_limit", "bulk_limit"});
  for (double xi : linspace(0.05, 5.0, 200)) {
    RegimeCoordinates c;
    c.xi = xi;
    csv.row({xi, overlap_limit_depletion(xi) / density_limit(Regime::Depletion, c, EnsembleKind::GinOE),
             1.0});
  }
  csv.close();
  fo.files.push_back(name);
  plot += "'" + name + "' using 1:2 with lines title 'depletion limit', '" + name +
          "' using 1:3 with lines dt 2 title 'bulk limit'";
  fo.plot = gp_header("fig6", "xi", "E/N") + "set logscale y\n" + plot + "\n";
  return fo;
}

// Mixture of a normalized limiting density over the spatial parameters of
// the selected records (at most `cap` of them, evenly spaced).
std::function<double(double)> mixture(LimitKind kind, const std::vector<double>& params,
                                      std::size_t cap = 2000) {
  std::vector<double> p;
  const std::size_t step = std::max<std::size_t>(1, params.size() / cap);
  for (std::size_t i = 0; i < params.size(); i += step) p.push_back(params[i]);
  return [kind, p](double s) {
    if (p.empty() || !(s > 0.0)) return kNaN;
    double acc = 0.0;
    for (double v : p) acc += normalized_pdf(kind, s, v);
    return acc / p.size();
  };
}

void write_histograms(const fs::path& dir, const std::string& stem, const Source& s,
                      const std::vector<double>& overlaps, const Meta& meta,
                      const std::vector<std::pair<std::string, std::function<double(double)>>>& curves,
                      std::vector<std::string>& files) {
  for (const bool log_grid : {false, true}) {
    const auto grid = log_grid ? ValueGrid::logarithmic(0.05, 100.0, 40) : ValueGrid::linear(0.0, 5.0, 50);
    const std::string name = stem + (log_grid ? "_log.csv" : "_linear.csv");
    std::vector<std::string> cols{"s", "density", "count"};
    for (const auto& c : curves) cols.push_back(c.first);
    Meta m = meta;
    m.push_back({"records", std::to_string(overlaps.size())});
    if (overlaps.empty()) {
      CsvWriter(dir / name, m, cols).close();
      files.push_back(name);
      continue;
    }
    const auto h = overlap_histogram(overlaps, OverlapScaling::BulkS, s.n, grid);
    m.push_back({"in_grid_fraction", fmt(h.in_grid_fraction())});
    m.push_back({"normalization", "unit mass over the in-grid records"});
    CsvWriter csv(dir / name, m, cols);
    for (std::size_t i = 0; i < h.bins(); ++i) {
      const double c = h.center(i);
      std::vector<double> row{c, h.density[i], static_cast<double>(h.counts[i])};
      for (const auto& cv : curves) row.push_back(guarded([&] { return cv.second(c); }));
      csv.row(row);
    }
    csv.close();
    files.push_back(name);
  }
}

// Distributions of s = (O-1)/N: depletion region, complex bulk, real bulk.
FigureOutput figure7(const std::vector<Source>& sources, const fs::path& dir) {
  FigureOutput fo;
  std::string plot = "set multiplot layout 1,3\nset logscale y\n";
  for (const auto& s : sources) {
    const double sn = std::sqrt(static_cast<double>(s.n));
    std::vector<double> depl, bulk, bulk_w, real, real_x;
    for (const auto& d : s.rows) {
      if (d.is_real) {
        if (std::abs(d.z.re) < 0.5 * sn) {
          real.push_back(d.self_overlap);
          real_x.push_back(d.z.re / sn);
        }
        continue;
      }
      if (d.z.im < 0.0) continue;
      const double wa = d.z.abs() / sn;
      if (wa <= 0.5 && d.z.im >= 3.0) {
        bulk.push_back(d.self_overlap);
        bulk_w.push_back(wa);
      }
      if (d.z.im <= 1.0 && std::abs(d.z.re) <= 0.5 * sn) depl.push_back(d.self_overlap);
    }
    const std::string t = tag(s);
    write_histograms(dir, "fig7_depletion_" + t, s, depl,
                     source_meta(s, "histogram of s = (O-1)/N", "0 <= Im z <= 1, |Re z| <= 0.5 sqrt(N)"),
                     {{"ginue_bulk_w0", [](double v) { return normalized_pdf(LimitKind::BulkGinUE, v, 0.0); }},
                      {"ginoe_real_bulk_x0",
                       [](double v) { return normalized_pdf(LimitKind::RealBulkGinOE, v, 0.0); }}},
                     fo.files);
    write_histograms(dir, "fig7_complex_bulk_" + t, s, bulk,
                     source_meta(s, "histogram of s = (O-1)/N", "|z| <= 0.5 sqrt(N), Im z >= 3"),
                     {{"ginue_bulk_mixture", mixture(LimitKind::BulkGinUE, bulk_w)}}, fo.files);
    write_histograms(dir, "fig7_real_bulk_" + t, s, real,
                     source_meta(s, "histogram of s = (O-1)/N, real eigenvalues", "|x| < 0.5 sqrt(N)"),
                     {{"ginoe_real_bulk_mixture", mixture(LimitKind::RealBulkGinOE, real_x)}}, fo.files);
    plot += "plot 'fig7_depletion_" + t + "_linear.csv' using 1:2 with steps title 'depletion', '' using 1:4 with lines, '' using 1:5 with lines\n";
    plot += "plot 'fig7_complex_bulk_" + t + "_linear.csv' using 1:2 with steps title 'complex bulk', '' using 1:4 with lines\n";
    plot += "plot 'fig7_real_bulk_" + t + "_linear.csv' using 1:2 with steps title 'real bulk', '' using 1:4 with lines\n";
  }
  plot += "unset multiplot\n";
  fo.plot = gp_header("fig7", "s = (O-1)/N", "density") + plot;
  return fo;
}

int run_figure(const FigureArgs& a, const CLI::App& app) {
  if (a.samples < 0) throw UsageError("--samples must be >= 1");
  if (a.window && !(*a.window > 0.0)) throw UsageError("--window must be > 0");
  for (int n : a.n) {
    if (n < 2) throw UsageError("--n must be >= 2");
  }
  const fs::path dir = a.out;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory '" + dir.string() + "': " + ec.message());
  const auto sources = figure_sources(a);
  FigureOutput fo;
  if (a.id == "fig3") {
    fo = figure3(sources, a.window.value_or(1.0), dir, a.window.has_value());
  } else if (a.id == "fig4") {
    fo = figure4(sources, a.window, dir);
  } else if (a.id == "fig5") {
    fo = figure5(sources, a.window, dir);
  } else if (a.id == "fig6") {
    fo = figure6(sources, a.window, dir);
  } else {
    fo = figure7(sources, dir);
  }
  write_text_file(dir / (a.id + ".gp"), fo.plot);
  write_config(app, dir / (a.id + ".config.toml"));
  for (const auto& f : fo.files) std::cerr << "wrote " << (dir / f).string() << "\n";
  return kOk;
}

// ------------------------------------------------------------------ verify

struct VerifyArgs {
  std::vector<std::string> suites;
  int trials = 100;
  int n = 50;
  std::int64_t samples = 2000;
  std::uint64_t seed = 20260101;
  double window = 1.0;
  double tolerance = 0.05;
  std::string out;
};

int run_verify(const VerifyArgs& a, const CLI::App& app) {
  if (a.samples < 1) throw UsageError("--samples must be >= 1");
  if (a.trials < 1) throw UsageError("--trials must be >= 1");
  if (a.n < 4) throw UsageError("--n must be >= 4 for the statistical suite");
  if (!(a.window > 0.0)) throw UsageError("--window must be > 0");
  if (!(a.tolerance > 0.0)) throw UsageError("--tolerance must be > 0");
  std::vector<std::string> suites = a.suites;
  if (suites.empty()) suites = {"specfun", "theory", "distributions", "mc"};
  nlohmann::json report;
  report["suites"] = nlohmann::json::array();
  bool ok = true;
  for (const auto& name : suites) {
    verify::SuiteReport r;
    if (name == "specfun") {
      r = verify::specfun_suite();
    } else if (name == "theory") {
      r = verify::theory_suite();
    } else if (name == "distributions") {
      r = verify::distributions_suite();
    } else if (name == "mc") {
      r = verify::mc_suite(a.trials, a.seed);
    } else {
      verify::StatisticalOptions o;
      o.n = a.n;
      o.samples = a.samples;
      o.seed = a.seed;
      o.window = a.window;
      o.rel_tol = a.tolerance;
      r = verify::statistical_suite(o);
    }
    for (const auto& c : r.checks) {
      std::cout << (c.passed ? "PASS " : "FAIL ") << r.suite << ": " << c.name << " -- "
                << c.detail << "\n";
    }
    ok = ok && r.passed();
    report["suites"].push_back(r.to_json());
  }
  report["passed"] = ok;
  if (!a.out.empty()) {
    write_json_file(a.out, report);
    write_config(app, sidecar(a.out));
  }
  std::cout << (ok ? "all checks passed" : "verification failed") << "\n";
  return ok ? kOk : kVerify;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Eigenvector self-overlaps of real and complex Ginibre matrices"};
  app.set_config("--config", "", "Re-run from an echoed configuration file");
  app.require_subcommand(1);
  const std::vector<std::string> kEnsembles{"ginoe", "ginue"};

  SampleArgs sa;
  auto* sample = app.add_subcommand("sample", "Run a Monte Carlo campaign and store its records");
  sample->configurable();
  sample->add_option("--ensemble", sa.ensemble, "ginoe or ginue")
      ->required()
      ->check(CLI::IsMember(kEnsembles));
  sample->add_option("--n", sa.n, "Matrix dimension")->required()->check(CLI::Range(2, 100000));
  sample->add_option("--samples", sa.samples, "Number of matrices")
      ->required()
      ->check(CLI::Range(std::int64_t{1}, std::numeric_limits<std::int64_t>::max()));
  sample->add_option("--seed", sa.seed, "Master seed")->capture_default_str();
  sample->add_option("--out", sa.out, "Record file (JSON lines)")->required();
  sample->add_option("--reject-threshold", sa.reject_threshold,
                     "Reject matrices whose eigenvector condition number exceeds this")
      ->capture_default_str();

  TheoryArgs ta;
  auto* theory = app.add_subcommand("theory", "Tabulate a closed-form curve over a grid");
  theory->configurable();
  theory->add_option("--ensemble", ta.ensemble)->check(CLI::IsMember(kEnsembles))->capture_default_str();
  theory->add_option("--n", ta.n, "Matrix dimension (finite region)")
      ->check(CLI::Range(2, 100000000))
      ->capture_default_str();
  theory->add_option("--region", ta.region)
      ->check(CLI::IsMember({"finite", "bulk", "edge", "depletion", "realbulk"}))
      ->capture_default_str();
  theory->add_option("--quantity", ta.quantity)
      ->check(CLI::IsMember({"density", "overlap", "conditional_mean", "pdf", "cdf"}))
      ->capture_default_str();
  theory->add_option("--grid", ta.grid, "lo,hi,count")->delimiter(',')->expected(3)->capture_default_str();
  theory->add_option("--line", ta.line, "Abscissa runs along Im (imag) or Re (real)")
      ->check(CLI::IsMember({"imag", "real"}))
      ->capture_default_str();
  theory->add_option("--offset", ta.offset, "The other coordinate of the line")->capture_default_str();
  theory->add_option("--param", ta.param, "|z| (finite pdf), |w| (bulk), eta (edge) or x (realbulk)")
      ->capture_default_str();
  theory->add_option("--delta", ta.delta, "Depletion strip coordinate Re z / sqrt(N)");
  theory->add_option("--out", ta.out, "CSV output")->required();

  FigureArgs fa;
  auto* figure = app.add_subcommand("figure", "Emit figure data (CSV) and a gnuplot script");
  figure->configurable();
  figure->add_option("figure", fa.id)->required()->check(
      CLI::IsMember({"fig3", "fig4", "fig5", "fig6", "fig7"}));
  figure->add_option("--records", fa.records, "Record files to use instead of sampling");
  figure->add_option("--ensemble", fa.ensembles)->check(CLI::IsMember(kEnsembles));
  figure->add_option("--n", fa.n, "Matrix dimensions (default: figure preset)");
  figure->add_option("--samples", fa.samples, "Matrices per campaign (0: preset)")->capture_default_str();
  figure->add_option("--seed", fa.seed)->capture_default_str();
  figure->add_option("--window", fa.window, "Bin half-width in units of z");
  figure->add_option("--out", fa.out, "Output directory")->required();

  VerifyArgs va;
  auto* ver = app.add_subcommand("verify", "Run verification suites");
  ver->configurable();
  ver->add_option("suites", va.suites, "specfun theory distributions mc statistical")
      ->check(CLI::IsMember({"specfun", "theory", "distributions", "mc", "statistical"}));
  ver->add_option("--trials", va.trials, "Schur-route trials (mc)")->capture_default_str();
  ver->add_option("--n", va.n, "Matrix dimension (statistical)")->capture_default_str();
  ver->add_option("--samples", va.samples, "Matrices per campaign (statistical)")->capture_default_str();
  ver->add_option("--seed", va.seed)->capture_default_str();
  ver->add_option("--window", va.window, "Disk radius (statistical)")->capture_default_str();
  ver->add_option("--tolerance", va.tolerance, "Relative tolerance of the finite-N comparison")
      ->capture_default_str();
  ver->add_option("--out", va.out, "JSON report");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  try {
    if (*sample) return run_sample(sa, *sample);
    if (*theory) return run_theory(ta, *theory);
    if (*figure) return run_figure(fa, *figure);
    return run_verify(va, *ver);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kUsage;
  } catch (const InvalidRegimeError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kUsage;
  } catch (const DomainError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kUsage;
  } catch (const IoError& e) {
    std::cerr << "i/o error: " << e.what() << "\n";
    return kIo;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kIo;
  }
}
