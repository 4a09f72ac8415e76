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
#include <complex>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "ginibre/distributions.hpp"
#include "ginibre/io.hpp"
#include "ginibre/mc.hpp"
#include "ginibre/specfun.hpp"
#include "ginibre/stats.hpp"
#include "ginibre/theory.hpp"

// Verification suites and the acceptance checks, shared by the CLI and the
// test drivers.
namespace ginibre::verify {

using nlohmann::json;

struct Check {
  std::string name;
  bool passed = false;
  double measured = 0.0;   // headline metric
  double tolerance = 0.0;  // its threshold
  std::string detail;
  json data = json::object();
};

struct SuiteReport {
  std::string suite;
  std::vector<Check> checks;

  bool passed() const {
    return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.passed; });
  }

  json to_json() const {
    json j;
    j["suite"] = suite;
    j["passed"] = passed();
    j["checks"] = json::array();
    for (const auto& c : checks) {
      j["checks"].push_back({{"name", c.name},
                             {"status", c.passed ? "pass" : "fail"},
                             {"measured", c.measured},
                             {"tolerance", c.tolerance},
                             {"detail", c.detail},
                             {"data", c.data}});
    }
    return j;
  }
};

inline std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", x);
  return buf;
}

inline double rel_err(double a, double b) {
  if (a == b) return 0.0;
  return std::abs(a - b) / std::abs(b);
}

// Max-error check over a list of (label, value, reference) triples.
struct MaxError {
  double worst = 0.0;
  std::string where;
  json rows = json::array();

  void add(const std::string& label, double value, double reference, bool relative = true) {
    const double e = relative ? rel_err(value, reference) : std::abs(value - reference);
    rows.push_back({{"at", label}, {"value", value}, {"reference", reference}, {"error", e}});
    if (where.empty() || !(e <= worst)) {
      worst = e;
      where = label;
    }
  }

  Check to_check(const std::string& name, double tol) const {
    Check c;
    c.name = name;
    c.measured = worst;
    c.tolerance = tol;
    c.passed = worst <= tol;
    c.detail = "max error " + fmt(worst) + " at " + where;
    c.data["rows"] = rows;
    return c;
  }
};

inline std::string point_label(ComplexPoint z) {
  std::ostringstream s;
  s << z.re << (z.im < 0 ? "" : "+") << z.im << "i";
  return s.str();
}

// ---------------------------------------------------------------- specfun

inline SuiteReport specfun_suite() {
  SuiteReport r{"specfun", {}};
  {
    // Q(n,a) = e^{-a} sum_{k<n} a^k/k! for integer n.
    MaxError m;
    for (int n : {1, 2, 3, 5, 10, 20, 30}) {
      for (double a : {0.1, 1.0, 5.0, 20.0, 40.0}) {
        double term = 1.0, sum = 1.0;
        for (int k = 1; k < n; ++k) {
          term *= a / k;
          sum += term;
        }
        m.add("n=" + fmt(n) + ",a=" + fmt(a), reg_gamma_q(n, a),
              std::exp(-a) * sum);
      }
    }
    r.checks.push_back(m.to_check("reg_gamma_q integer-order finite sum", 1e-12));
  }
  {
    MaxError m;
    for (double n : {0.5, 1.0, 2.5, 7.0, 50.0, 400.0}) {
      for (double a : {0.01, 0.7, 3.0, 49.0, 400.0, 420.0}) {
        m.add("n=" + fmt(n) + ",a=" + fmt(a),
              reg_gamma_p(n, a) + reg_gamma_q(n, a), 1.0, false);
      }
    }
    r.checks.push_back(m.to_check("P + Q = 1", 1e-14));
  }
  {
    MaxError m;
    for (double n : {2.0, 10.0, 100.0}) {
      for (double a : {0.5, 5.0, 50.0, 150.0}) {
        const double q = reg_gamma_q(n, a);
        if (q > 1e-300) m.add("n=" + fmt(n) + ",a=" + fmt(a),
                              log_reg_gamma_q(n, a), std::log(q), false);
      }
    }
    r.checks.push_back(m.to_check("log_reg_gamma_q matches log Q", 1e-12));
  }
  {
    MaxError m;
    for (double x = 0.0; x <= 5.0; x += 0.25) {
      m.add("x=" + fmt(x), erfcx(x), std::exp(x * x) * std::erfc(x));
    }
    for (double x : {1e3, 1e5}) {
      const double asym = (1.0 - 1.0 / (2 * x * x) + 3.0 / (4 * x * x * x * x)) / (x * kSqrtPi);
      m.add("x=" + fmt(x), erfcx(x), asym);
    }
    r.checks.push_back(m.to_check("erfcx against exp(x^2) erfc(x) and its asymptote", 1e-12));
  }
  {
    MaxError m;
    for (int n : {0, 1, 5, 40}) m.add("P_" + std::to_string(n) + "(1)", legendre_p(n, 1.0), 1.0);
    for (double t : {1.0, 1.5, 3.0}) {
      m.add("P_2(" + fmt(t) + ")", legendre_p(2, t), 0.5 * (3 * t * t - 1));
      m.add("P_3(" + fmt(t) + ")", legendre_p(3, t), 0.5 * (5 * t * t * t - 3 * t));
    }
    r.checks.push_back(m.to_check("Legendre closed forms", 1e-12));
  }
  {
    MaxError m;
    for (double t : {1.0, 1.5, 3.0}) {
      for (int n : {10, 100}) {
        m.add("n=" + std::to_string(n) + ",t=" + fmt(t), log_legendre_p(n, t),
              std::log(legendre_p(n, t)), false);
      }
    }
    r.checks.push_back(m.to_check("log_legendre_p equals log legendre_p", 1e-12));
  }
  {
    MaxError m;
    for (double x : {-0.4, -0.1, 1e-3, 0.2, 0.45, 0.8, 3.0}) {
      m.add("x=" + fmt(x), log1pmx(x), std::log1p(x) - x);
    }
    m.add("lgamma(5)", ln_gamma(5.0), std::log(24.0));
    r.checks.push_back(m.to_check("log1pmx and ln_gamma identities", 1e-10));
  }
  return r;
}

// ----------------------------------------------------------------- theory

// Analytic large-N limits against the finite-N formula (no sampling).
inline Check analytic_limit_bulk(int n = 4000) {
  MaxError m;
  const double sn = std::sqrt(static_cast<double>(n));
  for (double u : {-0.6, -0.3, 0.0, 0.2, 0.5}) {
    for (double v : {5.0 / sn, 0.1, 0.3, 0.5, 0.7}) {
      const ComplexPoint w{u, v};
      if (w.abs() > 0.8) continue;
      m.add(point_label(w), overlap_ginoe(n, {sn * u, sn * v}) / n, overlap_limit_bulk(w));
    }
  }
  return m.to_check("bulk limit at N=" + std::to_string(n), 0.02);
}

inline Check analytic_limit_edge(int n = 1000000) {
  MaxError m;
  const double sn = std::sqrt(static_cast<double>(n));
  for (double theta : {kPi / 2, kPi / 4}) {
    for (double eta : {-2.0, -1.0, 0.0, 1.0, 2.0}) {
      const double rad = sn + eta;
      const ComplexPoint z{rad * std::cos(theta), rad * std::sin(theta)};
      m.add("eta=" + fmt(eta) + ",theta=" + fmt(theta),
            overlap_ginoe(n, z) / sn, overlap_limit_edge(eta));
    }
  }
  return m.to_check("edge limit at N=" + std::to_string(n), 0.01);
}

inline Check analytic_limit_depletion(int n = 1000000) {
  MaxError m;
  const double sn = std::sqrt(static_cast<double>(n));
  for (double delta : {0.0, 0.5}) {
    for (double xi : {0.1, 0.5, 1.0, 2.0, 4.0}) {
      m.add("xi=" + fmt(xi) + ",delta=" + fmt(delta),
            overlap_ginoe(n, {sn * delta, xi}) / n, overlap_limit_depletion(xi, delta));
    }
  }
  return m.to_check("depletion limit at N=" + std::to_string(n), 0.01);
}

inline Check det_average_quadrature() {
  MaxError m;
  for (int n : {1, 2, 3, 5, 10, 20, 35, 50}) {
    for (double r : {0.0, 0.5, 1.0, 2.0, 3.5, 5.0}) {
      const double r2 = r * r;
      const double closed = std::exp(r2 + ln_gamma(n + 1.0) + log_reg_gamma_q(n + 1.0, r2));
      m.add("n=" + std::to_string(n) + ",|z|=" + fmt(r),
            avg_det_charpoly(n, {r / kSqrt2, r / kSqrt2}, 0.0), closed);
    }
  }
  return m.to_check("determinant average at mu=0 by quadrature", 1e-9);
}

inline Check det_average_mu_derivative() {
  MaxError m;
  for (int n : {3, 4, 6, 10, 20}) {
    for (ComplexPoint z : {ComplexPoint{1, 1}, ComplexPoint{0.3, 0.2}, ComplexPoint{2, 1.5}}) {
      // Forward 5-point stencil; mu must stay >= 0.
      const double h = 1e-3;
      QuadratureOptions o;
      o.rel_tol = 1e-12;
      o.abs_tol = 0.0;
      o.max_panels = 20000;
      double f[5];
      for (int k = 0; k < 5; ++k) f[k] = avg_det_charpoly(n - 2, z, k * h, o);
      const double fd =
          (-25.0 * f[0] + 48.0 * f[1] - 36.0 * f[2] + 16.0 * f[3] - 3.0 * f[4]) / (12.0 * h);
      m.add("n=" + std::to_string(n) + ",z=" + point_label(z), fd,
            avg_det_mu_derivative(n, z).derivative);
    }
  }
  return m.to_check("mu-derivative of the determinant average", 1e-6);
}

// Expected number of complex eigenvalues of a real Ginibre matrix from the
// density; N=2: 2 - sqrt(2), N=3: 3 - (1 + 1/sqrt(2)).
inline Check ginoe_density_mass() {
  MaxError m;
  QuadratureOptions o;
  o.rel_tol = 1e-11;
  for (int n : {2, 3}) {
    auto inner = [&](double y) {
      auto fx = [&](double x) { return density_ginoe_complex(n, {x, y}); };
      return 2.0 * integrate_semi_infinite(fx, o).value;
    };
    const double mass = 2.0 * integrate_semi_infinite(inner, o).value;
    const double expected = n == 2 ? 2.0 - kSqrt2 : 3.0 - (1.0 + 1.0 / kSqrt2);
    m.add("N=" + std::to_string(n), mass, expected);
  }
  for (int n : {1, 4, 10}) {
    auto fr = [&](double r) { return 2.0 * kPi * r * density_ginue(n, {r, 0.0}); };
    m.add("GinUE N=" + std::to_string(n), integrate_semi_infinite(fr, o).value, n);
  }
  return m.to_check("density normalization (expected complex eigenvalue count)", 1e-8);
}

inline SuiteReport theory_suite() {
  SuiteReport r{"theory", {}};
  {
    MaxError m;
    for (double y : {0.05, 0.3, 1.0, 2.0, 6.0}) {
      m.add("y=" + fmt(y), schur_delta_integral(y),
            schur_delta_integral_quadrature(y).value);
    }
    r.checks.push_back(m.to_check("Schur delta integral closed form vs quadrature", 1e-9));
  }
  r.checks.push_back(ginoe_density_mass());
  r.checks.push_back(analytic_limit_bulk());
  r.checks.push_back(analytic_limit_edge());
  r.checks.push_back(analytic_limit_depletion());
  r.checks.push_back(det_average_quadrature());
  r.checks.push_back(det_average_mu_derivative());
  return r;
}

// ---------------------------------------------------------- distributions

namespace detail {

inline QuadratureOptions tight() {
  QuadratureOptions o;
  o.abs_tol = 0.0;
  o.rel_tol = 1e-12;
  o.max_panels = 20000;
  return o;
}

// int_1^inf O^k P_N(O, z) dO with O = 1/u.
inline double finite_moment(int n, ComplexPoint z, int k) {
  auto f = [&](double u) {
    if (u <= 0.0 || u >= 1.0) return 0.0;
    return jpdf_ginue_finite(n, 1.0 / u, z) * std::pow(u, -2 - k);
  };
  return integrate(f, 0.0, 1.0, tight()).value;
}

// int_0^inf x^k g(x) dx with x = 1/u.
inline double inverse_moment(const std::function<double(double)>& g, int k) {
  auto f = [&](double u) {
    if (u <= 0.0) return 0.0;
    return g(1.0 / u) * std::pow(u, -2 - k);
  };
  return integrate_semi_infinite(f, tight()).value;
}

}  // namespace detail

inline Check finite_jpdf_moments() {
  MaxError m;
  for (int n : {3, 5, 10}) {
    for (double r : {0.5, 1.0, 2.0}) {
      const ComplexPoint z{r, 0.0};
      const std::string at = "N=" + std::to_string(n) + ",|z|=" + fmt(r);
      m.add(at + " zeroth", detail::finite_moment(n, z, 0), density_ginue(n, z));
      m.add(at + " first", detail::finite_moment(n, z, 1), overlap_ginue(n, z));
    }
  }
  return m.to_check("finite-N joint density moments", 1e-8);
}

inline Check limit_jpdf_moments_bulk() {
  MaxError m;
  for (double wa : {0.0, 0.5, 0.9}) {
    const ComplexPoint w{wa, 0.0};
    auto g = [&](double s) { return jpdf_limit_bulk_ginue(s, w); };
    m.add("|w|=" + fmt(wa) + " zeroth", detail::inverse_moment(g, 0), 1.0 / kPi);
    m.add("|w|=" + fmt(wa) + " first", detail::inverse_moment(g, 1),
          overlap_limit_bulk(w));
  }
  return m.to_check("bulk limiting joint density moments", 1e-8);
}

inline Check limit_jpdf_moments_edge() {
  MaxError m;
  for (double eta : {-1.0, 0.0, 1.0}) {
    auto g = [&](double s) { return jpdf_limit_edge_ginue(s, eta); };
    m.add("eta=" + fmt(eta) + " zeroth", detail::inverse_moment(g, 0),
          erfc(kSqrt2 * eta) / (2.0 * kPi));
    m.add("eta=" + fmt(eta) + " first", detail::inverse_moment(g, 1),
          overlap_limit_edge(eta));
  }
  return m.to_check("edge limiting joint density moments", 1e-6);
}

inline SuiteReport distributions_suite() {
  SuiteReport r{"distributions", {}};
  r.checks.push_back(finite_jpdf_moments());
  r.checks.push_back(limit_jpdf_moments_bulk());
  r.checks.push_back(limit_jpdf_moments_edge());
  {
    MaxError m;
    for (double wa : {0.0, 0.6}) {
      auto g = [&](double s) { return normalized_pdf(LimitKind::BulkGinUE, s, wa); };
      m.add("bulk |w|=" + fmt(wa), detail::inverse_moment(g, 0), 1.0);
      const double cdf = integrate([&](double s) { return s > 0 ? g(s) : 0.0; }, 0.0, 2.0,
                                   detail::tight()).value;
      m.add("bulk cdf(2) |w|=" + fmt(wa), cdf, normalized_cdf_bulk(2.0, wa));
    }
    for (double x : {0.0, 0.7}) {
      auto g = [&](double s) { return normalized_pdf(LimitKind::RealBulkGinOE, s, x); };
      const double cdf = integrate([&](double s) { return s > 0 ? g(s) : 0.0; }, 0.0, 3.0,
                                   detail::tight()).value;
      m.add("real cdf(3) x=" + fmt(x), cdf, normalized_cdf_realbulk(3.0, x));
    }
    for (double eta : {-1.0, 0.5}) {
      auto g = [&](double s) { return normalized_pdf(LimitKind::EdgeGinUE, s, eta); };
      m.add("edge eta=" + fmt(eta), detail::inverse_moment(g, 0), 1.0);
    }
    r.checks.push_back(m.to_check("normalized densities: unit mass and distribution functions", 1e-8));
  }
  return r;
}

// --------------------------------------------------------------------- mc

struct InvariantLedger {
  double min_self_overlap = std::numeric_limits<double>::infinity();
  double max_pair_mismatch = 0.0;
  std::int64_t records = 0;
  std::int64_t campaigns = 0;

  void absorb(const CampaignSummary& s) {
    min_self_overlap = std::min(min_self_overlap, s.min_self_overlap);
    max_pair_mismatch = std::max(max_pair_mismatch, s.max_pair_mismatch);
    records += s.records;
    ++campaigns;
  }
};

inline Check schur_route(int trials, std::uint64_t seed) {
  Check c;
  c.name = "Schur route vs eigendecomposition";
  c.tolerance = 1e-8;
  int passed = 0;
  double worst = 0.0;
  const int sizes[3] = {4, 6, 10};
  std::int64_t index = 0;
  json rows = json::array();
  for (int t = 0; t < trials; ++t) {
    EnsembleConfig cfg;
    cfg.n = sizes[t % 3];
    cfg.master_seed = seed;
    // Draw until the matrix has a complex eigenvalue.
    for (;;) {
      const RealMatrix g = std::get<RealMatrix>(sample_matrix(cfg, index++));
      const auto eo = eigen_overlaps(g, std::numeric_limits<double>::infinity());
      int pick = -1;
      for (int k = 0; k < cfg.n; ++k) {
        if (eo.values(k).imag() > real_threshold(cfg.n)) {
          pick = k;
          break;
        }
      }
      if (pick < 0) continue;
      const ComplexPoint z{eo.values(pick).real(), eo.values(pick).imag()};
      const auto res = schur_cross_check(g, z);
      const double e = rel_err(res.overlap_schur, res.overlap_direct);
      worst = std::max(worst, e);
      if (e <= c.tolerance) ++passed;
      rows.push_back({{"n", cfg.n}, {"schur", res.overlap_schur},
                      {"direct", res.overlap_direct}, {"rel_error", e}});
      break;
    }
  }
  c.measured = worst;
  c.passed = passed == trials;
  c.detail = std::to_string(passed) + "/" + std::to_string(trials) + " trials within 1e-8";
  c.data["passed_trials"] = passed;
  c.data["trials"] = trials;
  c.data["rows"] = rows;
  return c;
}

inline Check row_sums(std::uint64_t seed, int per_size = 10) {
  MaxError m;
  for (auto kind : {EnsembleKind::GinOE, EnsembleKind::GinUE}) {
    for (int n : {10, 50, 100}) {
      EnsembleConfig cfg;
      cfg.kind = kind;
      cfg.n = n;
      cfg.master_seed = seed;
      double worst = 0.0;
      for (int s = 0; s < per_size; ++s) {
        const auto eo = std::visit([](const auto& g) { return eigen_overlaps(g); },
                                   sample_matrix(cfg, s));
        if (eo.rejected) continue;
        const ComplexMatrix o = overlap_matrix(eo);
        for (int i = 0; i < n; ++i) worst = std::max(worst, std::abs(o.row(i).sum() - 1.0));
      }
      m.add(std::string(to_string(kind)) + " N=" + std::to_string(n), 1.0 + worst, 1.0, false);
    }
  }
  return m.to_check("overlap matrix row sums equal one", 1e-8);
}

struct PerturbationStats {
  std::int64_t trials = 0;
  std::int64_t discarded = 0;
  std::int64_t bound_violations = 0;
  double max_ratio = 0.0;  // |derivative| / bound
  double max_fd_error = 0.0;
};

inline PerturbationStats perturbation_trials(std::int64_t trials, int n, std::uint64_t seed,
                                             int per_matrix = 20) {
  PerturbationStats st;
  EnsembleConfig cfg;
  cfg.n = n;
  cfg.master_seed = seed;
  std::int64_t done = 0;
  for (std::int64_t mi = 0; done < trials; ++mi) {
    const RealMatrix g = std::get<RealMatrix>(sample_matrix(cfg, mi));
    SampleRng rng(seed ^ 0x9e3779b97f4a7c15ULL, static_cast<std::uint64_t>(mi));
    for (int k = 0; k < per_matrix && done < trials; ++k, ++done) {
      const RealMatrix p = random_unit_perturbation_real(n, rng);
      const int idx = static_cast<int>(rng.engine()() % static_cast<std::uint64_t>(n));
      ++st.trials;
      try {
        const auto pr = perturbation_experiment(g, idx, p, 1e-7);
        const double d = std::hypot(pr.derivative.re, pr.derivative.im);
        st.max_ratio = std::max(st.max_ratio, d / pr.bound);
        if (d > pr.bound * (1.0 + 1e-8)) ++st.bound_violations;
        const double fe = std::hypot(pr.fd_estimate.re - pr.derivative.re,
                                     pr.fd_estimate.im - pr.derivative.im) / (1.0 + d);
        st.max_fd_error = std::max(st.max_fd_error, fe);
      } catch (const TrackingError&) {
        ++st.discarded;
      }
    }
  }
  return st;
}

inline Check perturbation_bound(std::int64_t trials, std::uint64_t seed) {
  const auto st = perturbation_trials(trials, 20, seed);
  Check c;
  c.name = "perturbation bound |dz/de| <= sqrt(O_nn)";
  c.measured = static_cast<double>(st.bound_violations);
  c.tolerance = 0.0;
  c.passed = st.bound_violations == 0 && st.trials - st.discarded > 0;
  c.detail = std::to_string(st.bound_violations) + " violations in " +
             std::to_string(st.trials - st.discarded) + " trials (" +
             std::to_string(st.discarded) + " discarded for ambiguous tracking)";
  c.data = {{"trials", st.trials}, {"discarded", st.discarded},
            {"max_ratio", st.max_ratio}, {"max_fd_error", st.max_fd_error}};
  return c;
}

inline Check perturbation_finite_difference(std::int64_t trials, std::uint64_t seed) {
  const auto st = perturbation_trials(trials, 20, seed);
  Check c;
  c.name = "perturbation derivative vs central difference (eps=1e-7)";
  c.measured = st.max_fd_error;
  c.tolerance = 1e-6;
  c.passed = st.max_fd_error <= c.tolerance;
  c.detail = "max |fd - derivative|/(1+|derivative|) = " + fmt(st.max_fd_error);
  return c;
}

// Record streams of a small campaign with different worker counts.
inline Check determinism(std::uint64_t seed) {
  EnsembleConfig cfg;
  cfg.n = 30;
  cfg.samples = 120;
  cfg.master_seed = seed;
  auto render = [&](int threads) {
    std::string s;
    CampaignOptions o;
    o.threads = threads;
    o.block_size = 7;
    run_campaign(cfg, [&](const std::vector<SpectralDatum>& d) {
      for (const auto& x : d) s += record_line(x) + "\n";
    }, o);
    return s;
  };
  const std::string a = render(1), b = render(1), c3 = render(3);
  Check c;
  c.name = "record stream determinism under re-run and worker count";
  c.passed = a == b && a == c3 && !a.empty();
  c.measured = c.passed ? 0.0 : 1.0;
  c.detail = c.passed ? "byte-identical streams" : "streams differ";
  return c;
}

inline Check pair_and_classification(std::uint64_t seed, int samples = 200) {
  EnsembleConfig cfg;
  cfg.n = 100;
  cfg.samples = samples;
  cfg.master_seed = seed;
  std::int64_t bad_counts = 0;
  const auto s = run_campaign(cfg, [&](const std::vector<SpectralDatum>& d) {
    std::int64_t real = 0, cplx = 0;
    for (const auto& x : d) (x.is_real ? real : cplx) += 1;
    if (real + cplx != cfg.n || cplx % 2 != 0) ++bad_counts;
  }, campaign_options_from_env());
  Check c;
  c.name = "conjugate pairs share overlaps; real + 2 pairs = N";
  c.measured = s.max_pair_mismatch;
  c.tolerance = 1e-6;
  c.passed = s.max_pair_mismatch <= 1e-6 && bad_counts == 0 && s.rejected == 0;
  c.detail = "max pair mismatch " + fmt(s.max_pair_mismatch) + ", " +
             std::to_string(bad_counts) + " bad counts, " + std::to_string(s.rejected) +
             " rejected";
  return c;
}

inline SuiteReport mc_suite(int trials, std::uint64_t seed) {
  SuiteReport r{"mc", {}};
  r.checks.push_back(schur_route(trials, seed));
  {
    MaxError m;
    RealMatrix a(6, 6);
    SampleRng rng(seed, 0);
    const RealMatrix g = sample_ginoe(6, rng);
    a = g + g.transpose();
    const auto eo = eigen_overlaps(a);
    for (const auto& d : eo.data) m.add("eig " + std::to_string(d.eigen_index), d.self_overlap, 1.0, false);
    for (double aa : {1.0, 10.0}) {
      for (double dd : {0.5, 0.05}) {
        RealMatrix t(2, 2);
        t << dd, aa, 0.0, -dd;
        const auto e2 = eigen_overlaps(t);
        m.add("a=" + fmt(aa) + ",d=" + fmt(dd), e2.data[0].self_overlap,
              1.0 + aa * aa / (4 * dd * dd));
      }
    }
    r.checks.push_back(m.to_check("normal matrices have unit overlaps; 2x2 closed form", 1e-10));
  }
  r.checks.push_back(row_sums(seed, 3));
  r.checks.push_back(pair_and_classification(seed, 50));
  {
    MaxError m;
    EnsembleConfig cfg;
    cfg.n = 20;
    cfg.master_seed = seed;
    const RealMatrix g = std::get<RealMatrix>(sample_matrix(cfg, 0));
    const RealMatrix p = RealMatrix::Identity(20, 20);
    for (int k = 0; k < 20; k += 5) {
      const auto pr = perturbation_experiment(g, k, p, 1e-7);
      m.add("n=" + std::to_string(k), std::hypot(pr.derivative.re - 1.0, pr.derivative.im),
            0.0, false);
    }
    r.checks.push_back(m.to_check("identity perturbation moves every eigenvalue at unit rate", 1e-10));
  }
  r.checks.push_back(perturbation_bound(std::max(trials * 10, 100), seed));
  r.checks.push_back(perturbation_finite_difference(std::max(trials, 50), seed));
  r.checks.push_back(determinism(seed));
  return r;
}

// ------------------------------------------------------------ statistical

// Probe points of the finite-N comparison; the N = 50 layout scaled with
// sqrt(N/50) and clipped to |z| <= 0.9 sqrt(N).
inline std::vector<ComplexPoint> finite_n_probes(int n) {
  const double s = std::sqrt(n / 50.0);
  std::vector<ComplexPoint> pts;
  for (double im : {2.0, 2.0 + s, 2.0 + 2 * s, 2.0 + 3 * s}) {
    for (double re : {-3.5, -1.75, 0.0, 1.75, 3.5}) {
      const ComplexPoint z{re * s, im};
      if (z.abs() <= 0.9 * std::sqrt(static_cast<double>(n))) pts.push_back(z);
    }
  }
  return pts;
}

struct BinnedCriterion {
  Check check;
  ComparisonReport report;
};

inline json comparison_json(const ComparisonReport& rep) {
  json rows = json::array();
  for (const auto& r : rep.rows) {
    rows.push_back({{"re", r.center.re}, {"im", r.center.im}, {"count", r.count},
                    {"theory", r.theory}, {"empirical", r.empirical},
                    {"std_error", r.std_error}, {"z_score", r.z_score},
                    {"relative_error", r.relative_error},
                    {"well_populated", r.well_populated}});
  }
  return rows;
}

// Finite-N conditional means in disks against the bin-averaged formula.
inline BinnedCriterion finite_n_criterion(EnsembleKind kind, int n, std::int64_t samples,
                                          std::uint64_t seed, double window,
                                          InvariantLedger* ledger = nullptr,
                                          double rel_tol = 0.05) {
  BinSpec spec;
  spec.centers = finite_n_probes(n);
  spec.window = window;
  spec.geometry = BinGeometry::Disk;
  spec.upper_half_only = kind == EnsembleKind::GinOE;
  spec.min_count = 1000;
  EnsembleConfig cfg;
  cfg.kind = kind;
  cfg.n = n;
  cfg.samples = samples;
  cfg.master_seed = seed;
  BinnedAccumulator acc(spec);
  const auto summary = run_campaign(
      cfg, [&](const std::vector<SpectralDatum>& d) { acc.add(d); }, campaign_options_from_env());
  if (ledger) ledger->absorb(summary);
  const auto series = acc.series();
  const auto rep = compare(series, [&](std::size_t b, const BinStat&) {
    return bin_averaged_ratio(
        spec, b, [&](ComplexPoint z) { return overlap(kind, n, z); },
        [&](ComplexPoint z) { return density(kind, n, z); });
  });
  std::size_t good = 0;
  for (const auto& r : rep.rows) {
    if (r.well_populated && std::abs(r.z_score) <= 3.0 && std::abs(r.relative_error) <= rel_tol) ++good;
  }
  Check c;
  c.name = std::string(to_string(kind)) + " finite-N conditional mean, N=" + std::to_string(n);
  c.measured = rep.well_populated ? static_cast<double>(good) / rep.well_populated : 0.0;
  c.tolerance = 0.95;
  c.passed = rep.well_populated > 0 && c.measured >= 0.95;
  c.detail = std::to_string(good) + "/" + std::to_string(rep.well_populated) +
             " well-populated bins with |z|<=3 and |rel|<=" + fmt(rel_tol) + "; max |z| " +
             fmt(rep.max_abs_z) + "; " + std::to_string(summary.rejected) +
             " rejected matrices";
  c.data = {{"bins", comparison_json(rep)}, {"samples", samples}, {"rejected", summary.rejected},
            {"relative_tolerance", rel_tol}};
  return {c, rep};
}

// Sink for the large-N GinOE campaign shared by the depletion, edge and
// distribution checks.
struct LargeGinoeCollector {
  int n;
  double complex_bulk_min_im = 3.0;
  BinnedAccumulator depletion;
  BinnedAccumulator edge;
  std::vector<double> real_bulk;         // O of real eigenvalues, |x| < 0.5 sqrt(N)
  std::vector<double> complex_bulk_pit;  // bulk CDF at (s, |w|), |w| <= 0.5
  std::vector<double> complex_bulk;      // O of the same records
  std::vector<double> depletion_region;  // O with |Im z| <= 1, |Re z| <= 0.5 sqrt(N)

  static BinSpec depletion_spec(int n) {
    BinSpec s;
    for (double xi : {0.25, 0.5, 1.0, 2.0, 4.0}) s.centers.push_back({0.0, xi});
    s.geometry = BinGeometry::Strip;
    s.window = 1.0;
    s.im_half_height = 1.0 / std::sqrt(static_cast<double>(n));
    s.upper_half_only = true;
    s.min_count = 1000;
    return s;
  }

  static BinSpec edge_spec(int n) {
    BinSpec s;
    const double sn = std::sqrt(static_cast<double>(n));
    for (double eta : {-1.5, -1.0, 0.0, 1.0}) s.centers.push_back({sn + eta, 0.0});
    s.geometry = BinGeometry::Annulus;
    s.window = 1.0 / sn;
    s.min_im_over_abs = 0.5;
    s.upper_half_only = true;
    s.min_count = 1000;
    return s;
  }

  explicit LargeGinoeCollector(int n_)
      : n(n_), depletion(depletion_spec(n_)), edge(edge_spec(n_)) {}

  void operator()(const std::vector<SpectralDatum>& data) {
    const double sn = std::sqrt(static_cast<double>(n));
    depletion.add(data);
    edge.add(data);
    for (const auto& d : data) {
      if (d.is_real) {
        if (std::abs(d.z.re) < 0.5 * sn) real_bulk.push_back(d.self_overlap);
        continue;
      }
      if (d.z.im < 0.0) continue;
      const double wa = d.z.abs() / sn;
      if (wa <= 0.5 && d.z.im >= complex_bulk_min_im) {
        complex_bulk.push_back(d.self_overlap);
        complex_bulk_pit.push_back(normalized_cdf_bulk((d.self_overlap - 1.0) / n, wa));
      }
      if (d.z.im <= 1.0 && std::abs(d.z.re) <= 0.5 * sn) {
        depletion_region.push_back(d.self_overlap);
      }
    }
  }
};

inline ComparisonReport scaled_report(const BinnedSeries& raw, double scale,
                                      const std::function<double(std::size_t)>& theory) {
  BinnedSeries s = raw;
  for (auto& b : s.bins) {
    b.mean /= scale;
    b.std_error /= scale;
  }
  return compare(s, [&](std::size_t b, const BinStat&) { return theory(b); });
}

inline Check depletion_criterion(const LargeGinoeCollector& col) {
  const int n = col.n;
  const double sn = std::sqrt(static_cast<double>(n));
  const BinSpec& spec = col.depletion.spec();
  const auto rep = scaled_report(col.depletion.series(), n, [&](std::size_t b) {
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
  std::size_t good = 0;
  json rows = comparison_json(rep);
  for (std::size_t i = 0; i < rep.rows.size(); ++i) {
    const auto& r = rep.rows[i];
    const bool ok = r.count > 1 && (std::abs(r.relative_error) <= 0.05 || std::abs(r.z_score) <= 3.0);
    rows[i]["pass"] = ok;
    rows[i]["chalker_mehlig"] = 1.0 - (r.center.im * r.center.im) / n;
    if (ok) ++good;
  }
  Check c;
  c.name = "depletion regime conditional mean / N, N=" + std::to_string(n);
  c.measured = static_cast<double>(good);
  c.tolerance = static_cast<double>(rep.rows.size());
  c.passed = good == rep.rows.size();
  c.detail = std::to_string(good) + "/" + std::to_string(rep.rows.size()) +
             " strips within max(5%, 3 SE) of the depletion limit";
  c.data["bins"] = rows;
  return c;
}

inline Check edge_criterion(const LargeGinoeCollector& col) {
  const int n = col.n;
  const double sn = std::sqrt(static_cast<double>(n));
  const BinSpec& spec = col.edge.spec();
  const auto rep = scaled_report(col.edge.series(), sn, [&](std::size_t b) {
    return bin_averaged_ratio(
        spec, b, [&](ComplexPoint z) { return overlap_limit_edge(z.abs() - sn); },
        [&](ComplexPoint z) { return erfc(kSqrt2 * (z.abs() - sn)) / (2.0 * kPi); });
  });
  std::size_t good = 0;
  double worst = 0.0;
  json rows = comparison_json(rep);
  for (std::size_t i = 0; i < rep.rows.size(); ++i) {
    const auto& r = rep.rows[i];
    const bool ok = r.count > 1 && std::abs(r.relative_error) <= 0.07;
    rows[i]["eta"] = r.center.re - sn;
    rows[i]["pass"] = ok;
    worst = std::max(worst, std::abs(r.relative_error));
    if (ok) ++good;
  }
  Check c;
  c.name = "edge regime conditional mean / sqrt(N), N=" + std::to_string(n);
  c.measured = worst;
  c.tolerance = 0.07;
  c.passed = good == rep.rows.size();
  c.detail = std::to_string(good) + "/" + std::to_string(rep.rows.size()) +
             " annuli within 7% of the edge limit; worst relative error " + fmt(worst);
  c.data["bins"] = rows;
  return c;
}

inline Check slope_check(const std::string& name, const std::vector<double>& overlaps, int n,
                         double expected, double tol) {
  Check c;
  c.name = name;
  c.tolerance = tol;
  try {
    const auto h = overlap_histogram(overlaps, OverlapScaling::BulkS, n,
                                     ValueGrid::logarithmic(3.0, 30.0, 12));
    const auto fit = tail_slope(h, 3.0, 30.0);
    c.measured = fit.slope;
    c.passed = std::abs(fit.slope - expected) <= tol;
    c.detail = "slope " + fmt(fit.slope) + " +- " + fmt(fit.std_error) +
               " (expected " + fmt(expected) + " +- " + fmt(tol) +
               ") from " + std::to_string(overlaps.size()) + " overlaps";
    c.data = {{"slope", fit.slope}, {"std_error", fit.std_error}, {"bins", fit.bins_used},
              {"values", overlaps.size()}};
  } catch (const DomainError& e) {
    c.passed = false;
    c.measured = std::numeric_limits<double>::quiet_NaN();
    c.detail = e.what();
  }
  return c;
}

inline Check complex_bulk_ks(const LargeGinoeCollector& col) {
  Check c;
  c.name = "GinOE complex bulk overlaps follow the GinUE bulk law (KS distance)";
  c.tolerance = 0.05;
  c.measured = col.complex_bulk_pit.empty()
                   ? std::numeric_limits<double>::infinity()
                   : ks_distance(col.complex_bulk_pit, [](double u) { return u; });
  c.passed = c.measured <= c.tolerance;
  c.detail = "sup distance " + fmt(c.measured) + " over " +
             std::to_string(col.complex_bulk_pit.size()) +
             " records with |w| <= 0.5, Im z >= " + fmt(col.complex_bulk_min_im);
  return c;
}

// Depletion-region histogram with both candidate curves; no threshold.
inline void write_depletion_histogram(const LargeGinoeCollector& col,
                                      const std::filesystem::path& path) {
  if (col.depletion_region.empty()) return;
  const auto h = overlap_histogram(col.depletion_region, OverlapScaling::BulkS, col.n,
                                   ValueGrid::linear(0.0, 5.0, 50));
  CsvWriter csv(path,
                {{"quantity", "histogram of s = (O-1)/N, GinOE complex eigenvalues"},
                 {"region", "0 <= Im z <= 1, |Re z| <= 0.5 sqrt(N)"},
                 {"n", std::to_string(col.n)},
                 {"records", std::to_string(h.total)},
                 {"in_grid_fraction", fmt(h.in_grid_fraction())},
                 {"curves", "ginue_bulk_normalized_pdf(w=0), ginoe_real_bulk_normalized_pdf(x=0)"}},
                {"s", "density", "density_all_records", "ginue_bulk_w0", "ginoe_real_bulk_x0"});
  for (std::size_t i = 0; i < h.bins(); ++i) {
    const double s = h.center(i);
    csv.row({s, h.density[i], h.density[i] * h.in_grid_fraction(),
             normalized_pdf(LimitKind::BulkGinUE, s, 0.0),
             normalized_pdf(LimitKind::RealBulkGinOE, s, 0.0)});
  }
  csv.close();
}

inline Check det_average_mc(std::int64_t samples, std::uint64_t seed) {
  Accumulator acc;
  const std::complex<double> z(1.0, 1.0);
  for (std::int64_t i = 0; i < samples; ++i) {
    SampleRng rng(seed, static_cast<std::uint64_t>(i));
    const RealMatrix g = sample_ginoe(3, rng);
    const ComplexMatrix m = z * ComplexMatrix::Identity(3, 3) - g.cast<std::complex<double>>();
    acc.add(std::norm(m.determinant()));
  }
  const double closed = std::exp(2.0 + ln_gamma(4.0) + log_reg_gamma_q(4.0, 2.0));
  Check c;
  c.name = "Monte Carlo determinant average, n=3, z=1+i";
  c.measured = z_score(acc.mean, closed, acc.std_error());
  c.tolerance = 3.0;
  c.passed = std::abs(c.measured) <= 3.0;
  c.detail = "mean " + fmt(acc.mean) + " +- " + fmt(acc.std_error()) +
             " vs closed form " + fmt(closed);
  c.data = {{"mean", acc.mean}, {"std_error", acc.std_error()}, {"closed_form", closed},
            {"samples", samples}};
  return c;
}

struct StatisticalOptions {
  int n = 50;
  std::int64_t samples = 2000;
  std::uint64_t seed = 20260101;
  double window = 1.0;
  double rel_tol = 0.05;
};

// Finite-N, depletion and edge comparisons at one (N, samples).
inline SuiteReport statistical_suite(const StatisticalOptions& o) {
  SuiteReport r{"statistical", {}};
  InvariantLedger ledger;
  r.checks.push_back(
      finite_n_criterion(EnsembleKind::GinOE, o.n, o.samples, o.seed, o.window, &ledger,
                         o.rel_tol).check);
  r.checks.push_back(
      finite_n_criterion(EnsembleKind::GinUE, o.n, o.samples, o.seed + 1, o.window, &ledger,
                         o.rel_tol).check);
  LargeGinoeCollector col(o.n);
  EnsembleConfig cfg;
  cfg.n = o.n;
  cfg.samples = o.samples;
  cfg.master_seed = o.seed + 2;
  ledger.absorb(run_campaign(cfg, std::ref(col), campaign_options_from_env()));
  r.checks.push_back(depletion_criterion(col));
  r.checks.push_back(edge_criterion(col));
  r.checks.push_back(det_average_mc(100000, o.seed + 3));
  Check inv;
  inv.name = "self-overlaps >= 1 - 1e-10 and paired overlaps equal";
  inv.measured = ledger.min_self_overlap;
  inv.tolerance = 1.0 - 1e-10;
  inv.passed = ledger.min_self_overlap >= 1.0 - 1e-10 && ledger.max_pair_mismatch <= 1e-6;
  inv.detail = "min O_nn " + fmt(ledger.min_self_overlap) + ", max pair mismatch " +
               fmt(ledger.max_pair_mismatch);
  r.checks.push_back(inv);
  return r;
}

}  // namespace ginibre::verify
