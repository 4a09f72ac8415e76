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


// Acceptance run: one PASS/FAIL line per criterion, a JSON report and the
// depletion-region histogram. Sample sizes and seeds are fixed.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ginibre/io.hpp"
#include "ginibre/verify.hpp"

namespace {

using namespace ginibre;
using namespace ginibre::verify;

constexpr std::uint64_t kSeedFiniteGinoe = 101;
constexpr std::uint64_t kSeedFiniteGinue = 102;
constexpr std::uint64_t kSeedLargeGinoe = 103;
constexpr std::uint64_t kSeedLargeGinue = 104;
constexpr std::uint64_t kSeedDeterminant = 105;
constexpr std::uint64_t kSeedStructural = 106;

struct Criterion {
  int id;
  std::string title;
  std::vector<Check> checks;

  bool passed() const {
    return !checks.empty() &&
           std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.passed; });
  }
};

class Timer {
 public:
  explicit Timer(std::string what) : what_(std::move(what)), t0_(clock::now()) {
    std::cerr << "[acceptance] " << what_ << " ..." << std::endl;
  }
  ~Timer() {
    const double s = std::chrono::duration<double>(clock::now() - t0_).count();
    std::cerr << "[acceptance] " << what_ << " done in " << fmt(s) << " s" << std::endl;
  }

 private:
  using clock = std::chrono::steady_clock;
  std::string what_;
  clock::time_point t0_;
};

// GinUE edge limit with the rotation angle varied.
Check ginue_edge_limit(int n = 1000000) {
  MaxError m;
  const double sn = std::sqrt(static_cast<double>(n));
  for (double theta : {0.0, 1.0, 2.5}) {
    for (double eta : {-2.0, -1.0, 0.0, 1.0, 2.0}) {
      const double r = sn + eta;
      m.add("eta=" + fmt(eta) + ",theta=" + fmt(theta),
            overlap_ginue(n, {r * std::cos(theta), r * std::sin(theta)}) / sn,
            overlap_limit_edge(eta));
    }
  }
  return m.to_check("GinUE edge limit at N=" + std::to_string(n), 0.01);
}

// Bulk GinUE self-overlaps (|w| <= 0.5) of one campaign.
struct GinueBulkCollector {
  int n;
  std::vector<double> overlaps;
  void operator()(const std::vector<SpectralDatum>& data) {
    const double sn = std::sqrt(static_cast<double>(n));
    for (const auto& d : data) {
      if (d.z.abs() <= 0.5 * sn) overlaps.push_back(d.self_overlap);
    }
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance criteria for the Ginibre self-overlap toolkit"};
  std::string out = "acceptance_out";
  app.add_option("--out", out, "Output directory")->capture_default_str();
  CLI11_PARSE(app, argc, argv);

  namespace fs = std::filesystem;
  try {
    fs::create_directories(out);
  } catch (const fs::filesystem_error& e) {
    std::cerr << "cannot create " << out << ": " << e.what() << "\n";
    return 2;
  }

  const auto opts = campaign_options_from_env();
  InvariantLedger ledger;
  std::vector<Criterion> crit;

  {
    Timer t("criterion 1: GinOE N=50, 20000 matrices");
    crit.push_back({1, "finite-N GinOE conditional mean vs Monte Carlo (N=50)",
                    {finite_n_criterion(EnsembleKind::GinOE, 50, 20000, kSeedFiniteGinoe, 1.0,
                                        &ledger).check}});
  }
  {
    Timer t("criterion 2: GinUE N=50, 20000 matrices");
    crit.push_back({2, "finite-N GinUE conditional mean vs Monte Carlo (N=50)",
                    {finite_n_criterion(EnsembleKind::GinUE, 50, 20000, kSeedFiniteGinue, 1.0,
                                        &ledger).check}});
  }

  LargeGinoeCollector col(250);
  {
    Timer t("criteria 3, 4, 10: GinOE N=250, 10000 matrices");
    EnsembleConfig cfg;
    cfg.n = 250;
    cfg.samples = 10000;
    cfg.master_seed = kSeedLargeGinoe;
    ledger.absorb(run_campaign(cfg, std::ref(col), opts));
  }
  crit.push_back({3, "depletion regime (N=250, xi in {0.25, 0.5, 1, 2, 4})",
                  {depletion_criterion(col)}});
  crit.push_back({4, "edge regime (N=250, eta in {-1.5, -1, 0, 1})", {edge_criterion(col)}});

  {
    Timer t("criterion 5: analytic limits");
    crit.push_back({5, "analytic limit consistency",
                    {analytic_limit_bulk(4000), analytic_limit_edge(1000000),
                     analytic_limit_depletion(1000000), ginue_edge_limit(1000000)}});
  }
  {
    Timer t("criterion 6: Schur route");
    crit.push_back({6, "Schur route equivalence (100 matrices, N in {4, 6, 10})",
                    {schur_route(100, kSeedStructural)}});
  }
  {
    Timer t("criterion 7: determinant averages");
    crit.push_back({7, "determinant-average identities",
                    {det_average_quadrature(), det_average_mu_derivative(),
                     det_average_mc(100000, kSeedDeterminant)}});
  }
  {
    Timer t("criterion 8: finite joint density moments");
    crit.push_back({8, "finite-N joint density moments", {finite_jpdf_moments()}});
  }
  {
    Timer t("criterion 9: limiting joint density moments");
    crit.push_back({9, "limiting joint density moments",
                    {limit_jpdf_moments_bulk(), limit_jpdf_moments_edge()}});
  }

  GinueBulkCollector ue{250, {}};
  {
    Timer t("criterion 10: GinUE N=250, 2000 matrices");
    EnsembleConfig cfg;
    cfg.kind = EnsembleKind::GinUE;
    cfg.n = 250;
    cfg.samples = 2000;
    cfg.master_seed = kSeedLargeGinue;
    ledger.absorb(run_campaign(cfg, std::ref(ue), opts));
  }
  try {
    write_depletion_histogram(col, fs::path(out) / "depletion_histogram.csv");
  } catch (const IoError& e) {
    std::cerr << e.what() << "\n";
    return 2;
  }
  crit.push_back(
      {10, "self-overlap distribution tails and the complex-bulk law",
       {slope_check("GinUE N=250 bulk tail slope", ue.overlaps, 250, -3.0, 0.3),
        slope_check("GinOE N=250 real-eigenvalue tail slope", col.real_bulk, 250, -2.0, 0.3),
        complex_bulk_ks(col)}});

  {
    Timer t("criterion 11: structural invariants");
    Check inv;
    inv.name = "O_nn >= 1 - 1e-10 and equal overlaps within conjugate pairs";
    inv.measured = ledger.min_self_overlap;
    inv.tolerance = 1.0 - 1e-10;
    inv.passed = ledger.min_self_overlap >= 1.0 - 1e-10 && ledger.max_pair_mismatch <= 1e-6;
    inv.detail = "min O_nn " + fmt(ledger.min_self_overlap) + ", max pair mismatch " +
                 fmt(ledger.max_pair_mismatch) + " over " + std::to_string(ledger.records) +
                 " records in " + std::to_string(ledger.campaigns) + " campaigns";
    crit.push_back({11, "structural invariants",
                    {inv, row_sums(kSeedStructural), perturbation_bound(10000, kSeedStructural),
                     determinism(kSeedStructural)}});
  }

  json report;
  report["criteria"] = json::array();
  bool all = true;
  for (const auto& c : crit) {
    all = all && c.passed();
    std::cout << (c.passed() ? "PASS" : "FAIL") << " criterion " << c.id << ": " << c.title
              << "\n";
    SuiteReport sr{"criterion " + std::to_string(c.id), c.checks};
    for (const auto& k : c.checks) {
      std::cout << "    [" << (k.passed ? "ok" : "not ok") << "] " << k.name << " -- " << k.detail
                << "\n";
    }
    json j = sr.to_json();
    j["id"] = c.id;
    j["title"] = c.title;
    report["criteria"].push_back(j);
  }
  report["passed"] = all;
  std::cout.flush();
  try {
    write_json_file(fs::path(out) / "acceptance_report.json", report);
  } catch (const IoError& e) {
    std::cerr << e.what() << "\n";
    return 2;
  }
  return all ? 0 : 3;
}
