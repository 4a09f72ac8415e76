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


#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <vector>

#include <gtest/gtest.h>

#include "ginibre/errors.hpp"
#include "ginibre/mc.hpp"

namespace ginibre {
namespace {

EnsembleConfig config(EnsembleKind kind, int n, std::int64_t samples, std::uint64_t seed) {
  EnsembleConfig c;
  c.kind = kind;
  c.n = n;
  c.samples = samples;
  c.master_seed = seed;
  return c;
}

RealMatrix ginoe(int n, std::uint64_t seed, std::uint64_t index = 0) {
  SampleRng rng(seed, index);
  return sample_ginoe(n, rng);
}

TEST(Sampling, Deterministic) {
  const auto c = config(EnsembleKind::GinUE, 6, 4, 123);
  EXPECT_EQ(std::get<ComplexMatrix>(sample_matrix(c, 3)), std::get<ComplexMatrix>(sample_matrix(c, 3)));
  EXPECT_NE(std::get<ComplexMatrix>(sample_matrix(c, 3)), std::get<ComplexMatrix>(sample_matrix(c, 2)));
}

TEST(Sampling, GinoeEntryMoments) {
  const RealMatrix g = ginoe(1000, 5);
  const double n2 = 1e6;
  const double mean = g.sum() / n2;
  const double var = (g.array() - mean).square().sum() / (n2 - 1.0);
  EXPECT_LE(std::abs(mean), 4.0 / std::sqrt(n2));
  EXPECT_NEAR(var, 1.0, 0.02);
}

TEST(Sampling, GinueEntryMoments) {
  SampleRng rng(6, 0);
  const ComplexMatrix g = sample_ginue(1000, rng);
  EXPECT_NEAR(g.squaredNorm() / 1e6, 1.0, 0.02);
  EXPECT_NEAR(g.real().squaredNorm() / 1e6, 0.5, 0.01);
}

TEST(Config, Validation) {
  EXPECT_THROW(config(EnsembleKind::GinOE, 1, 1, 0).validate(), std::invalid_argument);
  EXPECT_THROW(config(EnsembleKind::GinOE, 4, 0, 0).validate(), std::invalid_argument);
}

TEST(EigenOverlaps, NormalMatrixHasUnitOverlaps) {
  const RealMatrix g = ginoe(30, 8);
  const RealMatrix s = g + g.transpose();
  const auto r = eigen_overlaps(s);
  ASSERT_FALSE(r.rejected);
  for (const auto& d : r.data) EXPECT_NEAR(d.self_overlap, 1.0, 1e-10);
}

TEST(EigenOverlaps, TwoByTwoAnalytic) {
  for (double a : {0.5, 3.0, 40.0}) {
    const double d = 0.25;
    RealMatrix g(2, 2);
    g << d, a, 0.0, -d;
    const auto r = eigen_overlaps(g);
    ASSERT_FALSE(r.rejected);
    const double expected = 1.0 + a * a / (4.0 * d * d);
    for (const auto& x : r.data) EXPECT_NEAR(x.self_overlap, expected, 1e-10 * expected);
  }
}

TEST(EigenOverlaps, RowSumsAndBiorthogonality) {
  for (int n : {5, 50, 100}) {
    const auto r = eigen_overlaps(ginoe(n, 9, static_cast<std::uint64_t>(n)));
    ASSERT_FALSE(r.rejected);
    const ComplexMatrix o = overlap_matrix(r);
    for (int i = 0; i < n; ++i) {
      EXPECT_NEAR(std::abs(o.row(i).sum() - 1.0), 0.0, 1e-8);
      EXPECT_NEAR(o(i, i).real(), r.data[i].self_overlap, 1e-9 * r.data[i].self_overlap);
      EXPECT_GE(r.data[i].self_overlap, 1.0 - 1e-10);
    }
    const ComplexMatrix id = r.left_rows * r.right;
    EXPECT_LT((id - ComplexMatrix::Identity(n, n)).norm(), 1e-10);
  }
}

TEST(EigenOverlaps, ConditionThresholdRejects) {
  RealMatrix g(2, 2);
  g << 1e-9, 1.0, 0.0, -1e-9;
  const auto r = eigen_overlaps(g, 1e6);
  EXPECT_TRUE(r.rejected);
  EXPECT_FALSE(r.reason.empty());
}

TEST(EigenOverlaps, RejectsNonSquare) {
  EXPECT_THROW(eigen_overlaps(RealMatrix(3, 2)), std::invalid_argument);
}

TEST(Backends, LapackAndEigenAgree) {
  for (int n : {4, 40}) {
    const RealMatrix g = ginoe(n, 10, static_cast<std::uint64_t>(n));
    const Eigensystem a = lapack_eigensystem(g, true);
    const Eigensystem b = eigen_library_eigensystem(g, true);
    EXPECT_LT(eigen_residual(g, a), kEigenResidualTolerance);
    EXPECT_LT(eigen_residual(g, b), kEigenResidualTolerance);
    auto key = [](std::complex<double> z) { return std::make_pair(z.real(), z.imag()); };
    std::vector<std::pair<double, double>> va, vb;
    for (int k = 0; k < n; ++k) {
      va.push_back(key(a.values(k)));
      vb.push_back(key(b.values(k)));
    }
    std::sort(va.begin(), va.end());
    std::sort(vb.begin(), vb.end());
    for (int k = 0; k < n; ++k) {
      EXPECT_NEAR(va[k].first, vb[k].first, 1e-10);
      EXPECT_NEAR(va[k].second, vb[k].second, 1e-10);
    }
  }
  SampleRng rng(11, 0);
  const ComplexMatrix gc = sample_ginue(30, rng);
  EXPECT_LT(eigen_residual(gc, lapack_eigensystem(gc, true)), kEigenResidualTolerance);
  EXPECT_LT(eigen_residual(gc, eigen_library_eigensystem(gc, true)), kEigenResidualTolerance);
}

TEST(Backends, ProbeFlagsCorruptedVectors) {
  const RealMatrix g = ginoe(60, 12);
  Eigensystem es = eigen_library_eigensystem(g, true);
  EXPECT_LT(eigen_residual_probe(g, es), kEigenResidualTolerance);
  es.vectors.col(7) += 1e-3 * es.vectors.col(8);
  EXPECT_GT(eigen_residual(g, es), 1e3 * kEigenResidualTolerance);
  EXPECT_GT(eigen_residual_probe(g, es), kEigenResidualTolerance);
}

TEST(Backends, CheckedEigensystemIsAccurate) {
  const RealMatrix g = ginoe(200, 13);
  EXPECT_LT(eigen_residual(g, checked_eigensystem(g)), kEigenResidualTolerance);
}

TEST(Backends, EnvironmentOverride) {
  ::setenv("GINIBRE_EIGENSOLVER", "eigen", 1);
  EXPECT_EQ(detail::backend_override(), EigenBackend::EigenLibrary);
  ::setenv("GINIBRE_EIGENSOLVER", "lapack", 1);
  EXPECT_EQ(detail::backend_override(), EigenBackend::Lapack);
  ::unsetenv("GINIBRE_EIGENSOLVER");
  EXPECT_FALSE(detail::backend_override().has_value());
}

TEST(Classification, SymmetricMatrixIsAllReal) {
  const RealMatrix g = ginoe(25, 14);
  auto r = eigen_overlaps(RealMatrix(g + g.transpose()));
  const auto c = classify_eigenvalues(r.data, 25);
  EXPECT_EQ(c.real.size(), 25u);
  EXPECT_TRUE(c.complex_upper.empty());
}

TEST(Classification, CountingIdentityAndPairs) {
  auto r = eigen_overlaps(ginoe(100, 15));
  const auto c = classify_eigenvalues(r.data, 100);
  EXPECT_EQ(c.real.size() + 2 * c.pairs, 100u);
  EXPECT_LE(c.max_pair_mismatch, 1e-6);
}

TEST(Classification, UnpairedEigenvalueIsAnError) {
  std::vector<SpectralDatum> data(2);
  data[0].z = {0.0, 1.0};
  data[1].z = {0.5, -2.0};
  EXPECT_THROW(classify_eigenvalues(data, 2), ClassificationError);
}

TEST(Classification, MeanRealCount) {
  // Expected number of real eigenvalues of a 20 x 20 real Ginibre matrix,
  // 1/2 + sqrt(2) 2F1(1, -1/2; N; 1/2) / B(N, 1/2), from mpmath.
  const double expected = 4.00114657681018777937;
  const auto c = config(EnsembleKind::GinOE, 20, 10000, 16);
  const auto [rows, summary] = collect_campaign(c);
  EXPECT_NEAR(static_cast<double>(summary.real_records) / summary.accepted, expected,
              0.05 * expected);
}

TEST(Schur, RandomMatricesAgree) {
  int checked = 0;
  for (int n : {2, 4, 6, 10}) {
    for (std::uint64_t i = 0; i < 5; ++i) {
      const RealMatrix g = ginoe(n, 17, i);
      const auto eo = eigen_overlaps(g);
      for (int k = 0; k < n; ++k) {
        if (eo.values(k).imag() <= 1e-6) continue;
        const auto r = schur_cross_check(g, {eo.values(k).real(), eo.values(k).imag()});
        EXPECT_NEAR(r.overlap_schur, r.overlap_direct, 1e-8 * r.overlap_direct);
        const auto& f = r.frame;
        EXPECT_NEAR(f.y * f.y, f.b * f.c, 1e-10 * f.y * f.y);
        EXPECT_GE(f.b, f.c);
        const RealMatrix back = f.q * f.reassemble() * f.q.transpose();
        EXPECT_LT((back - g).norm(), 1e-10 * g.norm());
        ++checked;
      }
    }
  }
  EXPECT_GT(checked, 20);
}

TEST(Schur, ConstructedBlock) {
  // [[x, b], [-c, x]] with b = 2, c = 0.5 above a triangular block; W = 0.
  RealMatrix t = RealMatrix::Zero(5, 5);
  t(0, 0) = t(1, 1) = 0.3;
  t(0, 1) = 2.0;
  t(1, 0) = -0.5;
  t(2, 2) = 1.0;
  t(3, 3) = -2.0;
  t(4, 4) = 3.0;
  t(2, 3) = 0.7;
  t(3, 4) = -0.4;
  const RealMatrix q = Eigen::HouseholderQR<RealMatrix>(ginoe(5, 18)).householderQ();
  const RealMatrix g = q * t * q.transpose();
  const auto r = schur_cross_check(g, {0.3, 1.0});
  EXPECT_NEAR(r.overlap_schur, 1.5625, 1e-10);
  EXPECT_NEAR(r.overlap_direct, 1.5625, 1e-10);
  EXPECT_NEAR(r.frame.y, 1.0, 1e-12);
  EXPECT_NEAR(r.frame.delta_schur, 1.5, 1e-12);
  const double y2 = 1.0, d = 1.5;
  EXPECT_DOUBLE_EQ((2.0 + (d * d + 2.0 * y2) / y2) / 4.0, (2.0 + (2.0 * 2.0 + 0.25) / 1.0) / 4.0);
}

TEST(Schur, RealTargetIsDomainError) {
  const RealMatrix g = ginoe(4, 19);
  EXPECT_THROW(schur_cross_check(g, {0.1, 0.0}), DomainError);
  EXPECT_THROW(schur_cross_check(g, {100.0, 100.0}), DomainError);
}

TEST(Perturbation, IdentityMovesEveryEigenvalueAtUnitRate) {
  const RealMatrix g = ginoe(12, 20);
  const RealMatrix p = RealMatrix::Identity(12, 12);
  for (int k = 0; k < 12; ++k) {
    const auto r = perturbation_experiment(g, k, p, 1e-7);
    EXPECT_NEAR(r.derivative.re, 1.0, 1e-10);
    EXPECT_NEAR(r.derivative.im, 0.0, 1e-10);
  }
}

TEST(Perturbation, BoundAndFiniteDifference) {
  const RealMatrix g = ginoe(20, 21);
  int tracked = 0;
  for (std::uint64_t t = 0; t < 1000; ++t) {
    SampleRng rng(22, t);
    const RealMatrix p = random_unit_perturbation_real(20, rng);
    const int k = static_cast<int>(t % 20);
    try {
      const auto r = perturbation_experiment(g, k, p, 1e-7);
      const double mag = std::hypot(r.derivative.re, r.derivative.im);
      EXPECT_LE(mag, r.bound * (1.0 + 1e-8));
      if (t < 100) {
        const double e = std::hypot(r.fd_estimate.re - r.derivative.re,
                                    r.fd_estimate.im - r.derivative.im);
        EXPECT_LE(e, 1e-6 * (1.0 + mag));
      }
      ++tracked;
    } catch (const TrackingError&) {
    }
  }
  EXPECT_GT(tracked, 950);
}

TEST(Perturbation, InputValidation) {
  const RealMatrix g = ginoe(5, 23);
  const RealMatrix p = RealMatrix::Identity(5, 5);
  EXPECT_THROW(perturbation_experiment(g, 0, p, 1e-3), DomainError);
  EXPECT_THROW(perturbation_experiment(g, 0, RealMatrix(2.0 * p), 1e-7), DomainError);
  EXPECT_THROW(perturbation_experiment(g, 9, p, 1e-7), DomainError);
}

TEST(Campaign, DeterministicAcrossRunsAndThreads) {
  const auto c = config(EnsembleKind::GinOE, 12, 60, 24);
  CampaignOptions one;
  one.threads = 1;
  CampaignOptions four;
  four.threads = 4;
  four.block_size = 7;
  const auto a = collect_campaign(c, one).first;
  const auto b = collect_campaign(c, one).first;
  const auto d = collect_campaign(c, four).first;
  EXPECT_EQ(a, b);
  EXPECT_EQ(a, d);
  EXPECT_EQ(a.size(), 12u * 60u);
  for (std::size_t i = 1; i < a.size(); ++i) {
    const bool ordered = a[i - 1].sample_index < a[i].sample_index ||
                         (a[i - 1].sample_index == a[i].sample_index &&
                          a[i - 1].eigen_index < a[i].eigen_index);
    EXPECT_TRUE(ordered);
  }
}

TEST(Campaign, SummaryCounts) {
  const auto c = config(EnsembleKind::GinOE, 50, 200, 25);
  const auto [rows, s] = collect_campaign(c);
  EXPECT_EQ(s.accepted + s.rejected, 200);
  EXPECT_EQ(s.records, static_cast<std::int64_t>(rows.size()));
  EXPECT_EQ(s.real_records + s.complex_records, s.records);
  EXPECT_EQ(s.records, 50 * s.accepted);
  EXPECT_GE(s.min_self_overlap, 1.0 - 1e-10);
  EXPECT_LE(s.max_pair_mismatch, 1e-6);
  EXPECT_FALSE(s.rejection_warning);
}

TEST(Campaign, RejectionWarning) {
  auto c = config(EnsembleKind::GinUE, 8, 20, 26);
  c.reject_threshold = 1.0;  // every matrix is rejected
  const auto [rows, s] = collect_campaign(c);
  EXPECT_TRUE(rows.empty());
  EXPECT_EQ(s.rejected, 20);
  EXPECT_EQ(s.rejections.size(), 20u);
  EXPECT_TRUE(s.rejection_warning);
}

}  // namespace
}  // namespace ginibre
