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
#include <atomic>
#include <chrono>
#include <cmath>
#include <complex>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <functional>
#include <limits>
#include <mutex>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#ifndef lapack_complex_float
#define lapack_complex_float std::complex<float>
#endif
#ifndef lapack_complex_double
#define lapack_complex_double std::complex<double>
#endif
#include <lapacke.h>

#include "ginibre/errors.hpp"
#include "ginibre/types.hpp"

// Monte Carlo engine: Ginibre sampling, bi-orthogonal eigenvector overlaps,
// the incomplete Schur cross-check and eigenvalue perturbation experiments.
namespace ginibre {

using RealMatrix = Eigen::MatrixXd;
using ComplexMatrix = Eigen::MatrixXcd;
using SampledMatrix = std::variant<RealMatrix, ComplexMatrix>;

struct EnsembleConfig {
  EnsembleKind kind = EnsembleKind::GinOE;
  int n = 2;
  std::int64_t samples = 1;
  std::uint64_t master_seed = 0;
  double reject_threshold = 1e12;

  void validate() const {
    if (n < 2) throw std::invalid_argument("EnsembleConfig: n must be >= 2");
    if (samples < 1) {
      throw std::invalid_argument("EnsembleConfig: samples must be >= 1");
    }
    if (!(reject_threshold > 0.0)) {
      throw std::invalid_argument("EnsembleConfig: reject_threshold must be > 0");
    }
  }
};

// Random stream owned by one sample. Seeded from (master_seed, index) only,
// so a sample's content does not depend on which worker draws it.
class SampleRng {
 public:
  SampleRng(std::uint64_t master_seed, std::uint64_t index) {
    std::seed_seq seq{static_cast<std::uint32_t>(master_seed),
                      static_cast<std::uint32_t>(master_seed >> 32),
                      static_cast<std::uint32_t>(index),
                      static_cast<std::uint32_t>(index >> 32),
                      0x6a09e667u};
    engine_.seed(seq);
  }

  double normal() { return normal_(engine_); }
  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

inline RealMatrix sample_ginoe(int n, SampleRng& rng) {
  RealMatrix g(n, n);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) g(i, j) = rng.normal();
  return g;
}

inline ComplexMatrix sample_ginue(int n, SampleRng& rng) {
  const double s = std::sqrt(0.5);
  ComplexMatrix g(n, n);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      const double re = rng.normal();
      const double im = rng.normal();
      g(i, j) = {s * re, s * im};
    }
  return g;
}

inline SampledMatrix sample_matrix(const EnsembleConfig& config,
                                   std::int64_t sample_index) {
  config.validate();
  SampleRng rng(config.master_seed, static_cast<std::uint64_t>(sample_index));
  if (config.kind == EnsembleKind::GinOE) return sample_ginoe(config.n, rng);
  return sample_ginue(config.n, rng);
}

// Eigenvalues with right eigenvectors as columns.
struct Eigensystem {
  Eigen::VectorXcd values;
  ComplexMatrix vectors;
};

inline Eigensystem lapack_eigensystem(const RealMatrix& g, bool want_vectors) {
  const int n = static_cast<int>(g.rows());
  if (g.cols() != n) throw std::invalid_argument("eigensystem: matrix not square");
  RealMatrix a = g;
  std::vector<double> wr(n), wi(n);
  RealMatrix vr(want_vectors ? n : 1, want_vectors ? n : 1);
  const lapack_int info = LAPACKE_dgeev(
      LAPACK_COL_MAJOR, 'N', want_vectors ? 'V' : 'N', n, a.data(), n, wr.data(),
      wi.data(), nullptr, 1, vr.data(), want_vectors ? n : 1);
  if (info != 0) {
    throw std::runtime_error("eigensolver failure (dgeev info=" +
                             std::to_string(info) + ")");
  }
  Eigensystem es;
  es.values.resize(n);
  for (int j = 0; j < n; ++j) es.values(j) = {wr[j], wi[j]};
  if (!want_vectors) return es;
  es.vectors.resize(n, n);
  for (int j = 0; j < n; ++j) {
    if (wi[j] == 0.0) {
      es.vectors.col(j) = vr.col(j).cast<std::complex<double>>();
    } else if (wi[j] > 0.0 && j + 1 < n) {
      for (int i = 0; i < n; ++i) {
        es.vectors(i, j) = {vr(i, j), vr(i, j + 1)};
        es.vectors(i, j + 1) = {vr(i, j), -vr(i, j + 1)};
      }
      ++j;
    } else {
      throw std::runtime_error("eigensolver returned an unpaired complex eigenvalue");
    }
  }
  return es;
}

inline Eigensystem lapack_eigensystem(const ComplexMatrix& g, bool want_vectors) {
  const int n = static_cast<int>(g.rows());
  if (g.cols() != n) throw std::invalid_argument("eigensystem: matrix not square");
  ComplexMatrix a = g;
  Eigensystem es;
  es.values.resize(n);
  ComplexMatrix vr(want_vectors ? n : 1, want_vectors ? n : 1);
  const lapack_int info = LAPACKE_zgeev(
      LAPACK_COL_MAJOR, 'N', want_vectors ? 'V' : 'N', n, a.data(), n,
      es.values.data(), nullptr, 1, vr.data(), want_vectors ? n : 1);
  if (info != 0) {
    throw std::runtime_error("eigensolver failure (zgeev info=" +
                             std::to_string(info) + ")");
  }
  if (want_vectors) es.vectors = std::move(vr);
  return es;
}

inline Eigensystem eigen_library_eigensystem(const RealMatrix& g, bool want_vectors) {
  Eigen::EigenSolver<RealMatrix> solver(g, want_vectors);
  if (solver.info() != Eigen::Success) {
    throw std::runtime_error("eigensolver failure (Eigen real QR did not converge)");
  }
  Eigensystem es;
  es.values = solver.eigenvalues();
  if (want_vectors) es.vectors = solver.eigenvectors();
  return es;
}

inline Eigensystem eigen_library_eigensystem(const ComplexMatrix& g, bool want_vectors) {
  Eigen::ComplexEigenSolver<ComplexMatrix> solver(g, want_vectors);
  if (solver.info() != Eigen::Success) {
    throw std::runtime_error("eigensolver failure (Eigen complex QR did not converge)");
  }
  Eigensystem es;
  es.values = solver.eigenvalues();
  if (want_vectors) es.vectors = solver.eigenvectors();
  return es;
}

// Largest |G v - lambda v| / |v| over columns, relative to |G|_F.
template <class Matrix>
double eigen_residual(const Matrix& g, const Eigensystem& es) {
  const ComplexMatrix gc = g.template cast<std::complex<double>>();
  const ComplexMatrix r = gc * es.vectors - es.vectors * es.values.asDiagonal();
  double worst = 0.0;
  for (int j = 0; j < r.cols(); ++j) {
    const double v = es.vectors.col(j).norm();
    worst = std::max(worst, v > 0.0 ? r.col(j).norm() / v
                                    : std::numeric_limits<double>::infinity());
  }
  const double scale = g.norm();
  return scale > 0.0 ? worst / scale : worst;
}

// Cheap screen of the same quantity: |(G V - V Lambda) x| / (|G|_F sum|x_j|)
// for two fixed weight vectors x; any corrupted column shows up unless its
// residual happens to cancel in both combinations.
template <class Matrix>
double eigen_residual_probe(const Matrix& g, const Eigensystem& es) {
  const int n = static_cast<int>(es.vectors.cols());
  const ComplexMatrix gc = g.template cast<std::complex<double>>();
  double worst = 0.0;
  for (int k = 1; k <= 2; ++k) {
    Eigen::VectorXcd x(n);
    double l1 = 0.0;
    for (int j = 0; j < n; ++j) {
      const double norm = es.vectors.col(j).norm();
      x(j) = std::polar(1.0 + 0.5 * std::cos(k * (j + 1.0)), 0.7 * k * j) /
             (norm > 0.0 ? norm : 1.0);
      l1 += std::abs(x(j)) * norm;
    }
    const Eigen::VectorXcd vx = es.vectors * x;
    const Eigen::VectorXcd r =
        gc * vx - es.vectors * es.values.cwiseProduct(x);
    worst = std::max(worst, r.norm() / l1);
  }
  const double scale = g.norm();
  return scale > 0.0 ? worst / scale : worst;
}

inline constexpr double kEigenResidualTolerance = 1e-9;

enum class EigenBackend { Lapack, EigenLibrary };

namespace detail {

// Some optimized BLAS builds return corrupted real Schur forms above a size
// threshold. Probe a few sizes once per process.
inline bool real_lapack_is_sound() {
  for (int n : {64, 160, 256}) {
    SampleRng rng(0x5eedULL, static_cast<std::uint64_t>(n));
    const RealMatrix g = sample_ginoe(n, rng);
    try {
      const Eigensystem es = lapack_eigensystem(g, true);
      if (!(eigen_residual(g, es) <= kEigenResidualTolerance)) return false;
    } catch (const std::runtime_error&) {
      return false;
    }
  }
  return true;
}

inline std::optional<EigenBackend> backend_override() {
  if (const char* e = std::getenv("GINIBRE_EIGENSOLVER")) {
    const std::string v(e);
    if (v == "eigen") return EigenBackend::EigenLibrary;
    if (v == "lapack") return EigenBackend::Lapack;
  }
  return std::nullopt;
}

}  // namespace detail

// Backend for real matrices: LAPACK when it passes the probe, else Eigen.
// GINIBRE_EIGENSOLVER=lapack|eigen overrides.
inline EigenBackend real_backend() {
  static const EigenBackend b = [] {
    if (const auto o = detail::backend_override()) return *o;
    return detail::real_lapack_is_sound() ? EigenBackend::Lapack : EigenBackend::EigenLibrary;
  }();
  return b;
}

// Complex matrices have not shown the defect; the residual guard covers them.
inline EigenBackend complex_backend() {
  static const EigenBackend b = detail::backend_override().value_or(EigenBackend::Lapack);
  return b;
}

inline Eigensystem eigensystem(const RealMatrix& g, bool want_vectors) {
  return real_backend() == EigenBackend::Lapack ? lapack_eigensystem(g, want_vectors)
                                                : eigen_library_eigensystem(g, want_vectors);
}

inline Eigensystem eigensystem(const ComplexMatrix& g, bool want_vectors) {
  return complex_backend() == EigenBackend::Lapack ? lapack_eigensystem(g, want_vectors)
                                                   : eigen_library_eigensystem(g, want_vectors);
}

// Full eigendecomposition whose residual is checked; a failing LAPACK result
// is recomputed with Eigen before giving up.
template <class Matrix>
Eigensystem checked_eigensystem(const Matrix& g) {
  Eigensystem es = eigensystem(g, true);
  if (eigen_residual_probe(g, es) <= kEigenResidualTolerance) return es;
  es = eigen_library_eigensystem(g, true);
  const double res = eigen_residual(g, es);
  if (!(res <= kEigenResidualTolerance)) {
    throw std::runtime_error("eigenvector residual " + std::to_string(res) +
                             " above tolerance");
  }
  return es;
}

// Right eigenvectors S, left eigenvectors as the rows of S^{-1}, and the
// self-overlaps O_nn = |row_n(S^{-1})|^2 |col_n(S)|^2.
struct EigenOverlapResult {
  std::vector<SpectralDatum> data;
  Eigen::VectorXcd values;
  ComplexMatrix right;      // unit-norm columns
  ComplexMatrix left_rows;  // S^{-1}
  double condition = 1.0;   // 1-norm condition estimate of S
  bool rejected = false;
  std::string reason;
};

template <class Matrix>
EigenOverlapResult eigen_overlaps(const Matrix& g,
                                  double reject_threshold = 1e12) {
  if (g.rows() != g.cols() || g.rows() < 2) {
    throw std::invalid_argument("eigen_overlaps: need a square matrix, N >= 2");
  }
  EigenOverlapResult r;
  Eigensystem es;
  try {
    es = checked_eigensystem(g);
  } catch (const std::runtime_error& e) {
    r.rejected = true;
    r.reason = e.what();
    r.condition = std::numeric_limits<double>::infinity();
    return r;
  }
  const int n = static_cast<int>(g.rows());
  r.values = es.values;
  r.right = std::move(es.vectors);
  for (int j = 0; j < n; ++j) {
    const double norm = r.right.col(j).norm();
    if (norm > 0.0) r.right.col(j) /= norm;
  }
  Eigen::PartialPivLU<ComplexMatrix> lu(r.right);
  const double rcond = lu.rcond();
  r.condition = rcond > 0.0 ? 1.0 / rcond : std::numeric_limits<double>::infinity();
  if (!(r.condition <= reject_threshold)) {
    r.rejected = true;
    r.reason = "eigenvector matrix condition number " +
               std::to_string(r.condition) + " exceeds threshold";
    return r;
  }
  r.left_rows = lu.solve(ComplexMatrix::Identity(n, n));
  r.data.resize(n);
  for (int j = 0; j < n; ++j) {
    SpectralDatum& d = r.data[j];
    d.z = {r.values(j).real(), r.values(j).imag()};
    d.self_overlap = r.left_rows.row(j).squaredNorm() * r.right.col(j).squaredNorm();
    d.eigen_index = j;
    if (!std::isfinite(d.self_overlap)) {
      r.rejected = true;
      r.reason = "non-finite self-overlap";
      return r;
    }
  }
  return r;
}

// Full overlap matrix O_nm = (x_Ln^dag x_Lm)(x_Rm^dag x_Rn).
inline ComplexMatrix overlap_matrix(const EigenOverlapResult& r) {
  const ComplexMatrix ll = r.left_rows * r.left_rows.adjoint();
  const ComplexMatrix rr = r.right.adjoint() * r.right;
  return ll.cwiseProduct(rr.transpose());
}

struct Classification {
  std::vector<SpectralDatum> real;
  std::vector<SpectralDatum> complex_upper;
  std::size_t pairs = 0;
  double max_pair_mismatch = 0.0;  // relative overlap difference within pairs
};

inline double real_threshold(int n) { return 1e-8 * std::sqrt(static_cast<double>(n)); }

// Splits the spectrum of one real matrix into real eigenvalues and conjugate
// pairs (greedy nearest-conjugate matching). Marks `is_real` in `data`.
inline Classification classify_eigenvalues(std::vector<SpectralDatum>& data, int n,
                                           double pair_tolerance = 1e-6) {
  const double thr = real_threshold(n);
  Classification c;
  std::vector<std::size_t> upper, lower;
  for (std::size_t i = 0; i < data.size(); ++i) {
    data[i].is_real = std::abs(data[i].z.im) <= thr;
    if (data[i].is_real) {
      c.real.push_back(data[i]);
    } else if (data[i].z.im > 0.0) {
      upper.push_back(i);
    } else {
      lower.push_back(i);
    }
  }
  if (upper.size() != lower.size()) {
    throw ClassificationError("unequal numbers of upper and lower half-plane eigenvalues");
  }
  std::vector<bool> used(lower.size(), false);
  for (std::size_t ui : upper) {
    const ComplexPoint target = data[ui].z.conj();
    std::size_t best = lower.size();
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < lower.size(); ++k) {
      if (used[k]) continue;
      const ComplexPoint& l = data[lower[k]].z;
      const double d = std::hypot(l.re - target.re, l.im - target.im);
      if (d < best_d) {
        best_d = d;
        best = k;
      }
    }
    if (best == lower.size() || best_d > thr * (1.0 + data[ui].z.abs())) {
      throw ClassificationError("complex eigenvalue without a conjugate partner");
    }
    used[best] = true;
    const double o1 = data[ui].self_overlap;
    const double o2 = data[lower[best]].self_overlap;
    const double mismatch = std::abs(o1 - o2) / std::max(o1, o2);
    c.max_pair_mismatch = std::max(c.max_pair_mismatch, mismatch);
    if (mismatch > pair_tolerance) {
      throw ClassificationError("conjugate pair carries unequal self-overlaps");
    }
    c.complex_upper.push_back(data[ui]);
    ++c.pairs;
  }
  return c;
}

// Incomplete Schur frame of a real matrix with respect to a complex
// eigenvalue x + iy (y > 0):  Q^T G Q = [[x, b, w1^T], [-c, x, w2^T], [0, 0, G2]].
struct SchurFrame {
  double x = 0.0;
  double y = 0.0;
  double b = 0.0;
  double c = 0.0;
  double delta_schur = 0.0;  // b - c
  Eigen::VectorXd w1;
  Eigen::VectorXd w2;
  RealMatrix g2;
  RealMatrix q;  // orthogonal, G = Q G~ Q^T

  RealMatrix reassemble() const {
    const int m = static_cast<int>(g2.rows());
    RealMatrix t = RealMatrix::Zero(m + 2, m + 2);
    t(0, 0) = x;
    t(0, 1) = b;
    t(1, 0) = -c;
    t(1, 1) = x;
    t.block(0, 2, 1, m) = w1.transpose();
    t.block(1, 2, 1, m) = w2.transpose();
    t.block(2, 2, m, m) = g2;
    return t;
  }
};

struct SchurCheckResult {
  double overlap_schur = 0.0;
  double overlap_direct = 0.0;
  SchurFrame frame;
};

namespace detail {

inline Eigen::Matrix2d rotation(double theta) {
  Eigen::Matrix2d r;
  r << std::cos(theta), -std::sin(theta), std::sin(theta), std::cos(theta);
  return r;
}

}  // namespace detail

// Builds the frame for the upper-half-plane eigenvalue nearest to `target`
// (or its conjugate), evaluates the self-overlap in Schur variables and
// returns it next to the eigendecomposition value.
inline SchurCheckResult schur_cross_check(const RealMatrix& g, ComplexPoint target) {
  const int n = static_cast<int>(g.rows());
  if (g.cols() != n || n < 2) {
    throw DomainError("schur_cross_check: need a square matrix, N >= 2");
  }
  const double thr = real_threshold(n);
  if (std::abs(target.im) <= thr) {
    throw DomainError("schur_cross_check: target eigenvalue is real");
  }
  if (target.im < 0.0) target = target.conj();

  const EigenOverlapResult eo = eigen_overlaps(g, std::numeric_limits<double>::infinity());
  if (eo.rejected) throw DomainError("schur_cross_check: " + eo.reason);
  int j = -1;
  double best = std::numeric_limits<double>::infinity();
  for (int k = 0; k < n; ++k) {
    if (eo.values(k).imag() <= thr) continue;
    const double d = std::abs(eo.values(k) - std::complex<double>(target.re, target.im));
    if (d < best) {
      best = d;
      j = k;
    }
  }
  if (j < 0 || best > 1e-6 * (1.0 + target.abs())) {
    throw DomainError("schur_cross_check: target is not an eigenvalue of the matrix");
  }

  // Orthonormal basis of the real invariant subspace spanned by Re v, Im v.
  RealMatrix uw(n, 2);
  uw.col(0) = eo.right.col(j).real();
  uw.col(1) = eo.right.col(j).imag();
  Eigen::HouseholderQR<RealMatrix> qr(uw);
  RealMatrix q = qr.householderQ() * RealMatrix::Identity(n, n);
  RealMatrix gt = q.transpose() * g * q;

  const double scale = std::max(g.norm(), 1.0);
  if (n > 2 && gt.block(2, 0, n - 2, 2).norm() > 1e-8 * scale) {
    throw DomainError("schur_cross_check: failed to isolate the 2x2 block");
  }

  // Rotate the leading block to equal diagonal entries, then fix signs and
  // order so that the block reads [[x, b], [-c, x]] with b >= c > 0.
  Eigen::Matrix2d a = gt.topLeftCorner(2, 2);
  const double p = 0.5 * (a(0, 0) - a(1, 1));
  const double m = 0.5 * (a(0, 1) + a(1, 0));
  Eigen::Matrix2d t = detail::rotation(0.5 * std::atan2(-p, m));
  Eigen::Matrix2d at = t.transpose() * a * t;
  if (at(0, 1) < 0.0) {
    Eigen::Matrix2d flip = Eigen::Vector2d(1.0, -1.0).asDiagonal();
    t = t * flip;
    at = t.transpose() * a * t;
  }
  if (at(0, 1) < -at(1, 0)) {
    t = t * detail::rotation(0.5 * 3.141592653589793238462643383279502884);
    at = t.transpose() * a * t;
  }
  q.leftCols(2) = (q.leftCols(2) * t).eval();
  gt = q.transpose() * g * q;

  SchurFrame f;
  f.x = 0.5 * (gt(0, 0) + gt(1, 1));
  f.b = gt(0, 1);
  f.c = -gt(1, 0);
  if (!(f.b > 0.0 && f.c > 0.0)) {
    throw DomainError("schur_cross_check: 2x2 block does not encode a complex pair");
  }
  f.y = std::sqrt(f.b * f.c);
  f.delta_schur = f.b - f.c;
  f.w1 = gt.block(0, 2, 1, n - 2).transpose();
  f.w2 = gt.block(1, 2, 1, n - 2).transpose();
  f.g2 = gt.block(2, 2, n - 2, n - 2);
  f.q = q;

  double bb = 0.0;
  if (n > 2) {
    const std::complex<double> z(f.x, f.y);
    const std::complex<double> i(0.0, 1.0);
    const Eigen::VectorXcd rhs =
        (f.w1.cast<std::complex<double>>() -
         i * std::sqrt(f.b / f.c) * f.w2.cast<std::complex<double>>()) /
        std::sqrt(2.0);
    // b^dag (z - G2) = rhs^T  <=>  (z - G2)^T b^dag^T = rhs
    const ComplexMatrix mt =
        z * ComplexMatrix::Identity(n - 2, n - 2) - f.g2.transpose().cast<std::complex<double>>();
    const Eigen::VectorXcd bdag = mt.partialPivLu().solve(rhs);
    bb = bdag.squaredNorm();
  }
  const double y2 = f.y * f.y;
  const double c1 = 0.25 * (2.0 + (f.delta_schur * f.delta_schur + 2.0 * y2) / y2);
  const double c2 = 0.5 * (1.0 + std::exp(-2.0 * std::asinh(f.delta_schur / (2.0 * f.y))));

  SchurCheckResult res;
  res.overlap_schur = c1 + c2 * bb;
  res.overlap_direct = eo.data[j].self_overlap;
  res.frame = std::move(f);
  return res;
}

struct PerturbationResult {
  ComplexPoint derivative;
  double bound = 0.0;
  ComplexPoint fd_estimate;
  double epsilon = 0.0;
};

namespace detail {

inline std::complex<double> track_eigenvalue(const Eigen::VectorXcd& perturbed,
                                             std::complex<double> z0, double gap) {
  double d1 = std::numeric_limits<double>::infinity();
  double d2 = d1;
  int best = -1;
  for (int k = 0; k < perturbed.size(); ++k) {
    const double d = std::abs(perturbed(k) - z0);
    if (d < d1) {
      d2 = d1;
      d1 = d;
      best = k;
    } else if (d < d2) {
      d2 = d;
    }
  }
  if (best < 0 || !(d1 < 0.5 * gap) || !(d2 > 0.5 * gap)) {
    throw TrackingError("eigenvalue tracking is ambiguous under the perturbation");
  }
  return perturbed(best);
}

template <class Matrix>
double spectral_norm(const Matrix& p) {
  Eigen::JacobiSVD<Matrix> svd(p);
  return svd.singularValues()(0);
}

}  // namespace detail

// First-order eigenvalue sensitivity z_n'(0) = x_Ln^dag P x_Rn versus a
// central finite difference and the bound sqrt(O_nn).
template <class Matrix>
PerturbationResult perturbation_experiment(const Matrix& g, int eigen_index,
                                           const Matrix& p, double epsilon) {
  const int n = static_cast<int>(g.rows());
  if (g.cols() != n || p.rows() != n || p.cols() != n) {
    throw DomainError("perturbation_experiment: shape mismatch");
  }
  if (!(epsilon >= 1e-9 && epsilon <= 1e-5)) {
    throw DomainError("perturbation_experiment: epsilon must lie in [1e-9, 1e-5]");
  }
  if (std::abs(detail::spectral_norm(p) - 1.0) > 1e-10) {
    throw DomainError("perturbation_experiment: P must have unit spectral norm");
  }
  if (eigen_index < 0 || eigen_index >= n) {
    throw DomainError("perturbation_experiment: eigen_index out of range");
  }
  const EigenOverlapResult eo = eigen_overlaps(g, std::numeric_limits<double>::infinity());
  if (eo.rejected) throw DomainError("perturbation_experiment: " + eo.reason);

  const ComplexMatrix pc = p.template cast<std::complex<double>>();
  const std::complex<double> deriv =
      (eo.left_rows.row(eigen_index) * pc * eo.right.col(eigen_index))(0, 0);

  const std::complex<double> z0 = eo.values(eigen_index);
  double gap = std::numeric_limits<double>::infinity();
  for (int k = 0; k < n; ++k) {
    if (k != eigen_index) gap = std::min(gap, std::abs(eo.values(k) - z0));
  }
  const Matrix gp = g + epsilon * p;
  const Matrix gm = g - epsilon * p;
  const auto zp = detail::track_eigenvalue(eigensystem(gp, false).values, z0, gap);
  const auto zm = detail::track_eigenvalue(eigensystem(gm, false).values, z0, gap);
  const std::complex<double> fd = (zp - zm) / (2.0 * epsilon);

  PerturbationResult r;
  r.derivative = {deriv.real(), deriv.imag()};
  r.bound = std::sqrt(eo.data[eigen_index].self_overlap);
  r.fd_estimate = {fd.real(), fd.imag()};
  r.epsilon = epsilon;
  return r;
}

// Random perturbation direction with unit spectral norm.
inline RealMatrix random_unit_perturbation_real(int n, SampleRng& rng) {
  RealMatrix p = sample_ginoe(n, rng);
  return p / detail::spectral_norm(p);
}

inline ComplexMatrix random_unit_perturbation_complex(int n, SampleRng& rng) {
  ComplexMatrix p = sample_ginue(n, rng);
  return p / detail::spectral_norm(p);
}

struct RejectionRecord {
  std::int64_t sample_index = 0;
  std::string reason;
  double condition = 0.0;
};

// Outcome of processing one matrix.
struct SampleOutcome {
  std::int64_t sample_index = 0;
  std::vector<SpectralDatum> data;
  bool rejected = false;
  std::string reason;
  double condition = 0.0;
  double max_pair_mismatch = 0.0;
};

inline SampleOutcome process_sample(const EnsembleConfig& config,
                                    std::int64_t sample_index) {
  SampleOutcome out;
  out.sample_index = sample_index;
  const SampledMatrix m = sample_matrix(config, sample_index);
  EigenOverlapResult eo = std::visit(
      [&](const auto& g) { return eigen_overlaps(g, config.reject_threshold); }, m);
  out.condition = eo.condition;
  if (eo.rejected) {
    out.rejected = true;
    out.reason = eo.reason;
    return out;
  }
  if (config.kind == EnsembleKind::GinOE) {
    try {
      const Classification c = classify_eigenvalues(eo.data, config.n);
      out.max_pair_mismatch = c.max_pair_mismatch;
    } catch (const ClassificationError& e) {
      out.rejected = true;
      out.reason = e.what();
      return out;
    }
  }
  for (auto& d : eo.data) d.sample_index = sample_index;
  out.data = std::move(eo.data);
  return out;
}

struct CampaignOptions {
  int threads = 0;             // 0: GINIBRE_THREADS, else all cores
  bool deterministic = true;   // false: GINIBRE_DETERMINISTIC=0 semantics
  std::int64_t block_size = 0; // samples per scheduling block; 0: automatic
};

// Reads GINIBRE_THREADS and GINIBRE_DETERMINISTIC.
inline CampaignOptions campaign_options_from_env() {
  CampaignOptions o;
  if (const char* t = std::getenv("GINIBRE_THREADS")) {
    o.threads = std::max(0, std::atoi(t));
  }
  if (const char* d = std::getenv("GINIBRE_DETERMINISTIC")) {
    o.deterministic = std::string(d) != "0";
  }
  return o;
}

inline int resolve_threads(int requested) {
  if (requested > 0) return requested;
  if (const char* t = std::getenv("GINIBRE_THREADS")) {
    const int v = std::atoi(t);
    if (v > 0) return v;
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

struct CampaignSummary {
  EnsembleConfig config;
  std::int64_t accepted = 0;
  std::int64_t rejected = 0;
  std::int64_t records = 0;
  std::int64_t real_records = 0;
  std::int64_t complex_records = 0;
  std::vector<RejectionRecord> rejections;
  double elapsed_seconds = 0.0;
  int threads = 1;
  bool rejection_warning = false;  // rejection rate above 0.1%
  double min_self_overlap = std::numeric_limits<double>::infinity();
  double max_pair_mismatch = 0.0;
  double max_condition = 0.0;
};

using RecordSink = std::function<void(const std::vector<SpectralDatum>&)>;

// Runs sample -> overlaps -> classification over all samples. Records are
// handed to `sink` one sample at a time, ordered by (sample_index,
// eigen_index) regardless of the worker count.
inline CampaignSummary run_campaign(const EnsembleConfig& config,
                                   const RecordSink& sink,
                                   CampaignOptions options = {}) {
  config.validate();
  const auto t0 = std::chrono::steady_clock::now();
  CampaignSummary s;
  s.config = config;
  s.threads = resolve_threads(options.threads);
  const std::int64_t block =
      options.block_size > 0 ? options.block_size
                             : std::max<std::int64_t>(16, 8 * s.threads);

  std::vector<SampleOutcome> slots;
  for (std::int64_t start = 0; start < config.samples; start += block) {
    const std::int64_t count = std::min(block, config.samples - start);
    slots.assign(static_cast<std::size_t>(count), SampleOutcome{});
    std::vector<std::int64_t> finish_order;
    finish_order.reserve(static_cast<std::size_t>(count));
    std::mutex order_mutex;
    std::atomic<std::int64_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto worker = [&] {
      for (;;) {
        const std::int64_t k = next.fetch_add(1);
        if (k >= count) return;
        try {
          slots[static_cast<std::size_t>(k)] = process_sample(config, start + k);
        } catch (...) {
          std::lock_guard<std::mutex> lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
        std::lock_guard<std::mutex> lock(order_mutex);
        finish_order.push_back(k);
      }
    };
    const int nt = static_cast<int>(std::min<std::int64_t>(s.threads, count));
    if (nt <= 1) {
      worker();
    } else {
      std::vector<std::thread> pool;
      for (int t = 0; t < nt; ++t) pool.emplace_back(worker);
      for (auto& th : pool) th.join();
    }
    if (failure) std::rethrow_exception(failure);

    if (options.deterministic) {
      std::sort(finish_order.begin(), finish_order.end());
    }
    for (std::int64_t k : finish_order) {
      SampleOutcome& o = slots[static_cast<std::size_t>(k)];
      if (o.rejected) {
        ++s.rejected;
        s.rejections.push_back({o.sample_index, o.reason, o.condition});
        continue;
      }
      ++s.accepted;
      s.max_condition = std::max(s.max_condition, o.condition);
      s.max_pair_mismatch = std::max(s.max_pair_mismatch, o.max_pair_mismatch);
      for (const auto& d : o.data) {
        ++s.records;
        (d.is_real ? s.real_records : s.complex_records) += 1;
        s.min_self_overlap = std::min(s.min_self_overlap, d.self_overlap);
      }
      sink(o.data);
    }
  }
  s.rejection_warning =
      static_cast<double>(s.rejected) > 1e-3 * static_cast<double>(config.samples);
  s.elapsed_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return s;
}

// Convenience wrapper collecting every record in memory.
inline std::pair<std::vector<SpectralDatum>, CampaignSummary> collect_campaign(
    const EnsembleConfig& config, CampaignOptions options = {}) {
  std::vector<SpectralDatum> all;
  auto summary = run_campaign(
      config, [&](const std::vector<SpectralDatum>& d) {
        all.insert(all.end(), d.begin(), d.end());
      },
      options);
  return {std::move(all), std::move(summary)};
}

}  // namespace ginibre
