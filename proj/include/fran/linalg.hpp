// linalg.hpp: small dense helpers shared by the rate functions and the
// barrier solver. Complex Hermitian matrices are the canonical carrier;
// realify() maps them to 2m x 2m real symmetric matrices for factorization
// (log det of the realified matrix is exactly twice the complex one).
#pragma once

#include <Eigen/Dense>
#include <atomic>
#include <complex>
#include <stdexcept>

#include "fran/rng.hpp"
#include "fran/units.hpp"

namespace fran {

using Cmat = Eigen::MatrixXcd;
using Cvec = Eigen::VectorXcd;
using Rmat = Eigen::MatrixXd;
using Rvec = Eigen::VectorXd;

// [[X, -Y], [Y, X]] for M = X + iY. Symmetric iff M is Hermitian, positive
// (semi)definite iff M is, and each complex eigenvalue appears twice.
inline Rmat realify(const Cmat& m) {
  const Eigen::Index n = m.rows();
  Rmat r(2 * n, 2 * n);
  r.topLeftCorner(n, n) = m.real();
  r.bottomRightCorner(n, n) = m.real();
  r.topRightCorner(n, n) = -m.imag();
  r.bottomLeftCorner(n, n) = m.imag();
  return r;
}

// Count of diagonal jitters applied by log2det_psd, for diagnostics.
inline std::atomic<long>& logdet_jitter_count() {
  static std::atomic<long> count{0};
  return count;
}

// log2 det of a Hermitian positive definite matrix, computed by Cholesky of
// the realified matrix (halved). A failed factorization gets one retry with
// a diagonal jitter of 1e-12*tr/m, counted in logdet_jitter_count().
inline double log2det_psd(const Cmat& m) {
  const Eigen::Index n = m.rows();
  if (n == 0) return 0.0;
  if (n == 1) {
    double v = m(0, 0).real();
    if (v <= 0.0) {
      double jit = 1e-12 * std::abs(v);
      if (v + jit <= 0.0) throw std::runtime_error("log2det_psd: not PD");
      logdet_jitter_count()++;
      v += jit;
    }
    return bits_from_nats(std::log(v));
  }
  Rmat r = realify(m);
  Eigen::LLT<Rmat> llt(r);
  if (llt.info() != Eigen::Success) {
    double jit = 1e-12 * r.trace() / static_cast<double>(r.rows());
    if (!(jit > 0.0)) jit = 1e-300;
    logdet_jitter_count()++;
    llt.compute(r + jit * Rmat::Identity(r.rows(), r.cols()));
    if (llt.info() != Eigen::Success)
      throw std::runtime_error("log2det_psd: matrix not positive definite");
  }
  double half_lndet = 0.0;  // realified det = (complex det)^2
  for (Eigen::Index i = 0; i < r.rows(); ++i)
    half_lndet += std::log(llt.matrixL()(i, i));
  return bits_from_nats(half_lndet);
}

// Smallest/largest eigenvalue of a Hermitian matrix.
inline std::pair<double, double> eig_range(const Cmat& m) {
  if (m.rows() == 0) return {0.0, 0.0};
  Eigen::SelfAdjointEigenSolver<Cmat> es(m, Eigen::EigenvaluesOnly);
  return {es.eigenvalues().minCoeff(), es.eigenvalues().maxCoeff()};
}

// PSD test at the project-wide tolerance: lambda_min >= -1e-8 * lambda_max.
inline bool is_psd(const Cmat& m, double tol_scale = 1e-8) {
  if (m.rows() == 0) return true;
  auto [lo, hi] = eig_range(m);
  return lo >= -tol_scale * std::max(hi, 0.0) - 1e-300;
}

inline bool is_hermitian(const Cmat& m, double tol = 1e-10) {
  return (m - m.adjoint()).cwiseAbs().maxCoeff() <=
         tol * std::max(1.0, m.cwiseAbs().maxCoeff());
}

// A A^H for A with iid CN(0,1) entries; scaled by the caller as needed.
inline Cmat random_psd(Eigen::Index n, Philox& rng) {
  Cmat a(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) {
      auto [re, im] = rng.next_normal_pair();
      a(i, j) = std::complex<double>(re * M_SQRT1_2, im * M_SQRT1_2);
    }
  return a * a.adjoint();
}

inline Cmat random_complex(Eigen::Index r, Eigen::Index c, Philox& rng) {
  Cmat a(r, c);
  for (Eigen::Index i = 0; i < r; ++i)
    for (Eigen::Index j = 0; j < c; ++j) {
      auto [re, im] = rng.next_normal_pair();
      a(i, j) = std::complex<double>(re * M_SQRT1_2, im * M_SQRT1_2);
    }
  return a;
}

}  // namespace fran
