#pragma once

// Dense linear algebra used by the surrogate and the embeddings. Everything
// here is a pure function templated on the scalar type; storage is Eigen.

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>

#include "crembo/error.hpp"

namespace crembo {

template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <typename Scalar>
struct CholeskyFactor {
  MatrixX<Scalar> lower;
  Scalar jitter_used = Scalar(0);

  Eigen::Index size() const { return lower.rows(); }
};

/// Jitter cap as a fraction of the mean diagonal of the factored matrix.
inline constexpr double kJitterCapFraction = 1e-2;

namespace detail {

template <typename Scalar>
bool try_llt(const MatrixX<Scalar>& m, Scalar jitter, MatrixX<Scalar>& lower) {
  MatrixX<Scalar> shifted = m;
  shifted.diagonal().array() += jitter;
  Eigen::LLT<MatrixX<Scalar>> llt(shifted);
  if (llt.info() != Eigen::Success) return false;
  lower = llt.matrixL();
  const auto diag = lower.diagonal().array();
  return diag.allFinite() && (diag > Scalar(0)).all();
}

}  // namespace detail

/// Cholesky factorization of a symmetric matrix. On failure the diagonal
/// jitter grows by x10 per retry, starting from `initial_jitter` (or from
/// 1e-12 of the mean diagonal when zero), until it passes
/// `cap_fraction * mean(diag(m))`.
template <typename Derived>
CholeskyFactor<typename Derived::Scalar> cholesky(const Eigen::MatrixBase<Derived>& m,
                                                  typename Derived::Scalar initial_jitter,
                                                  double cap_fraction = kJitterCapFraction) {
  using Scalar = typename Derived::Scalar;
  if (m.rows() != m.cols()) {
    throw Error(ErrorCode::DimensionMismatch, "cholesky: matrix is not square");
  }
  if (m.size() == 0) {
    throw Error(ErrorCode::DimensionMismatch, "cholesky: empty matrix");
  }
  if (!m.allFinite()) {
    throw Error(ErrorCode::NotPositiveDefinite, "cholesky: non-finite entries");
  }
  const Scalar scale = std::max(Scalar(1), m.cwiseAbs().maxCoeff());
  if ((m - m.transpose()).cwiseAbs().maxCoeff() > Scalar(1e-10) * scale) {
    throw Error(ErrorCode::DimensionMismatch, "cholesky: matrix is not symmetric");
  }

  const MatrixX<Scalar> dense = m;
  const Scalar mean_diag = dense.diagonal().mean();
  const Scalar cap = Scalar(cap_fraction) * mean_diag;

  CholeskyFactor<Scalar> out;
  Scalar jitter = std::max(initial_jitter, Scalar(0));
  if (detail::try_llt(dense, jitter, out.lower)) {
    out.jitter_used = jitter;
    return out;
  }
  jitter = jitter > Scalar(0) ? jitter * Scalar(10) : Scalar(1e-12) * std::abs(mean_diag);
  while (jitter > Scalar(0) && jitter <= cap) {
    if (detail::try_llt(dense, jitter, out.lower)) {
      out.jitter_used = jitter;
      return out;
    }
    jitter *= Scalar(10);
  }
  throw Error(ErrorCode::NotPositiveDefinite, "cholesky: jitter cap reached");
}

/// Solves (L Lᵀ) x = b by forward then back substitution.
template <typename Scalar, typename Derived>
VectorX<Scalar> solve_cholesky(const CholeskyFactor<Scalar>& f, const Eigen::MatrixBase<Derived>& b) {
  if (b.rows() != f.lower.rows() || b.cols() != 1) {
    throw Error(ErrorCode::DimensionMismatch, "solve_cholesky: right-hand side has wrong length");
  }
  VectorX<Scalar> x = f.lower.template triangularView<Eigen::Lower>().solve(b);
  f.lower.transpose().template triangularView<Eigen::Upper>().solveInPlace(x);
  return x;
}

/// Orthonormal basis for the column span of `m` via modified Gram–Schmidt
/// with one re-orthogonalization pass. The implied R has a nonnegative
/// diagonal, so the output is unique.
template <typename Derived>
MatrixX<typename Derived::Scalar> qr_orthonormalize(const Eigen::MatrixBase<Derived>& m) {
  using Scalar = typename Derived::Scalar;
  const Eigen::Index rows = m.rows();
  const Eigen::Index cols = m.cols();
  if (rows < cols) {
    throw Error(ErrorCode::RankDeficient, "qr_orthonormalize: more columns than rows");
  }
  MatrixX<Scalar> q = m;
  for (Eigen::Index j = 0; j < cols; ++j) {
    const Scalar original_norm = q.col(j).norm();
    for (int pass = 0; pass < 2; ++pass) {
      for (Eigen::Index k = 0; k < j; ++k) {
        q.col(j) -= q.col(k).dot(q.col(j)) * q.col(k);
      }
    }
    const Scalar pivot = q.col(j).norm();
    if (!(pivot >= Scalar(1e-10) * std::max(Scalar(1), original_norm))) {
      throw Error(ErrorCode::RankDeficient, "qr_orthonormalize: column " + std::to_string(j) +
                                                " is linearly dependent on its predecessors");
    }
    q.col(j) /= pivot;
  }
  return q;
}

/// Number of column-pivoted QR diagonal magnitudes above `tol` times the largest.
template <typename Derived>
Eigen::Index numerical_rank(const Eigen::MatrixBase<Derived>& m, double tol) {
  using Scalar = typename Derived::Scalar;
  if (m.size() == 0) return 0;
  Eigen::ColPivHouseholderQR<MatrixX<Scalar>> qr(m.eval());
  const auto diag = qr.matrixQR().diagonal().cwiseAbs();
  const Scalar largest = diag.size() > 0 ? diag.maxCoeff() : Scalar(0);
  if (!(largest > Scalar(0))) return 0;
  Eigen::Index rank = 0;
  for (Eigen::Index i = 0; i < diag.size(); ++i) {
    if (diag(i) > Scalar(tol) * largest) ++rank;
  }
  return rank;
}

}  // namespace crembo
