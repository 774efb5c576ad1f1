#pragma once

// Sparse direct solution of the reduced saddle-point system. Backed by UMFPACK
// (LU with partial pivoting) when available, Eigen's SparseLU otherwise.

#include <cmath>
#include <limits>
#include <memory>
#include <sstream>

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#ifdef MAGFEM_HAVE_UMFPACK
#include <Eigen/UmfPackSupport>
#endif

#include "magfem/errors.hpp"

namespace magfem {

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::ColMajor, int>;

namespace detail {

#ifdef MAGFEM_HAVE_UMFPACK
class UmfPack : public Eigen::UmfPackLU<SparseMatrix> {
 public:
  double rcond() const { return m_umfpackInfo(UMFPACK_RCOND); }
};
#endif

// Row with the smallest infinity norm relative to the matrix maximum; a
// diagnostic for where a singular system loses rank.
inline std::pair<long, double> weakest_row(const SparseMatrix& A) {
  Eigen::VectorXd rmax = Eigen::VectorXd::Zero(A.rows());
  for (int c = 0; c < A.outerSize(); ++c)
    for (SparseMatrix::InnerIterator it(A, c); it; ++it)
      rmax(it.row()) = std::max(rmax(it.row()), std::abs(it.value()));
  if (A.rows() == 0) return {-1, 0.0};
  Eigen::Index r = 0;
  const double mn = rmax.minCoeff(&r);
  const double mx = rmax.maxCoeff();
  return {static_cast<long>(r), mx > 0.0 ? mn / mx : 0.0};
}

}  // namespace detail

/// Factorizes matrices sharing one sparsity pattern. The matrix is first
/// scaled symmetrically, D A D, so displacement, pressure and potential blocks
/// of very different magnitude factor with comparable pivots.
class SparseDirectSolver {
 public:
  /// Backward error accepted after the solve.
  static constexpr double kResidualTolerance = 1e-10;
  static constexpr int kMaxRefinements = 3;
  static constexpr double kRefineTarget = 1e-12;

  void analyze(const SparseMatrix& A) {
    analyzed_ = true;
    if (A.rows() == 0) return;
#ifdef MAGFEM_HAVE_UMFPACK
    umf_ = std::make_unique<detail::UmfPack>();
    umf_->analyzePattern(A);
#else
    lu_ = std::make_unique<Eigen::SparseLU<SparseMatrix>>();
    lu_->analyzePattern(A);
#endif
    analyzed_ = true;
  }

  void factorize(const SparseMatrix& A) {
    if (!analyzed_) analyze(A);
    A_ = &A;
    if (A.rows() == 0) return;
    // scale_i = max(|A_ii|, sum_j A_ij^2 / |A_jj|): the second term estimates
    // the Schur-complement diagonal of rows with a vanishing diagonal
    Eigen::VectorXd diag = Eigen::VectorXd::Zero(A.rows());
    for (int c = 0; c < A.outerSize(); ++c)
      for (SparseMatrix::InnerIterator it(A, c); it; ++it)
        if (it.row() == c) diag(c) = std::abs(it.value());
    Eigen::VectorXd scale = diag;
    Eigen::VectorXd schur = Eigen::VectorXd::Zero(A.rows());
    for (int c = 0; c < A.outerSize(); ++c)
      for (SparseMatrix::InnerIterator it(A, c); it; ++it)
        if (it.row() != c && diag(c) > 0.0) schur(it.row()) += it.value() * it.value() / diag(c);
    D_.resize(A.rows());
    for (Eigen::Index i = 0; i < A.rows(); ++i) {
      const double v = std::max(scale(i), schur(i));
      D_(i) = v > 0.0 ? 1.0 / std::sqrt(v) : 1.0;
    }
    Eigen::VectorXd rowsum = Eigen::VectorXd::Zero(A.rows());
    for (int c = 0; c < A.outerSize(); ++c)
      for (SparseMatrix::InnerIterator it(A, c); it; ++it) rowsum(it.row()) += std::abs(it.value());
    norm_inf_ = rowsum.maxCoeff();
    S_ = A;
    for (int c = 0; c < S_.outerSize(); ++c)
      for (SparseMatrix::InnerIterator it(S_, c); it; ++it) it.valueRef() *= D_(it.row()) * D_(c);
    bool ok = false;
    double pivot = std::numeric_limits<double>::quiet_NaN();
#ifdef MAGFEM_HAVE_UMFPACK
    umf_->factorize(S_);
    ok = umf_->info() == Eigen::Success;
    pivot = umf_->rcond();
    ok = ok && std::isfinite(pivot) && pivot > 0.0;
#else
    lu_->factorize(S_);
    ok = lu_->info() == Eigen::Success;
#endif
    if (!ok) fail("factorization failed", pivot);
  }

  /// Solves A x = b, refining while the residual relative to b keeps
  /// dropping. The accepted error is the normwise backward error
  /// |b - A x|_inf / (|A|_inf |x|_inf + |b|_inf).
  Eigen::VectorXd solve(const Eigen::VectorXd& b) const {
    const SparseMatrix& A = *A_;
    if (A.rows() == 0) return Eigen::VectorXd(0);
    Eigen::VectorXd x = scaled_solve(b);
    const double bn = b.lpNorm<Eigen::Infinity>();
    if (bn == 0.0) return x;
    Eigen::VectorXd r = b - A * x;
    double rn = r.lpNorm<Eigen::Infinity>();
    for (int k = 0; k < kMaxRefinements && rn > kRefineTarget * bn; ++k) {
      const Eigen::VectorXd xn = x + scaled_solve(r);
      const Eigen::VectorXd rr = b - A * xn;
      const double rrn = rr.lpNorm<Eigen::Infinity>();
      if (!(rrn < 0.5 * rn)) break;
      x = xn;
      r = rr;
      rn = rrn;
    }
    const double err = backward_error(r, x, b);
    if (!(err <= kResidualTolerance)) {
      std::ostringstream msg;
      msg << "linear solve backward error " << err << " exceeds " << kResidualTolerance;
      fail(msg.str(), std::numeric_limits<double>::quiet_NaN());
    }
    return x;
  }

  double backward_error(const Eigen::VectorXd& r, const Eigen::VectorXd& x,
                        const Eigen::VectorXd& b) const {
    return r.lpNorm<Eigen::Infinity>() /
           (norm_inf_ * x.lpNorm<Eigen::Infinity>() + b.lpNorm<Eigen::Infinity>());
  }

 private:
  Eigen::VectorXd scaled_solve(const Eigen::VectorXd& b) const {
    const Eigen::VectorXd sb = D_.cwiseProduct(b);
#ifdef MAGFEM_HAVE_UMFPACK
    const Eigen::VectorXd y = umf_->solve(sb);
#else
    const Eigen::VectorXd y = lu_->solve(sb);
#endif
    return D_.cwiseProduct(y);
  }

  [[noreturn]] void fail(const std::string& what, double pivot) const {
    const auto [dof, scale] = detail::weakest_row(*A_);
    std::ostringstream msg;
    msg << "singular system: " << what << " (reciprocal condition estimate " << pivot
        << ", weakest row " << dof << " with relative scale " << scale << ")";
    throw SingularSystem(msg.str(), std::isnan(pivot) ? scale : pivot, dof);
  }

  bool analyzed_ = false;
  const SparseMatrix* A_ = nullptr;
  SparseMatrix S_;
  Eigen::VectorXd D_;
  double norm_inf_ = 0.0;
#ifdef MAGFEM_HAVE_UMFPACK
  std::unique_ptr<detail::UmfPack> umf_;
#else
  std::unique_ptr<Eigen::SparseLU<SparseMatrix>> lu_;
#endif
};

/// One-shot solve of A x = b.
inline Eigen::VectorXd linear_solve(const SparseMatrix& A, const Eigen::VectorXd& b) {
  SparseDirectSolver s;
  s.analyze(A);
  s.factorize(A);
  return s.solve(b);
}

}  // namespace magfem
