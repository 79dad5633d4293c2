#include "sovlat/linalg.hpp"

#include <algorithm>
#include <numeric>

extern "C" {
void zgeev_(const char* jobvl, const char* jobvr, const int* n, sovlat::cplx* a, const int* lda,
            sovlat::cplx* w, sovlat::cplx* vl, const int* ldvl, sovlat::cplx* vr, const int* ldvr,
            sovlat::cplx* work, const int* lwork, double* rwork, int* info);
void zgetrf_(const int* m, const int* n, sovlat::cplx* a, const int* lda, int* ipiv, int* info);
void zgetrs_(const char* trans, const int* n, const int* nrhs, const sovlat::cplx* a,
             const int* lda, const int* ipiv, sovlat::cplx* b, const int* ldb, int* info);
void zgetri_(const int* n, sovlat::cplx* a, const int* lda, const int* ipiv, sovlat::cplx* work,
             const int* lwork, int* info);
void zgecon_(const char* norm, const int* n, const sovlat::cplx* a, const int* lda,
             const double* anorm, double* rcond, sovlat::cplx* work, double* rwork, int* info);
void zgesvd_(const char* jobu, const char* jobvt, const int* m, const int* n, sovlat::cplx* a,
             const int* lda, double* s, sovlat::cplx* u, const int* ldu, sovlat::cplx* vt,
             const int* ldvt, sovlat::cplx* work, const int* lwork, double* rwork, int* info);
}

namespace sovlat {

namespace {

Vec to_colmajor(const Mat& A) {
  Vec c(static_cast<size_t>(A.rows) * A.cols);
  for (int i = 0; i < A.rows; ++i)
    for (int j = 0; j < A.cols; ++j) c[static_cast<size_t>(j) * A.rows + i] = A(i, j);
  return c;
}

double norm1_colmajor(const Vec& a, int n) {
  double best = 0.0;
  for (int j = 0; j < n; ++j) {
    double s = 0.0;
    for (int i = 0; i < n; ++i) s += std::abs(a[static_cast<size_t>(j) * n + i]);
    best = std::max(best, s);
  }
  return best;
}

void require_square(const Mat& A, const char* who) {
  if (A.rows != A.cols) throw ConstructionError(std::string(who) + ": matrix not square");
  if (!A.finite()) throw ConstructionError(std::string(who) + ": non-finite entries");
}

}  // namespace

EigenDecomposition eigen_decompose(const Mat& A) {
  require_square(A, "eigen_decompose");
  const int n = A.rows;
  EigenDecomposition out;
  out.eigenvalues.resize(n);
  out.right_vectors = Mat(n, n);
  if (n == 0) return out;

  Vec a = to_colmajor(A);
  Vec w(n), vr(static_cast<size_t>(n) * n), work(1);
  std::vector<double> rwork(2 * n);
  int info = 0, lwork = -1;
  const int ldvl = 1;
  zgeev_("N", "V", &n, a.data(), &n, w.data(), nullptr, &ldvl, vr.data(), &n, work.data(), &lwork,
         rwork.data(), &info);
  lwork = static_cast<int>(work[0].real());
  work.resize(std::max(lwork, 1));
  zgeev_("N", "V", &n, a.data(), &n, w.data(), nullptr, &ldvl, vr.data(), &n, work.data(), &lwork,
         rwork.data(), &info);
  if (info != 0) {
    double rc = 0.0;
    try {
      rc = LuFactor(A).rcond();
    } catch (const Error&) {
    }
    throw NumericalFailure("eigen_decompose: zgeev failed to converge, info=" +
                           std::to_string(info) + ", rcond~" + std::to_string(rc));
  }

  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int i, int j) {
    if (w[i].real() != w[j].real()) return w[i].real() < w[j].real();
    return w[i].imag() < w[j].imag();
  });
  for (int j = 0; j < n; ++j) {
    out.eigenvalues[j] = w[order[j]];
    for (int i = 0; i < n; ++i)
      out.right_vectors(i, j) = vr[static_cast<size_t>(order[j]) * n + i];
  }
  return out;
}

LuFactor::LuFactor(const Mat& A) : n_(A.rows), ipiv_(A.rows) {
  require_square(A, "lu_factor");
  lu_ = to_colmajor(A);
  anorm1_ = norm1_colmajor(lu_, n_);
  int info = 0;
  zgetrf_(&n_, &n_, lu_.data(), &n_, ipiv_.data(), &info);
  if (info < 0) throw NumericalFailure("lu_factor: bad argument to zgetrf");
  // info > 0 marks an exactly singular U; keep the factorization, det() = 0,
  // solves will fail if attempted.
  singular_ = info > 0;
}

Vec LuFactor::solve(const Vec& b) const {
  if (static_cast<int>(b.size()) != n_) throw ConstructionError("lu_solve: size mismatch");
  if (singular_) throw NumericalFailure("lu_solve: matrix is singular");
  Vec x = b;
  const int one = 1;
  int info = 0;
  zgetrs_("N", &n_, &one, lu_.data(), &n_, ipiv_.data(), x.data(), &n_, &info);
  if (info != 0) throw NumericalFailure("lu_solve: zgetrs failed");
  return x;
}

Mat LuFactor::solve(const Mat& B) const {
  if (B.rows != n_) throw ConstructionError("lu_solve: size mismatch");
  if (singular_) throw NumericalFailure("lu_solve: matrix is singular");
  Vec rhs = to_colmajor(B);
  const int nrhs = B.cols;
  int info = 0;
  zgetrs_("N", &n_, &nrhs, lu_.data(), &n_, ipiv_.data(), rhs.data(), &n_, &info);
  if (info != 0) throw NumericalFailure("lu_solve: zgetrs failed");
  Mat X(n_, B.cols);
  for (int i = 0; i < n_; ++i)
    for (int j = 0; j < B.cols; ++j) X(i, j) = rhs[static_cast<size_t>(j) * n_ + i];
  return X;
}

cplx LuFactor::det() const {
  cplx d = 1.0;
  for (int i = 0; i < n_; ++i) {
    d *= lu_[static_cast<size_t>(i) * n_ + i];
    if (ipiv_[i] != i + 1) d = -d;
  }
  return d;
}

Mat LuFactor::inverse() const {
  if (singular_) throw NumericalFailure("inverse: matrix is singular");
  Vec a = lu_;
  int info = 0, lwork = -1;
  Vec work(1);
  zgetri_(&n_, a.data(), &n_, ipiv_.data(), work.data(), &lwork, &info);
  lwork = static_cast<int>(work[0].real());
  work.resize(std::max(lwork, 1));
  zgetri_(&n_, a.data(), &n_, ipiv_.data(), work.data(), &lwork, &info);
  if (info != 0) throw NumericalFailure("inverse: zgetri failed, info=" + std::to_string(info));
  Mat X(n_, n_);
  for (int i = 0; i < n_; ++i)
    for (int j = 0; j < n_; ++j) X(i, j) = a[static_cast<size_t>(j) * n_ + i];
  return X;
}

double LuFactor::rcond() const {
  double rc = 0.0;
  int info = 0;
  Vec work(2 * n_);
  std::vector<double> rwork(2 * n_);
  zgecon_("1", &n_, lu_.data(), &n_, &anorm1_, &rc, work.data(), rwork.data(), &info);
  if (info != 0) throw NumericalFailure("rcond: zgecon failed");
  return rc;
}

Vec solve(const Mat& A, const Vec& b) { return LuFactor(A).solve(b); }
Mat solve(const Mat& A, const Mat& B) { return LuFactor(A).solve(B); }
Mat inverse(const Mat& A) { return LuFactor(A).inverse(); }
cplx determinant(const Mat& A) { return LuFactor(A).det(); }

namespace {

Svd svd_impl(const Mat& A, bool vectors) {
  if (!A.finite()) throw ConstructionError("svd: non-finite entries");
  const int m = A.rows, n = A.cols;
  const int k = std::min(m, n);
  Svd out;
  out.s.resize(k);
  Vec a = to_colmajor(A);
  Vec u(vectors ? static_cast<size_t>(m) * m : 1);
  Vec vt(vectors ? static_cast<size_t>(n) * n : 1);
  Vec work(1);
  std::vector<double> rwork(static_cast<size_t>(5) * k);
  int info = 0, lwork = -1;
  const char* job = vectors ? "A" : "N";
  const int ldu = vectors ? m : 1, ldvt = vectors ? n : 1;
  zgesvd_(job, job, &m, &n, a.data(), &m, out.s.data(), u.data(), &ldu, vt.data(), &ldvt,
          work.data(), &lwork, rwork.data(), &info);
  lwork = static_cast<int>(work[0].real());
  work.resize(std::max(lwork, 1));
  zgesvd_(job, job, &m, &n, a.data(), &m, out.s.data(), u.data(), &ldu, vt.data(), &ldvt,
          work.data(), &lwork, rwork.data(), &info);
  if (info != 0) throw NumericalFailure("svd: zgesvd failed, info=" + std::to_string(info));
  if (vectors) {
    out.u = Mat(m, m);
    out.vh = Mat(n, n);
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j) out.u(i, j) = u[static_cast<size_t>(j) * m + i];
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) out.vh(i, j) = vt[static_cast<size_t>(j) * n + i];
  }
  return out;
}

}  // namespace

std::vector<double> singular_values(const Mat& A) { return svd_impl(A, false).s; }

Svd svd(const Mat& A) { return svd_impl(A, true); }

int numerical_rank(const Mat& A, double rel_tol) {
  auto s = singular_values(A);
  if (s.empty() || s[0] == 0.0) return 0;
  int r = 0;
  for (double v : s)
    if (v > rel_tol * s[0]) ++r;
  return r;
}

}  // namespace sovlat
