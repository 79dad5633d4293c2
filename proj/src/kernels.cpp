#include "sovlat/kernels.hpp"

#include <cstring>

namespace sovlat {

namespace {

inline void mat_row_product(const Mat& A, const Mat& B, Mat& C, int i) {
  const int n = B.cols, k = A.cols;
  cplx* ci = C.row_ptr(i);
  const cplx* ai = A.row_ptr(i);
  for (int j = 0; j < n; ++j) ci[j] = 0.0;
  for (int l = 0; l < k; ++l) {
    const cplx s = ai[l];
    if (s == cplx(0.0)) continue;
    const cplx* bl = B.row_ptr(l);
    for (int j = 0; j < n; ++j) ci[j] += s * bl[j];
  }
}

}  // namespace

Mat matmul_serial(const Mat& A, const Mat& B) {
  if (A.cols != B.rows) throw ConstructionError("matmul: inner dimensions disagree");
  Mat C(A.rows, B.cols);
  for (int i = 0; i < A.rows; ++i) mat_row_product(A, B, C, i);
  return C;
}

Mat matmul(const Mat& A, const Mat& B) {
  if (A.cols != B.rows) throw ConstructionError("matmul: inner dimensions disagree");
  Mat C(A.rows, B.cols);
  const long work = static_cast<long>(A.rows) * A.cols * B.cols;
#pragma omp parallel for schedule(static) if (work > 1 << 16)
  for (int i = 0; i < A.rows; ++i) mat_row_product(A, B, C, i);
  return C;
}

Vec matvec(const Mat& A, const Vec& v) {
  if (A.cols != static_cast<int>(v.size())) throw ConstructionError("matvec: dimension mismatch");
  Vec r(A.rows, 0.0);
  for (int i = 0; i < A.rows; ++i) {
    const cplx* ai = A.row_ptr(i);
    cplx s = 0.0;
    for (int j = 0; j < A.cols; ++j) s += ai[j] * v[j];
    r[i] = s;
  }
  return r;
}

Vec vecmat(const Vec& v, const Mat& A) {
  if (A.rows != static_cast<int>(v.size())) throw ConstructionError("vecmat: dimension mismatch");
  Vec r(A.cols, 0.0);
  for (int i = 0; i < A.rows; ++i) {
    const cplx s = v[i];
    if (s == cplx(0.0)) continue;
    const cplx* ai = A.row_ptr(i);
    for (int j = 0; j < A.cols; ++j) r[j] += s * ai[j];
  }
  return r;
}

Mat kron_serial(const Mat& A, const Mat& B) {
  Mat C(A.rows * B.rows, A.cols * B.cols);
  for (int ia = 0; ia < A.rows; ++ia)
    for (int ib = 0; ib < B.rows; ++ib) {
      cplx* cr = C.row_ptr(ia * B.rows + ib);
      for (int ja = 0; ja < A.cols; ++ja) {
        const cplx s = A(ia, ja);
        const cplx* br = B.row_ptr(ib);
        cplx* dst = cr + static_cast<size_t>(ja) * B.cols;
        for (int jb = 0; jb < B.cols; ++jb) dst[jb] = s * br[jb];
      }
    }
  return C;
}

Mat kron(const Mat& A, const Mat& B) {
  Mat C(A.rows * B.rows, A.cols * B.cols);
  const long work = static_cast<long>(C.rows) * C.cols;
#pragma omp parallel for collapse(2) schedule(static) if (work > 1 << 16)
  for (int ia = 0; ia < A.rows; ++ia)
    for (int ib = 0; ib < B.rows; ++ib) {
      cplx* cr = C.row_ptr(ia * B.rows + ib);
      for (int ja = 0; ja < A.cols; ++ja) {
        const cplx s = A(ia, ja);
        const cplx* br = B.row_ptr(ib);
        cplx* dst = cr + static_cast<size_t>(ja) * B.cols;
        for (int jb = 0; jb < B.cols; ++jb) dst[jb] = s * br[jb];
      }
    }
  return C;
}

namespace {

// Shared body for the swap gate; the pair (r, partner) is handled by the
// iteration that sees the smaller digit in factor fa.
inline void swap_gate_rows(Mat& X, const FactorLayout& L, int fa, int fb, cplx u, cplx eta,
                           long r, Vec& tmp) {
  const int ia = L.digit(r, fa), ib = L.digit(r, fb);
  const int m = X.cols;
  if (ia == ib) {
    cplx* xr = X.row_ptr(static_cast<int>(r));
    const cplx s = u + eta;
    for (int j = 0; j < m; ++j) xr[j] *= s;
    return;
  }
  if (ia > ib) return;
  const long rp = r + static_cast<long>(ib - ia) * L.strides[fa] +
                  static_cast<long>(ia - ib) * L.strides[fb];
  cplx* xr = X.row_ptr(static_cast<int>(r));
  cplx* xp = X.row_ptr(static_cast<int>(rp));
  std::memcpy(tmp.data(), xr, sizeof(cplx) * m);
  for (int j = 0; j < m; ++j) xr[j] = u * xr[j] + eta * xp[j];
  for (int j = 0; j < m; ++j) xp[j] = u * xp[j] + eta * tmp[j];
}

}  // namespace

void apply_swap_gate_serial(Mat& X, const FactorLayout& L, int fa, int fb, cplx u, cplx eta) {
  if (L.dims[fa] != L.dims[fb]) throw ConstructionError("swap gate: unequal factor dimensions");
  Vec tmp(X.cols);
  for (long r = 0; r < L.total; ++r) swap_gate_rows(X, L, fa, fb, u, eta, r, tmp);
}

void apply_swap_gate(Mat& X, const FactorLayout& L, int fa, int fb, cplx u, cplx eta) {
  if (L.dims[fa] != L.dims[fb]) throw ConstructionError("swap gate: unequal factor dimensions");
  const long work = L.total * X.cols;
#pragma omp parallel if (work > 1 << 16)
  {
    Vec tmp(X.cols);
#pragma omp for schedule(static)
    for (long r = 0; r < L.total; ++r) swap_gate_rows(X, L, fa, fb, u, eta, r, tmp);
  }
}

namespace {

inline void factor_gate_class(Mat& X, const FactorLayout& L, int f, const Mat& G, long rep,
                              Mat& buf) {
  const int d = L.dims[f];
  const long s = L.strides[f];
  const int m = X.cols;
  for (int k = 0; k < d; ++k)
    std::memcpy(buf.row_ptr(k), X.row_ptr(static_cast<int>(rep + k * s)), sizeof(cplx) * m);
  for (int i = 0; i < d; ++i) {
    cplx* dst = X.row_ptr(static_cast<int>(rep + i * s));
    for (int j = 0; j < m; ++j) dst[j] = 0.0;
    for (int k = 0; k < d; ++k) {
      const cplx g = G(i, k);
      if (g == cplx(0.0)) continue;
      const cplx* src = buf.row_ptr(k);
      for (int j = 0; j < m; ++j) dst[j] += g * src[j];
    }
  }
}

inline long class_representative(const FactorLayout& L, int f, long o) {
  const long s = L.strides[f];
  return (o / s) * s * L.dims[f] + (o % s);
}

}  // namespace

void apply_factor_gate_serial(Mat& X, const FactorLayout& L, int f, const Mat& G) {
  if (G.rows != L.dims[f] || G.cols != L.dims[f])
    throw ConstructionError("factor gate: gate dimension mismatch");
  const long nclasses = L.total / L.dims[f];
  Mat buf(L.dims[f], X.cols);
  for (long o = 0; o < nclasses; ++o)
    factor_gate_class(X, L, f, G, class_representative(L, f, o), buf);
}

void apply_factor_gate(Mat& X, const FactorLayout& L, int f, const Mat& G) {
  if (G.rows != L.dims[f] || G.cols != L.dims[f])
    throw ConstructionError("factor gate: gate dimension mismatch");
  const long nclasses = L.total / L.dims[f];
  const long work = L.total * X.cols;
#pragma omp parallel if (work > 1 << 16)
  {
    Mat buf(L.dims[f], X.cols);
#pragma omp for schedule(static)
    for (long o = 0; o < nclasses; ++o)
      factor_gate_class(X, L, f, G, class_representative(L, f, o), buf);
  }
}

}  // namespace sovlat
