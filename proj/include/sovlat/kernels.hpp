#ifndef SOVLAT_KERNELS_HPP
#define SOVLAT_KERNELS_HPP

#include "sovlat/types.hpp"

namespace sovlat {

// Digit layout of a composite row index over tensor factors, first factor
// most significant (Kronecker convention).
struct FactorLayout {
  std::vector<int> dims;
  std::vector<long> strides;
  long total = 1;

  explicit FactorLayout(const std::vector<int>& d) : dims(d), strides(d.size()) {
    long s = 1;
    for (int f = static_cast<int>(d.size()) - 1; f >= 0; --f) {
      strides[f] = s;
      s *= d[f];
    }
    total = s;
  }
  int digit(long row, int f) const { return static_cast<int>((row / strides[f]) % dims[f]); }
};

// Dense products. The OpenMP variants parallelize over output rows and are
// bitwise identical to the serial references (independent row dot products).
Mat matmul(const Mat& A, const Mat& B);
Mat matmul_serial(const Mat& A, const Mat& B);
Vec matvec(const Mat& A, const Vec& v);
Vec vecmat(const Vec& v, const Mat& A);

Mat kron(const Mat& A, const Mat& B);
Mat kron_serial(const Mat& A, const Mat& B);

// In-place left action X := (u I + eta P_{fa,fb}) X where P exchanges two
// equal-dimension factors of the row index. This is the R-matrix gate.
void apply_swap_gate(Mat& X, const FactorLayout& L, int fa, int fb, cplx u, cplx eta);
void apply_swap_gate_serial(Mat& X, const FactorLayout& L, int fa, int fb, cplx u, cplx eta);

// In-place left action X := G_f X of a small dense gate on one factor.
void apply_factor_gate(Mat& X, const FactorLayout& L, int f, const Mat& G);
void apply_factor_gate_serial(Mat& X, const FactorLayout& L, int f, const Mat& G);

}  // namespace sovlat

#endif
