#ifndef SOVLAT_TENSOR_HPP
#define SOVLAT_TENSOR_HPP

#include "sovlat/kernels.hpp"
#include "sovlat/types.hpp"

namespace sovlat {

// Labeled tensor-product space. Composite indices put the first factor most
// significant, matching the Kronecker product convention.
struct TensorSpace {
  std::vector<int> factor_dims;
  int total_dim = 1;

  TensorSpace() = default;
  explicit TensorSpace(std::vector<int> dims) : factor_dims(std::move(dims)) {
    if (factor_dims.empty()) throw ConstructionError("TensorSpace: needs at least one factor");
    long t = 1;
    for (int d : factor_dims) {
      if (d <= 0) throw ConstructionError("TensorSpace: nonpositive factor dimension");
      t *= d;
      if (t > (1L << 30)) throw ConstructionError("TensorSpace: dimension overflow");
    }
    total_dim = static_cast<int>(t);
  }
  static TensorSpace uniform(int nfactors, int dim) {
    return TensorSpace(std::vector<int>(nfactors, dim));
  }
  FactorLayout layout() const { return FactorLayout(factor_dims); }
  int factors() const { return static_cast<int>(factor_dims.size()); }
};

// Square operator on a labeled tensor space.
struct DenseOperator {
  TensorSpace space;
  Mat mat;

  DenseOperator() = default;
  DenseOperator(TensorSpace sp, Mat m) : space(std::move(sp)), mat(std::move(m)) {
    if (mat.rows != space.total_dim || mat.cols != space.total_dim)
      throw ConstructionError("DenseOperator: entry block does not match space dimension");
  }
  static DenseOperator identity(const TensorSpace& sp) {
    return DenseOperator(sp, Mat::identity(sp.total_dim));
  }
};

inline constexpr int kDefaultDimCap = 4096;

// Kronecker product; the result space concatenates the factor lists.
DenseOperator tensor_product(const DenseOperator& A, const DenseOperator& B,
                             int max_dim = kDefaultDimCap);

// P_perm (v_1 x ... x v_m) = v_{perm(1)} x ... x v_{perm(m)}, 0-based perm.
DenseOperator permutation_operator(const TensorSpace& space, const std::vector<int>& perm);

int permutation_sign(const std::vector<int>& perm);

// Antisymmetric projector on m factors of dimension n, 1 <= m <= n.
DenseOperator antisymmetrizer(int m, int n);

// Trace over the factors not listed in `keep`; kept factors stay in their
// original order.
DenseOperator partial_trace(const DenseOperator& A, const std::vector<int>& keep);

cplx trace(const Mat& A);
inline cplx trace(const DenseOperator& A) { return trace(A.mat); }

// Lift a gate acting on the listed factors (in the given order) to the full
// space. Kept as the slow, transparent reference used to validate the
// in-place gate kernels.
DenseOperator embed(const TensorSpace& space, const Mat& gate, const std::vector<int>& factors);

}  // namespace sovlat

#endif
