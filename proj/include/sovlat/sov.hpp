#ifndef SOVLAT_SOV_HPP
#define SOVLAT_SOV_HPP

#include "sovlat/model.hpp"

namespace sovlat {

// h-tuples label the SoV covectors; the linear index is base-n with h_1
// least significant.
int h_to_index(const std::vector<int>& h, int n);
std::vector<int> h_from_index(int idx, int n, int N);

struct SeedCovector {
  Vec row;                    // length n^N, unit norm
  std::vector<Vec> weights;   // per-site weight rows in the Jordan frame
};

// Default seed: all weights one. User weights must have a nonzero entry at
// the leading slot of every Jordan block.
SeedCovector build_seed(const ModelContext& ctx);
SeedCovector build_seed(const ModelContext& ctx, const std::vector<Vec>& weights);

struct SovBasis {
  Mat U;        // row at h_to_index(h) is <h|
  Mat U_inv;
  cplx det_U{0.0};
  double cond = 0.0;  // sigma_max / sigma_min
  SeedCovector seed;
};

// Rows are generated incrementally, each new row right-multiplying the row
// with one fewer transfer factor at the highest occupied site; this keeps
// rows bit-identical to the direct ordered products.
SovBasis build_basis(const ModelContext& ctx, const TransferFamily& fam, const SeedCovector& seed);

// Diagonal value of the separate-variable generating operator on <h|.
cplx b_eigenvalue(const ModelContext& ctx, const std::vector<int>& h, cplx u);

// The operator diagonal in the SoV basis with eigenvalues b_h(u).
DenseOperator b_operator(const ModelContext& ctx, const SovBasis& basis, cplx u);

// Coefficients closing T_h T_1(xi_a) on the T_h basis, one row per h.
struct StructureConstants {
  int site = 0;
  Mat C;
  double max_residual = 0.0;  // reconstruction check over all rows
};
StructureConstants structure_constants(const ModelContext& ctx, const TransferFamily& fam,
                                       const SovBasis& basis, int a);

}  // namespace sovlat

#endif
