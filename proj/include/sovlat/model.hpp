#ifndef SOVLAT_MODEL_HPP
#define SOVLAT_MODEL_HPP

#include "sovlat/poly.hpp"
#include "sovlat/random.hpp"
#include "sovlat/tensor.hpp"

namespace sovlat {

// Numerical policy knobs. Residual thresholds used by the verification
// suites are relative to a natural scale of the quantity checked.
struct Tolerances {
  double pass = 1e-9;              // default report pass threshold
  double twist_gap = 1e-8;         // eigenvalue separation/clustering, relative to scale(K)
  double twist_det = 1e-12;        // invertibility floor for |det K|, scaled
  double resonance_window = 1e-6;  // min |xi_a - xi_b - r eta| over |r| <= n, a != b
  double node_gap = 1e-10;         // interpolation nodes minimum distance
  double basis_det = 1e-10;        // |det U| floor, times (geo mean row norm)^{n^N}
  double newton = 1e-10;           // polished system residual target
  double dedupe = 1e-7;            // solution de-duplication distance
  double match = 1e-8;             // oracle matching distance
  double cluster = 1e-8;           // eigenvalue clustering in the oracle
  double eigen_residual = 1e-8;    // eigenvector acceptance threshold
  double degree_trim = 1e-8;       // relative coefficient cutoff when fixing deg(phi)
  double phi_root_sep = 1e-8;      // min distance between phi roots and the xi
  double rank_one = 1e-10;         // sigma_2/sigma_1 bound in rank-one checks
};

struct JordanBlock {
  cplx eigenvalue;
  int size = 1;
};

// Twist matrix with its Jordan data. Construction enforces invertibility and
// w-simplicity (non-derogatory: one Jordan block per eigenvalue), the class
// of twists the whole construction is valid for.
struct TwistMatrix {
  int n = 0;
  Mat K;
  std::vector<JordanBlock> blocks;  // eigenvalues in lexicographic (re, im) order
  Mat W, W_inv, KJ;                 // K = W KJ W^{-1}
  bool diagonalizable = true;
  cplx det{1.0};

  // Numerically safest spectral-curve choice: the largest eigenvalue.
  int largest_eigenvalue_index() const {
    int best = 0;
    for (int i = 1; i < block_count(); ++i)
      if (std::abs(blocks[i].eigenvalue) > std::abs(blocks[best].eigenvalue)) best = i;
    return best;
  }

  int block_count() const { return static_cast<int>(blocks.size()); }
  int block_offset(int b) const {
    int off = 0;
    for (int i = 0; i < b; ++i) off += blocks[i].size;
    return off;
  }
  // Eigenvalues repeated per dimension, in block order.
  Vec eigenvalues_full() const {
    Vec v;
    for (const auto& b : blocks) v.insert(v.end(), b.size, b.eigenvalue);
    return v;
  }
};

TwistMatrix make_twist(const Mat& K, const Tolerances& tol = {});
Mat twist_from_blocks(const std::vector<JordanBlock>& blocks);  // Jordan matrix itself
Mat random_simple_twist(int n, Rng& rng, const Tolerances& tol = {});

// One model instance: gl_n fundamental chain of N sites with inhomogeneities
// xi, shift eta and twist K.
struct ModelContext {
  int n = 2;
  int N = 1;
  cplx eta{1.0, 0.0};
  Vec xi;
  cplx xi_extra{0.0, 0.0};  // extra interpolation node for the phi system
  TwistMatrix twist;
  Tolerances tol;
  std::uint64_t rng_seed = 1;
  int max_state_dim = 256;

  int state_dim() const {
    long d = 1;
    for (int i = 0; i < N; ++i) d *= n;
    return static_cast<int>(d);
  }
  TensorSpace quantum_space() const { return TensorSpace::uniform(N, n); }
  cplx probe_point() const {
    cplx mean = 0.0;
    for (cplx x : xi) mean += x;
    mean /= static_cast<double>(N);
    return mean + cplx(0.318, 0.739);
  }
};

// Validated construction; xi_extra defaults to xi_1 - eta when unset (NaN).
ModelContext make_context(int n, int N, cplx eta, Vec xi, const Mat& K,
                          const Tolerances& tol = {}, std::uint64_t rng_seed = 1,
                          int max_state_dim = 256,
                          cplx xi_extra = cplx(std::nan(""), 0.0));

// Inhomogeneities drawn i.i.d. on a complex disk, re-drawn until the
// resonance window holds with the requested margin.
Vec random_xi(int n, int N, cplx eta, Rng& rng, double window, double radius = 1.0,
              int max_tries = 4096);

// ---- Section-level operations ------------------------------------------

Mat r_matrix_block(int n, cplx u, cplx eta);            // on C^n x C^n
DenseOperator r_matrix(const ModelContext& ctx, cplx u);

double yang_baxter_residual(const ModelContext& ctx, cplx la, cplx lb, cplx lc);
double twist_invariance_residual(const ModelContext& ctx, cplx u);

// Twisted monodromy on the auxiliary space (factor 0) tensor the chain.
DenseOperator monodromy(const ModelContext& ctx, cplx u);

// Fused transfer matrix of order m, 1 <= m <= n, acting on the chain. The
// primary implementation streams two-site gates through per-column slabs and
// is OpenMP parallel; the serial reference builds the same operator by dense
// embedded products and is kept for validation and benchmarks.
DenseOperator transfer(const ModelContext& ctx, int m, cplx u);
DenseOperator transfer_serial_reference(const ModelContext& ctx, int m, cplx u);

cplx q_det_closed_form(const ModelContext& ctx, cplx u);
Polynomial q_det_polynomial(const ModelContext& ctx);

// Leading coefficient scalar of T_m, i.e. tr[P^- K x ... x K].
cplx asymptotic(const ModelContext& ctx, int m);

// Interpolation weight g_a^{(m)} at point u for shift tuple h (size N).
cplx g_function(const ModelContext& ctx, int a, int m, cplx u, const std::vector<int>& h);
cplx g_function(const ModelContext& ctx, int a, int m, cplx u);  // h = 0

// Eagerly built grid cache T_m(xi_a + r eta), m in [1,n], a in [0,N),
// r in [-1, n-1], plus the asymptotic scalars.
struct TransferFamily {
  int n = 0, N = 0;
  std::vector<Mat> grid;
  Vec asymptotics;  // index m-1 -> T_m^{(K,inf)}

  const Mat& at(int m, int a, int r) const {
    if (m < 1 || m > n || a < 0 || a >= N || r < -1 || r >= n)
      throw ConstructionError("transfer cache: key off the (m, a, r) grid, rebuild the family");
    return grid[static_cast<size_t>(((m - 1) * N + a) * (n + 1) + (r + 1))];
  }
};
TransferFamily build_family(const ModelContext& ctx);

double fusion_residual(const ModelContext& ctx, const TransferFamily& fam, int a, int m);

// T_{m+1}(u) rebuilt from the cached T_m(xi_a - eta) T_1(xi_a) products and
// the asymptotic term; independent of the fused construction.
DenseOperator transfer_interpolated(const ModelContext& ctx, const TransferFamily& fam,
                                    int m_plus_1, cplx u);

// ---- Norm helpers shared by the verification suites ----------------------

inline double rel_diff(const Mat& A, const Mat& B) {
  const double scale = std::max(frob_norm(A), frob_norm(B));
  if (scale == 0.0) return 0.0;
  return frob_norm(A - B) / scale;
}

double commutator_rel_norm(const Mat& A, const Mat& B);

}  // namespace sovlat

#endif
