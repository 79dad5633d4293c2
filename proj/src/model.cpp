#include "sovlat/model.hpp"

#include <algorithm>
#include <functional>
#include <numeric>

#include "sovlat/linalg.hpp"

namespace sovlat {

namespace {

double matrix_scale(const Mat& K) {
  return std::max(frob_norm(K) / std::sqrt(static_cast<double>(std::max(K.rows, 1))), 1e-30);
}

// Connected clustering of eigenvalues within the gap (transitive closure).
std::vector<std::vector<int>> cluster_values(const Vec& w, double gap) {
  const int n = static_cast<int>(w.size());
  std::vector<int> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  std::function<int(int)> find = [&](int x) { return parent[x] == x ? x : parent[x] = find(parent[x]); };
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (std::abs(w[i] - w[j]) <= gap) parent[find(i)] = find(j);
  std::vector<std::vector<int>> groups(n);
  for (int i = 0; i < n; ++i) groups[find(i)].push_back(i);
  std::vector<std::vector<int>> out;
  for (auto& g : groups)
    if (!g.empty()) out.push_back(std::move(g));
  return out;
}

std::vector<Vec> kernel_columns(const Mat& A, double cut_abs) {
  const Svd s = svd(A);
  std::vector<Vec> cols;
  const int n = A.cols;
  for (int j = 0; j < n; ++j) {
    const double sigma = j < static_cast<int>(s.s.size()) ? s.s[j] : 0.0;
    if (sigma <= cut_abs) {
      Vec v(n);
      for (int i = 0; i < n; ++i) v[i] = std::conj(s.vh(j, i));
      cols.push_back(std::move(v));
    }
  }
  return cols;
}

void phase_fix_chain(std::vector<Vec>& chain) {
  if (chain.empty() || chain[0].empty()) return;
  // Normalize the head vector and rotate the largest entry to the positive
  // real axis; the whole chain scales together to keep the block coupling.
  int arg = 0;
  double best = 0.0;
  for (size_t i = 0; i < chain[0].size(); ++i)
    if (std::abs(chain[0][i]) > best) {
      best = std::abs(chain[0][i]);
      arg = static_cast<int>(i);
    }
  const cplx z = chain[0][arg];
  const double nrm = vec_norm(chain[0]);
  if (nrm == 0.0 || z == cplx(0.0)) throw NumericalFailure("twist: zero Jordan chain head");
  const cplx factor = (std::abs(z) / z) / nrm;
  for (Vec& v : chain)
    for (cplx& e : v) e *= factor;
}

}  // namespace

Mat twist_from_blocks(const std::vector<JordanBlock>& blocks) {
  int n = 0;
  for (const auto& b : blocks) n += b.size;
  Mat K(n, n);
  int off = 0;
  for (const auto& b : blocks) {
    for (int i = 0; i < b.size; ++i) {
      K(off + i, off + i) = b.eigenvalue;
      if (i + 1 < b.size) K(off + i, off + i + 1) = 1.0;
    }
    off += b.size;
  }
  return K;
}

namespace {

struct SpectrumCluster {
  cplx k;
  int size;
};

// Assemble W and the Jordan blocks for one clustering hypothesis; returns
// false when the reconstruction residual rejects it.
bool assemble_jordan(const Mat& K, const std::vector<SpectrumCluster>& clusters, double scale,
                     TwistMatrix& tw) {
  const int n = K.rows;
  tw.blocks.clear();
  tw.diagonalizable = true;
  tw.W = Mat(n, n);
  int col = 0;
  for (const SpectrumCluster& cl : clusters) {
    tw.blocks.push_back({cl.k, cl.size});
    std::vector<Vec> chain;
    Mat M = K;
    for (int i = 0; i < n; ++i) M(i, i) -= cl.k;
    if (cl.size == 1) {
      auto cols = kernel_columns(M, 1e-6 * scale);
      if (cols.empty()) return false;
      chain.push_back(cols.front());
    } else {
      std::vector<Mat> pw(cl.size + 1);
      pw[0] = Mat::identity(n);
      for (int j = 1; j <= cl.size; ++j) pw[j] = matmul(M, pw[j - 1]);
      const double cut = 1e-6 * std::max(std::pow(scale, cl.size), 1e-30);
      auto cols = kernel_columns(pw[cl.size], cut);
      if (static_cast<int>(cols.size()) < cl.size) return false;
      // Pick the kernel vector reaching deepest into the chain.
      Vec best;
      double best_norm = -1.0;
      for (const Vec& cand : cols) {
        const Vec img = matvec(pw[cl.size - 1], cand);
        if (vec_norm(img) > best_norm) {
          best_norm = vec_norm(img);
          best = cand;
        }
      }
      if (best_norm <= 1e-10 * std::pow(scale, cl.size - 1)) return false;
      chain.assign(cl.size, Vec());
      chain[cl.size - 1] = best;
      for (int j = cl.size - 1; j > 0; --j) chain[j - 1] = matvec(M, chain[j]);
    }
    phase_fix_chain(chain);
    for (const Vec& v : chain) {
      for (int i = 0; i < n; ++i) tw.W(i, col) = v[i];
      ++col;
    }
    if (cl.size > 1) tw.diagonalizable = false;
  }

  tw.KJ = twist_from_blocks(tw.blocks);
  try {
    tw.W_inv = inverse(tw.W);
  } catch (const NumericalFailure&) {
    return false;
  }
  const Mat rebuilt = matmul(tw.W, matmul(tw.KJ, tw.W_inv));
  return frob_norm(rebuilt - K) <= 1e-10 * std::max(frob_norm(K), 1e-30);
}

}  // namespace

TwistMatrix make_twist(const Mat& K, const Tolerances& tol) {
  if (K.rows != K.cols || K.rows < 1) throw ConstructionError("twist: matrix must be square");
  if (!K.finite()) throw ConstructionError("twist: non-finite entries");
  const int n = K.rows;
  const double scale = matrix_scale(K);

  TwistMatrix tw;
  tw.n = n;
  tw.K = K;
  tw.det = LuFactor(K).det();
  if (std::abs(tw.det) <= tol.twist_det * std::pow(scale, n))
    throw ConstructionError("twist: matrix is not invertible");

  // Non-derogatory check: the Krylov space of a generic vector must fill C^n.
  {
    Rng krng(0x5eedULL + static_cast<std::uint64_t>(n));
    Vec v(n);
    for (cplx& z : v) z = krng.box(1.0) + cplx(0.1, 0.1);
    Mat khry(n, n);
    Vec cur = v;
    for (int j = 0; j < n; ++j) {
      for (int i = 0; i < n; ++i) khry(i, j) = cur[i];
      cur = matvec(K, cur);
    }
    if (numerical_rank(khry, 1e-8) < n)
      throw ConstructionError(
          "twist: matrix is derogatory (repeated Jordan blocks per eigenvalue), not w-simple");
  }

  const EigenDecomposition ed = eigen_decompose(K);

  // A defective eigenvalue of a size-d block splits by roughly eps^{1/d}
  // under diagonalization, so the clustering gap escalates until the Jordan
  // reconstruction residual accepts the hypothesis.
  for (double factor : {1.0, 1e2, 1e4, 1e5}) {
    const double gap = tol.twist_gap * scale * factor;
    auto groups = cluster_values(ed.eigenvalues, gap);
    std::vector<SpectrumCluster> clusters;
    for (auto& g : groups) {
      cplx mean = 0.0;
      for (int i : g) mean += ed.eigenvalues[i];
      mean /= static_cast<double>(g.size());
      clusters.push_back({mean, static_cast<int>(g.size())});
    }
    bool separated = true;
    for (size_t i = 0; i < clusters.size(); ++i)
      for (size_t j = i + 1; j < clusters.size(); ++j)
        separated = separated && std::abs(clusters[i].k - clusters[j].k) > gap;
    if (!separated) continue;
    std::sort(clusters.begin(), clusters.end(), [](const SpectrumCluster& a, const SpectrumCluster& b) {
      if (a.k.real() != b.k.real()) return a.k.real() < b.k.real();
      return a.k.imag() < b.k.imag();
    });
    if (assemble_jordan(K, clusters, scale, tw)) return tw;
  }
  throw ConstructionError(
      "twist: no Jordan hypothesis reproduces K to tolerance, spectrum ambiguous");
}

Mat random_simple_twist(int n, Rng& rng, const Tolerances& tol) {
  // Generation margin well above the detection gap.
  const double margin = std::max(0.05, 1e4 * tol.twist_gap);
  for (int attempt = 0; attempt < 256; ++attempt) {
    Mat K(n, n);
    for (cplx& z : K.a) z = rng.box(1.0);
    for (int i = 0; i < n; ++i) K(i, i) += cplx(0.5, 0.0);  // push away from singularity
    try {
      const double scale = matrix_scale(K);
      const EigenDecomposition ed = eigen_decompose(K);
      double min_gap = 1e300, min_abs = 1e300;
      for (int i = 0; i < n; ++i) {
        min_abs = std::min(min_abs, std::abs(ed.eigenvalues[i]));
        for (int j = i + 1; j < n; ++j)
          min_gap = std::min(min_gap, std::abs(ed.eigenvalues[i] - ed.eigenvalues[j]));
      }
      if (min_gap > margin * scale && min_abs > margin * scale) return K;
    } catch (const Error&) {
    }
  }
  throw NumericalFailure("random_simple_twist: no acceptable draw");
}

Vec random_xi(int n, int N, cplx eta, Rng& rng, double window, double radius, int max_tries) {
  for (int attempt = 0; attempt < max_tries; ++attempt) {
    Vec xi(N);
    for (cplx& z : xi) z = rng.disk(radius);
    bool ok = true;
    for (int a = 0; a < N && ok; ++a)
      for (int b = 0; b < N && ok; ++b) {
        if (a == b) continue;
        for (int r = -n; r <= n; ++r)
          if (std::abs(xi[a] - xi[b] - static_cast<double>(r) * eta) <= window) {
            ok = false;
            break;
          }
      }
    if (ok) return xi;
  }
  throw ConstructionError("random_xi: could not satisfy the genericity window");
}

ModelContext make_context(int n, int N, cplx eta, Vec xi, const Mat& K, const Tolerances& tol,
                          std::uint64_t rng_seed, int max_state_dim, cplx xi_extra) {
  if (n < 2) throw ConfigError("model: n must be at least 2");
  if (N < 1) throw ConfigError("model: N must be at least 1");
  if (std::abs(eta) == 0.0) throw ConfigError("model: eta must be nonzero");
  if (static_cast<int>(xi.size()) != N) throw ConfigError("model: xi must list N values");

  ModelContext ctx;
  ctx.n = n;
  ctx.N = N;
  ctx.eta = eta;
  ctx.xi = std::move(xi);
  ctx.tol = tol;
  ctx.rng_seed = rng_seed;
  ctx.max_state_dim = max_state_dim;

  long dim = 1;
  for (int i = 0; i < N; ++i) {
    dim *= n;
    if (dim > max_state_dim)
      throw ConfigError("model: state count n^N exceeds the configured cap of " +
                        std::to_string(max_state_dim));
  }

  for (int a = 0; a < N; ++a)
    for (int b = 0; b < N; ++b) {
      if (a == b) continue;
      for (int r = -n; r <= n; ++r)
        if (std::abs(ctx.xi[a] - ctx.xi[b] - static_cast<double>(r) * eta) <=
            tol.resonance_window)
          throw ConstructionError(
              "model: degenerate inhomogeneities, xi_a - xi_b hits r*eta inside the window");
    }

  ctx.twist = make_twist(K, tol);
  if (ctx.twist.n != n) throw ConfigError("model: twist dimension disagrees with n");

  if (std::isnan(xi_extra.real()))
    ctx.xi_extra = ctx.xi[0] - eta;
  else
    ctx.xi_extra = xi_extra;
  for (cplx x : ctx.xi)
    if (std::abs(ctx.xi_extra - x) <= tol.node_gap)
      throw ConstructionError("model: xi_extra collides with an inhomogeneity");
  return ctx;
}

// ---- R-matrix level -------------------------------------------------------

Mat r_matrix_block(int n, cplx u, cplx eta) {
  Mat R(n * n, n * n);
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < n; ++k) {
      R(i * n + k, i * n + k) += u;
      R(i * n + k, k * n + i) += eta;
    }
  return R;
}

DenseOperator r_matrix(const ModelContext& ctx, cplx u) {
  return DenseOperator(TensorSpace::uniform(2, ctx.n), r_matrix_block(ctx.n, u, ctx.eta));
}

double yang_baxter_residual(const ModelContext& ctx, cplx la, cplx lb, cplx lc) {
  const int n = ctx.n;
  const TensorSpace sp = TensorSpace::uniform(3, n);
  const Mat r12 = embed(sp, r_matrix_block(n, la - lb, ctx.eta), {0, 1}).mat;
  const Mat r13 = embed(sp, r_matrix_block(n, la - lc, ctx.eta), {0, 2}).mat;
  const Mat r23 = embed(sp, r_matrix_block(n, lb - lc, ctx.eta), {1, 2}).mat;
  const Mat lhs = matmul(r12, matmul(r13, r23));
  const Mat rhs = matmul(r23, matmul(r13, r12));
  return rel_diff(lhs, rhs);
}

double twist_invariance_residual(const ModelContext& ctx, cplx u) {
  const Mat R = r_matrix_block(ctx.n, u, ctx.eta);
  const Mat KK = kron(ctx.twist.K, ctx.twist.K);
  return rel_diff(matmul(R, KK), matmul(KK, R));
}

// ---- Monodromy and fused transfer matrices --------------------------------

DenseOperator monodromy(const ModelContext& ctx, cplx u) {
  const int n = ctx.n;
  const long dim = static_cast<long>(n) * ctx.state_dim();
  if (dim > kDefaultDimCap)
    throw ConstructionError("monodromy: instance too large for the operator cap");
  std::vector<int> dims(1 + ctx.N, n);
  const TensorSpace sp{dims};
  const FactorLayout L = sp.layout();
  Mat X = Mat::identity(sp.total_dim);
  for (int l = 1; l <= ctx.N; ++l)
    apply_swap_gate(X, L, 0, l, u - ctx.xi[l - 1], ctx.eta);
  apply_factor_gate(X, L, 0, ctx.twist.K);
  return DenseOperator(sp, std::move(X));
}

namespace {

struct ProjectorEntry {
  int row, col;
  cplx val;
};

std::vector<ProjectorEntry> projector_nonzeros(const Mat& P) {
  std::vector<ProjectorEntry> nz;
  for (int i = 0; i < P.rows; ++i)
    for (int j = 0; j < P.cols; ++j)
      if (P(i, j) != cplx(0.0)) nz.push_back({i, j, P(i, j)});
  return nz;
}

}  // namespace

DenseOperator transfer(const ModelContext& ctx, int m, cplx u) {
  const int n = ctx.n, N = ctx.N;
  if (m < 1 || m > n) throw ConstructionError("transfer: fusion order out of range");
  const int dq = ctx.state_dim();
  long daux = 1;
  for (int i = 0; i < m; ++i) daux *= n;
  const long D = daux * dq;
  if (D > kDefaultDimCap) throw ConstructionError("transfer: instance too large for the cap");

  const Mat P = antisymmetrizer(m, n).mat;
  const auto nz = projector_nonzeros(P);

  std::vector<int> dims(m + N, n);
  const FactorLayout L{dims};
  Mat T(dq, dq);

#pragma omp parallel for schedule(dynamic)
  for (int qc = 0; qc < dq; ++qc) {
    Mat slab(static_cast<int>(D), static_cast<int>(daux));
    for (long A = 0; A < daux; ++A) slab(static_cast<int>(A * dq + qc), static_cast<int>(A)) = 1.0;
    for (int j = m; j >= 1; --j) {
      const cplx lam = u - static_cast<double>(j - 1) * ctx.eta;
      for (int l = 1; l <= N; ++l)
        apply_swap_gate_serial(slab, L, j - 1, m + l - 1, lam - ctx.xi[l - 1], ctx.eta);
      apply_factor_gate_serial(slab, L, j - 1, ctx.twist.K);
    }
    for (const auto& e : nz)
      for (int q = 0; q < dq; ++q)
        T(q, qc) += e.val * slab(static_cast<int>(static_cast<long>(e.col) * dq + q), e.row);
  }
  return DenseOperator(ctx.quantum_space(), std::move(T));
}

DenseOperator transfer_serial_reference(const ModelContext& ctx, int m, cplx u) {
  const int n = ctx.n, N = ctx.N;
  if (m < 1 || m > n) throw ConstructionError("transfer: fusion order out of range");
  long daux = 1;
  for (int i = 0; i < m; ++i) daux *= n;
  const long D = daux * ctx.state_dim();
  if (D > kDefaultDimCap) throw ConstructionError("transfer: instance too large for the cap");

  std::vector<int> dims(m + N, n);
  const TensorSpace sp{dims};
  Mat prod = Mat::identity(sp.total_dim);
  for (int j = 1; j <= m; ++j) {
    const cplx lam = u - static_cast<double>(j - 1) * ctx.eta;
    Mat Mj = Mat::identity(sp.total_dim);
    for (int l = 1; l <= N; ++l) {
      const Mat R = embed(sp, r_matrix_block(n, lam - ctx.xi[l - 1], ctx.eta), {j - 1, m + l - 1}).mat;
      Mj = matmul_serial(R, Mj);
    }
    Mj = matmul_serial(embed(sp, ctx.twist.K, {j - 1}).mat, Mj);
    prod = matmul_serial(prod, Mj);
  }
  std::vector<int> aux_factors(m);
  std::iota(aux_factors.begin(), aux_factors.end(), 0);
  const Mat proj = embed(sp, antisymmetrizer(m, n).mat, aux_factors).mat;
  prod = matmul_serial(proj, prod);
  std::vector<int> keep(N);
  std::iota(keep.begin(), keep.end(), m);
  return partial_trace(DenseOperator(sp, std::move(prod)), keep);
}

cplx q_det_closed_form(const ModelContext& ctx, cplx u) {
  cplx v = ctx.twist.det;
  for (int b = 0; b < ctx.N; ++b) {
    v *= (u - ctx.xi[b] + ctx.eta);
    for (int k = 1; k <= ctx.n - 1; ++k) v *= (u - ctx.xi[b] - static_cast<double>(k) * ctx.eta);
  }
  return v;
}

Polynomial q_det_polynomial(const ModelContext& ctx) {
  Vec roots;
  for (int b = 0; b < ctx.N; ++b) {
    roots.push_back(ctx.xi[b] - ctx.eta);
    for (int k = 1; k <= ctx.n - 1; ++k)
      roots.push_back(ctx.xi[b] + static_cast<double>(k) * ctx.eta);
  }
  return ctx.twist.det * Polynomial::from_roots(roots);
}

cplx asymptotic(const ModelContext& ctx, int m) {
  if (m < 1 || m > ctx.n) throw ConstructionError("asymptotic: order out of range");
  Mat kk = ctx.twist.K;
  for (int j = 1; j < m; ++j) kk = kron(kk, ctx.twist.K);
  return trace(matmul(antisymmetrizer(m, ctx.n).mat, kk));
}

cplx g_function(const ModelContext& ctx, int a, int m, cplx u, const std::vector<int>& h) {
  if (a < 0 || a >= ctx.N) throw ConstructionError("g_function: site index out of range");
  if (m < 1 || m > ctx.n) throw ConstructionError("g_function: order out of range");
  if (static_cast<int>(h.size()) != ctx.N)
    throw ConstructionError("g_function: shift tuple must have N entries");
  auto xih = [&](int b) { return ctx.xi[b] - static_cast<double>(h[b]) * ctx.eta; };
  cplx v = 1.0;
  for (int b = 0; b < ctx.N; ++b) {
    if (b == a) continue;
    const cplx den = xih(a) - xih(b);
    if (std::abs(den) < 1e-300)
      throw ConstructionError("g_function: degenerate inhomogeneities");
    v *= (u - xih(b)) / den;
  }
  for (int b = 0; b < ctx.N; ++b)
    for (int r = 1; r <= m - 1; ++r) {
      const cplx den = xih(a) - (ctx.xi[b] + static_cast<double>(r) * ctx.eta);
      if (std::abs(den) < 1e-300)
        throw ConstructionError("g_function: degenerate inhomogeneities");
      v /= den;
    }
  return v;
}

cplx g_function(const ModelContext& ctx, int a, int m, cplx u) {
  return g_function(ctx, a, m, u, std::vector<int>(ctx.N, 0));
}

TransferFamily build_family(const ModelContext& ctx) {
  TransferFamily fam;
  fam.n = ctx.n;
  fam.N = ctx.N;
  fam.grid.resize(static_cast<size_t>(ctx.n) * ctx.N * (ctx.n + 1));
  for (int m = 1; m <= ctx.n; ++m)
    for (int a = 0; a < ctx.N; ++a)
      for (int r = -1; r < ctx.n; ++r) {
        const cplx u = ctx.xi[a] + static_cast<double>(r) * ctx.eta;
        fam.grid[static_cast<size_t>(((m - 1) * ctx.N + a) * (ctx.n + 1) + (r + 1))] =
            transfer(ctx, m, u).mat;
      }
  fam.asymptotics.resize(ctx.n);
  for (int m = 1; m <= ctx.n; ++m) fam.asymptotics[m - 1] = asymptotic(ctx, m);
  return fam;
}

double fusion_residual(const ModelContext& ctx, const TransferFamily& fam, int a, int m) {
  if (m < 1 || m > ctx.n - 1) throw ConstructionError("fusion_residual: order out of range");
  const Mat lhs = matmul(fam.at(1, a, 0), fam.at(m, a, -1));
  const Mat& rhs = fam.at(m + 1, a, 0);
  return rel_diff(lhs, rhs);
}

DenseOperator transfer_interpolated(const ModelContext& ctx, const TransferFamily& fam,
                                    int m_plus_1, cplx u) {
  if (m_plus_1 < 2 || m_plus_1 > ctx.n)
    throw ConstructionError("transfer_interpolated: order out of range");
  const int m = m_plus_1 - 1;
  const int dq = ctx.state_dim();
  cplx pref = 1.0;
  for (int b = 0; b < ctx.N; ++b)
    for (int r = 1; r <= m; ++r) pref *= (u - ctx.xi[b] - static_cast<double>(r) * ctx.eta);
  cplx nodal = 1.0;
  for (int b = 0; b < ctx.N; ++b) nodal *= (u - ctx.xi[b]);

  Mat acc(dq, dq);
  const cplx asym_term = fam.asymptotics[m_plus_1 - 1] * nodal;
  for (int i = 0; i < dq; ++i) acc(i, i) = asym_term;
  for (int a = 0; a < ctx.N; ++a) {
    const cplx g = g_function(ctx, a, m_plus_1, u);
    const Mat prod = matmul(fam.at(m, a, -1), fam.at(1, a, 0));
    for (size_t i = 0; i < acc.a.size(); ++i) acc.a[i] += g * prod.a[i];
  }
  for (cplx& z : acc.a) z *= pref;
  return DenseOperator(ctx.quantum_space(), std::move(acc));
}

double commutator_rel_norm(const Mat& A, const Mat& B) {
  const double scale = frob_norm(A) * frob_norm(B);
  if (scale == 0.0) return 0.0;
  return frob_norm(matmul(A, B) - matmul(B, A)) / scale;
}

}  // namespace sovlat
