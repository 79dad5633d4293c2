#include "sovlat/sov.hpp"

#include <algorithm>

#include "sovlat/linalg.hpp"

namespace sovlat {

int h_to_index(const std::vector<int>& h, int n) {
  int idx = 0, base = 1;
  for (int v : h) {
    idx += v * base;
    base *= n;
  }
  return idx;
}

std::vector<int> h_from_index(int idx, int n, int N) {
  std::vector<int> h(N);
  for (int a = 0; a < N; ++a) {
    h[a] = idx % n;
    idx /= n;
  }
  return h;
}

SeedCovector build_seed(const ModelContext& ctx) {
  return build_seed(ctx, std::vector<Vec>(ctx.N, Vec(ctx.n, 1.0)));
}

SeedCovector build_seed(const ModelContext& ctx, const std::vector<Vec>& weights) {
  if (static_cast<int>(weights.size()) != ctx.N)
    throw ConstructionError("seed: need one weight row per site");
  for (const Vec& w : weights) {
    if (static_cast<int>(w.size()) != ctx.n)
      throw ConstructionError("seed: weight rows must have n entries");
    for (int b = 0; b < ctx.twist.block_count(); ++b)
      if (std::abs(w[ctx.twist.block_offset(b)]) == 0.0)
        throw ConstructionError(
            "seed: invalid weights, leading slot of a Jordan block vanishes");
  }

  // <S,a| = w_a W; the assembled covector is their tensor product times the
  // inverse of the sitewise similarity.
  Vec row{1.0};
  for (int a = 0; a < ctx.N; ++a) {
    const Vec site = vecmat(weights[a], ctx.twist.W);
    Vec next(row.size() * site.size());
    for (size_t i = 0; i < row.size(); ++i)
      for (size_t j = 0; j < site.size(); ++j) next[i * site.size() + j] = row[i] * site[j];
    row = std::move(next);
  }
  Mat gamma_inv = Mat::identity(1);
  for (int a = 0; a < ctx.N; ++a) gamma_inv = kron(gamma_inv, ctx.twist.W_inv);
  row = vecmat(row, gamma_inv);

  const double nrm = vec_norm(row);
  if (nrm == 0.0) throw ConstructionError("seed: zero covector");
  for (cplx& z : row) z /= nrm;
  return SeedCovector{std::move(row), weights};
}

SovBasis build_basis(const ModelContext& ctx, const TransferFamily& fam,
                     const SeedCovector& seed) {
  const int dq = ctx.state_dim();
  if (static_cast<int>(seed.row.size()) != dq)
    throw ConstructionError("basis: seed dimension mismatch");

  SovBasis basis;
  basis.seed = seed;
  basis.U = Mat(dq, dq);
  for (int j = 0; j < dq; ++j) basis.U(0, j) = seed.row[j];

  // Powers of n for predecessor lookup.
  std::vector<int> pow_n(ctx.N, 1);
  for (int a = 1; a < ctx.N; ++a) pow_n[a] = pow_n[a - 1] * ctx.n;

  for (int idx = 1; idx < dq; ++idx) {
    const std::vector<int> h = h_from_index(idx, ctx.n, ctx.N);
    int a_last = 0;
    for (int a = 0; a < ctx.N; ++a)
      if (h[a] > 0) a_last = a;
    const int prev = idx - pow_n[a_last];
    Vec row(dq);
    for (int j = 0; j < dq; ++j) row[j] = basis.U(prev, j);
    row = vecmat(row, fam.at(1, a_last, 0));
    for (int j = 0; j < dq; ++j) basis.U(idx, j) = row[j];
  }

  const LuFactor lu(basis.U);
  basis.det_U = lu.det();
  const auto sv = singular_values(basis.U);
  basis.cond = sv.back() > 0.0 ? sv.front() / sv.back() : 1e308;

  double log_scale = 0.0;
  for (int i = 0; i < dq; ++i) {
    double rn = 0.0;
    for (int j = 0; j < dq; ++j) rn += std::norm(basis.U(i, j));
    log_scale += 0.5 * std::log(std::max(rn, 1e-300));
  }
  const double floor_det = ctx.tol.basis_det * std::exp(log_scale);
  if (!(std::abs(basis.det_U) > floor_det))
    throw DegenerateBasis("basis: |det U| below the genericity floor", std::abs(basis.det_U),
                          basis.cond);
  basis.U_inv = lu.inverse();
  return basis;
}

cplx b_eigenvalue(const ModelContext& ctx, const std::vector<int>& h, cplx u) {
  cplx v = 1.0;
  for (int a = 0; a < ctx.N; ++a) {
    for (int r = 0; r < ctx.n - 1 - h[a]; ++r) v *= (u - ctx.xi[a]);
    for (int r = 0; r < h[a]; ++r) v *= (u - ctx.xi[a] + ctx.eta);
  }
  return v;
}

DenseOperator b_operator(const ModelContext& ctx, const SovBasis& basis, cplx u) {
  const int dq = ctx.state_dim();
  Mat DU(dq, dq);
  for (int i = 0; i < dq; ++i) {
    const cplx b = b_eigenvalue(ctx, h_from_index(i, ctx.n, ctx.N), u);
    for (int j = 0; j < dq; ++j) DU(i, j) = b * basis.U(i, j);
  }
  return DenseOperator(ctx.quantum_space(), matmul(basis.U_inv, DU));
}

namespace {

Mat transpose(const Mat& A) {
  Mat T(A.cols, A.rows);
  for (int i = 0; i < A.rows; ++i)
    for (int j = 0; j < A.cols; ++j) T(j, i) = A(i, j);
  return T;
}

}  // namespace

StructureConstants structure_constants(const ModelContext& ctx, const TransferFamily& fam,
                                       const SovBasis& basis, int a) {
  if (a < 0 || a >= ctx.N) throw ConstructionError("structure_constants: site out of range");
  const int dq = ctx.state_dim();
  const Mat& T1a = fam.at(1, a, 0);

  LuFactor ut(transpose(basis.U));
  StructureConstants sc;
  sc.site = a;
  sc.C = Mat(dq, dq);
  double worst = 0.0;
  for (int idx = 0; idx < dq; ++idx) {
    Vec row(dq);
    for (int j = 0; j < dq; ++j) row[j] = basis.U(idx, j);
    const Vec target = vecmat(row, T1a);
    Vec coef;
    try {
      coef = ut.solve(target);
    } catch (const NumericalFailure&) {
      throw DegenerateBasis("structure_constants: singular basis solve", std::abs(basis.det_U),
                            basis.cond);
    }
    for (int j = 0; j < dq; ++j) sc.C(idx, j) = coef[j];

    // Re-multiply and compare.
    Vec rebuilt(dq, 0.0);
    for (int hp = 0; hp < dq; ++hp) {
      const cplx c = coef[hp];
      if (c == cplx(0.0)) continue;
      for (int j = 0; j < dq; ++j) rebuilt[j] += c * basis.U(hp, j);
    }
    double diff = 0.0, scale = 0.0;
    for (int j = 0; j < dq; ++j) {
      diff += std::norm(rebuilt[j] - target[j]);
      scale += std::norm(target[j]);
    }
    if (scale > 0.0) worst = std::max(worst, std::sqrt(diff / scale));
  }
  sc.max_residual = worst;
  return sc;
}

}  // namespace sovlat
