#include "sovlat/qsc.hpp"

#include <algorithm>
#include <numeric>

#include "sovlat/linalg.hpp"

namespace sovlat {

namespace {

// Lagrange cardinal function over the given nodes evaluated at y.
cplx lagrange_at(const Vec& nodes, int s, cplx y) {
  cplx v = 1.0;
  for (size_t c = 0; c < nodes.size(); ++c) {
    if (static_cast<int>(c) == s) continue;
    v *= (y - nodes[c]) / (nodes[s] - nodes[c]);
  }
  return v;
}

struct PhiSolve {
  bool ok = false;
  Mat C;
  Vec values;  // phi(xi_1..xi_N) with phi(xi_extra) = 1
  cplx det_C{0.0};
};

// Linear system fixing phi on the nodes from the discrete ratio conditions
// t1(xi_r) phi(xi_r) = alpha1(xi_r) phi(xi_r - eta).
PhiSolve solve_phi_system(const ModelContext& ctx, const Vec& t1_at_xi, const Vec& alpha1_at_xi,
                          cplx xi_extra) {
  const int N = ctx.N;
  PhiSolve out;
  Vec nodes = ctx.xi;
  nodes.push_back(xi_extra);
  for (int a = 0; a < N; ++a)
    if (std::abs(xi_extra - ctx.xi[a]) <= ctx.tol.node_gap) return out;

  out.C = Mat(N, N);
  Vec rhs(N);
  for (int r = 0; r < N; ++r) {
    const cplx shifted = ctx.xi[r] - ctx.eta;
    for (int s = 0; s < N; ++s) {
      cplx v = lagrange_at(nodes, s, shifted);
      if (r == s) v -= t1_at_xi[r] / alpha1_at_xi[r];
      out.C(r, s) = v;
    }
    rhs[r] = -lagrange_at(nodes, N, shifted);
  }
  try {
    LuFactor lu(out.C);
    if (lu.rcond() < 1e-13) return out;
    out.det_C = lu.det();
    out.values = lu.solve(rhs);
  } catch (const NumericalFailure&) {
    return out;
  }
  out.ok = true;
  return out;
}

}  // namespace

QscCoefficients qsc_coefficients(const ModelContext& ctx, int i_index) {
  if (i_index < 0 || i_index >= ctx.twist.block_count())
    throw ConstructionError("qsc_coefficients: twist eigenvalue index out of range");
  QscCoefficients out;
  out.i_index = i_index;
  out.alpha_bar = ctx.twist.blocks[i_index].eigenvalue;
  if (std::abs(out.alpha_bar) < 1e-14)
    throw ConstructionError("qsc_coefficients: invalid alpha, chosen twist eigenvalue is zero");

  Vec a_roots;
  for (cplx x : ctx.xi) a_roots.push_back(x - ctx.eta);
  out.a = Polynomial::from_roots(a_roots);

  out.alpha.resize(ctx.n + 1);
  out.alpha[0] = Polynomial::constant(-1.0);
  out.alpha[1] = out.alpha_bar * out.a;
  Polynomial prod = out.alpha[1];
  for (int j = 1; j <= ctx.n - 1; ++j) {
    prod = prod * out.alpha[1].shifted_argument(-static_cast<double>(j) * ctx.eta);
    out.alpha[1 + j] = (j % 2 == 1 ? cplx(-1.0) : cplx(1.0)) * prod;
  }

  cplx sum = 0.0;
  double scale = 0.0;
  cplx pw = 1.0;
  for (int b = 0; b <= ctx.n; ++b) {
    const cplx tinf = b == ctx.n ? cplx(1.0) : asymptotic(ctx, ctx.n - b);
    const cplx term = (b % 2 == 0 ? cplx(-1.0) : cplx(1.0)) * pw * tinf;
    sum += term;
    scale = std::max(scale, std::abs(term));
    pw *= out.alpha_bar;
  }
  out.char_residual = std::abs(sum) / std::max(scale, 1e-300);
  return out;
}

std::pair<PhiPolynomial, CramerSystem> build_phi(const ModelContext& ctx, const Polynomial& t1,
                                                 const QscCoefficients& coeffs) {
  const int N = ctx.N;
  Vec t1_at(N), a1_at(N);
  for (int a = 0; a < N; ++a) {
    t1_at[a] = t1.eval(ctx.xi[a]);
    a1_at[a] = coeffs.alpha[1].eval(ctx.xi[a]);
    if (std::abs(a1_at[a]) < 1e-300)
      throw ConstructionError("build_phi: alpha_1 vanishes at an inhomogeneity");
  }

  Rng rng(ctx.rng_seed ^ 0x9e3779b97f4a7c15ULL);
  const double span = 1.0 + std::abs(ctx.eta);
  PhiSolve solve;
  cplx xi_extra = ctx.xi_extra;
  for (int attempt = 0; attempt < 16; ++attempt) {
    solve = solve_phi_system(ctx, t1_at, a1_at, xi_extra);
    if (solve.ok) break;
    xi_extra = rng.disk(2.0 * span);
  }
  if (!solve.ok)
    throw ConstructionError("build_phi: degenerate curve, no usable extra node after retries");

  CramerSystem cs;
  cs.C = solve.C;
  cs.det_C = solve.det_C;
  cs.xi_extra = xi_extra;
  cs.phi_values = solve.values;

  // Cramer route as a cross-check of the LU solve.
  Vec nodes = ctx.xi;
  nodes.push_back(xi_extra);
  cs.C_replaced.resize(N);
  double worst = 0.0;
  for (int j = 0; j < N; ++j) {
    Mat Cj = cs.C;
    for (int r = 0; r < N; ++r) {
      cplx v = 1.0;
      for (int l = 0; l < N; ++l) v *= (ctx.xi[r] - ctx.xi[l] - ctx.eta) / (xi_extra - ctx.xi[l]);
      Cj(r, j) = -v;
    }
    cs.C_replaced[j] = Cj;
    const cplx cram = determinant(Cj) / cs.det_C;
    worst = std::max(worst, std::abs(cram - cs.phi_values[j]) / (1.0 + std::abs(cs.phi_values[j])));
  }
  cs.cramer_vs_lu = worst;

  Vec values = cs.phi_values;
  values.push_back(1.0);
  const Polynomial raw = poly_from_samples(nodes, values, ctx.tol.node_gap);
  Polynomial monic = raw.trimmed(ctx.tol.degree_trim);
  if (monic.is_zero()) throw ConstructionError("build_phi: degenerate curve, phi collapsed to zero");
  monic = (cplx(1.0) / monic.leading()) * monic;

  PhiPolynomial phi;
  phi.phi = monic;
  phi.degree = monic.degree();
  phi.roots = monic.roots();

  double xi_scale = 1.0;
  for (cplx x : ctx.xi) xi_scale = std::max(xi_scale, std::abs(x));
  for (cplx r : phi.roots)
    for (cplx x : ctx.xi)
      if (std::abs(r - x) <= ctx.tol.phi_root_sep * xi_scale)
        throw ConstructionError("build_phi: invariant violation, phi root collides with xi");

  double ratio_worst = 0.0;
  for (int a = 0; a < N; ++a) {
    const cplx lhs = a1_at[a] * monic.eval(ctx.xi[a] - ctx.eta);
    const cplx rhs = t1_at[a] * monic.eval(ctx.xi[a]);
    const double sc = std::max({std::abs(lhs), std::abs(rhs), 1e-300});
    ratio_worst = std::max(ratio_worst, std::abs(lhs - rhs) / sc);
    if (std::abs(monic.eval(ctx.xi[a])) < 1e-12 * xi_scale)
      throw ConstructionError("build_phi: degenerate curve, phi vanishes on an inhomogeneity");
  }
  phi.ratio_residual = ratio_worst;
  return {phi, cs};
}

Mat delta_matrix(const ModelContext& ctx, cplx lambda, cplx xi_extra) {
  const int N = ctx.N;
  Mat D(N, N);
  Vec nodes = ctx.xi;
  nodes.push_back(xi_extra);
  for (int a = 0; a < N; ++a) {
    cplx num = 1.0;
    for (int c = 0; c < N; ++c) num *= (ctx.xi[c] - ctx.xi[a] + ctx.eta);
    for (int b = 0; b < N; ++b) {
      cplx den = 1.0;
      for (int c = 0; c <= N; ++c)
        if (c != b) den *= (nodes[c] - ctx.xi[b]);
      if (std::abs(ctx.xi[b] - lambda) < 1e-300)
        throw ConstructionError("delta_matrix: pole at lambda = xi_b");
      D(a, b) = (lambda - xi_extra) / (ctx.xi[b] - lambda) * num / den;
    }
  }
  return D;
}

Mat delta_bar_matrix(const ModelContext& ctx, cplx lambda, cplx xi_extra) {
  const int N = ctx.N;
  Mat D(N, N);
  Vec nodes = ctx.xi;
  nodes.push_back(xi_extra);
  for (int a = 0; a < N; ++a) {
    cplx row = 1.0;
    for (int c = 0; c < N; ++c) row *= (ctx.xi[a] - ctx.xi[c] - ctx.eta) / (xi_extra - ctx.xi[c]);
    for (int b = 0; b < N; ++b) D(a, b) = -lagrange_at(nodes, b, lambda) * row;
  }
  return D;
}

Vec qsc_probe_grid(const ModelContext& ctx) {
  Vec grid;
  for (int a = 0; a < ctx.N; ++a)
    for (int k = -1; k <= ctx.n - 1; ++k)
      grid.push_back(ctx.xi[a] + static_cast<double>(k) * ctx.eta);
  grid.push_back(ctx.probe_point());
  Rng rng(ctx.rng_seed ^ 0x715c2a3bULL);
  const double span = 1.0 + std::abs(ctx.eta);
  for (int j = 0; j < 3; ++j) grid.push_back(rng.disk(2.0 * span));
  return grid;
}

double qsc_residual(const ModelContext& ctx, const EigenPolys& polys, const PhiPolynomial& phi,
                    const QscCoefficients& coeffs) {
  const Vec grid = qsc_probe_grid(ctx);
  // Per-point sums normalized by the largest single term, floored by a
  // fraction of the grid-wide term scale: several grid points (xi_a - eta in
  // particular) have every term vanish identically and would otherwise
  // compare roundoff against roundoff.
  std::vector<cplx> sums(grid.size(), 0.0);
  std::vector<double> scales(grid.size(), 0.0);
  double global = 0.0;
  for (size_t p = 0; p < grid.size(); ++p) {
    for (int b = 0; b <= ctx.n; ++b) {
      const cplx ub = grid[p] - static_cast<double>(b) * ctx.eta;
      const cplx term =
          coeffs.alpha[b].eval(grid[p]) * phi.phi.eval(ub) * polys.t[ctx.n - b].eval(ub);
      sums[p] += term;
      scales[p] = std::max(scales[p], std::abs(term));
    }
    global = std::max(global, scales[p]);
  }
  double worst = 0.0;
  for (size_t p = 0; p < grid.size(); ++p)
    worst = std::max(worst, std::abs(sums[p]) / std::max({scales[p], 1e-3 * global, 1e-300}));
  return worst;
}

Mat QOperatorBuilder::at(cplx u) const {
  Mat scaled = V_inv;
  for (int i = 0; i < scaled.rows; ++i) {
    const cplx q = phi_ops[i].eval(u);
    for (int j = 0; j < scaled.cols; ++j) scaled(i, j) *= q;
  }
  return matmul(V, scaled);
}

QOperatorBuilder q_operator_builder(const ModelContext& ctx, const TransferFamily& fam,
                                    int i_index) {
  if (!ctx.twist.diagonalizable)
    throw UnsupportedTwist("q_operator: unsupported twist, needs diagonalizable simple spectrum");
  const QscCoefficients coeffs = qsc_coefficients(ctx, i_index);
  const int dq = ctx.state_dim();

  const Oracle oracle = brute_force_spectrum(ctx, fam);
  if (static_cast<int>(oracle.pairs.size()) != dq || oracle.defective)
    throw NumericalFailure("q_operator: transfer spectrum not simple at the probe point");

  QOperatorBuilder qb;
  qb.i_index = i_index;
  qb.alpha_bar = coeffs.alpha_bar;
  qb.V = Mat(dq, dq);
  for (int j = 0; j < dq; ++j)
    for (int i = 0; i < dq; ++i) qb.V(i, j) = oracle.pairs[j].eigenvector[i];
  qb.V_inv = inverse(qb.V);

  Vec a1_at(ctx.N);
  for (int a = 0; a < ctx.N; ++a) a1_at[a] = coeffs.alpha[1].eval(ctx.xi[a]);

  Rng rng(ctx.rng_seed ^ 0x9e3779b97f4a7c15ULL);
  const double span = 1.0 + std::abs(ctx.eta);
  cplx xi_extra = ctx.xi_extra;
  for (int attempt = 0; attempt < 16; ++attempt) {
    std::vector<PhiSolve> solves(dq);
    bool all_ok = true;
    for (int t = 0; t < dq && all_ok; ++t) {
      Vec t1_at(ctx.N);
      for (int a = 0; a < ctx.N; ++a) t1_at[a] = oracle.pairs[t].x[a];
      solves[t] = solve_phi_system(ctx, t1_at, a1_at, xi_extra);
      all_ok = solves[t].ok;
    }
    if (all_ok) {
      Vec nodes = ctx.xi;
      nodes.push_back(xi_extra);
      qb.xi_extra = xi_extra;
      qb.phi_ops.resize(dq);
      qb.det_C.resize(dq);
      for (int t = 0; t < dq; ++t) {
        Vec values = solves[t].values;
        values.push_back(1.0);
        qb.phi_ops[t] = poly_from_samples(nodes, values, ctx.tol.node_gap);
        qb.det_C[t] = solves[t].det_C;
      }
      return qb;
    }
    xi_extra = rng.disk(2.0 * span);
  }
  throw ConstructionError("q_operator: no extra node keeps every eigenvalue system regular");
}

Mat q_operator(const ModelContext& ctx, const TransferFamily& fam, int i_index, cplx u) {
  return q_operator_builder(ctx, fam, i_index).at(u);
}

Mat q_operator_leibniz(const ModelContext& ctx, const TransferFamily& fam, int i_index, cplx u,
                       cplx xi_extra) {
  if (!ctx.twist.diagonalizable)
    throw UnsupportedTwist("q_operator: unsupported twist, needs diagonalizable simple spectrum");
  if (ctx.N > 6) throw ConstructionError("q_operator_leibniz: factorial expansion limited to N <= 6");
  const QscCoefficients coeffs = qsc_coefficients(ctx, i_index);
  const int dq = ctx.state_dim();
  const int N = ctx.N;
  Vec nodes = ctx.xi;
  nodes.push_back(xi_extra);

  const Mat delta = delta_matrix(ctx, u, xi_extra);

  // Operator-valued matrix entries; all are polynomials in the commuting
  // T_1(xi_r), so the determinant may be expanded in any order.
  auto entry = [&](int r, int s, bool with_delta) {
    Mat E(dq, dq);
    cplx scalar = lagrange_at(nodes, s, ctx.xi[r] - ctx.eta);
    if (with_delta) scalar += delta(r, s);
    for (int i = 0; i < dq; ++i) E(i, i) = scalar;
    if (r == s) {
      const cplx c = -1.0 / coeffs.alpha[1].eval(ctx.xi[r]);
      const Mat& t1r = fam.at(1, r, 0);
      for (size_t i = 0; i < E.a.size(); ++i) E.a[i] += c * t1r.a[i];
    }
    return E;
  };

  auto op_det = [&](bool with_delta) {
    Mat acc(dq, dq);
    std::vector<int> perm(N);
    std::iota(perm.begin(), perm.end(), 0);
    do {
      Mat prod = Mat::identity(dq);
      for (int r = 0; r < N; ++r) prod = matmul(prod, entry(r, perm[r], with_delta));
      const double sgn = permutation_sign(perm);
      for (size_t i = 0; i < acc.a.size(); ++i) acc.a[i] += sgn * prod.a[i];
    } while (std::next_permutation(perm.begin(), perm.end()));
    return acc;
  };

  const Mat numer = op_det(true);
  const Mat denom = op_det(false);
  cplx pref = 1.0;
  for (int c = 0; c < N; ++c) pref *= (u - ctx.xi[c]) / (xi_extra - ctx.xi[c]);
  return pref * matmul(numer, inverse(denom));
}

double operator_tq_residual(const ModelContext& ctx, const TransferFamily& fam,
                            const QOperatorBuilder& qb, cplx u) {
  const QscCoefficients coeffs = qsc_coefficients(ctx, qb.i_index);
  const int dq = ctx.state_dim();
  Mat sum(dq, dq);
  double scale = 0.0;
  for (int b = 0; b <= ctx.n; ++b) {
    const cplx ub = u - static_cast<double>(b) * ctx.eta;
    const Mat q = qb.at(ub);
    Mat term;
    if (ctx.n - b == 0) {
      term = q;
    } else {
      term = matmul(q, transfer(ctx, ctx.n - b, ub).mat);
    }
    const cplx alpha = coeffs.alpha[b].eval(u);
    for (size_t i = 0; i < term.a.size(); ++i) term.a[i] *= alpha;
    scale = std::max(scale, frob_norm(term));
    for (size_t i = 0; i < sum.a.size(); ++i) sum.a[i] += term.a[i];
  }
  return frob_norm(sum) / std::max(scale, 1e-300);
}

ReferenceState reference_eigenvector(const ModelContext& ctx) {
  const cplx k1 = ctx.twist.blocks[0].eigenvalue;
  if (std::abs(k1) < 1e-14)
    throw ConstructionError("reference_eigenvector: leading twist eigenvalue is zero");

  Vec w1(ctx.n);
  for (int i = 0; i < ctx.n; ++i) w1[i] = ctx.twist.W(i, 0);
  Vec v{1.0};
  for (int a = 0; a < ctx.N; ++a) {
    Vec next(v.size() * w1.size());
    for (size_t i = 0; i < v.size(); ++i)
      for (size_t j = 0; j < w1.size(); ++j) next[i * w1.size() + j] = v[i] * w1[j];
    v = std::move(next);
  }

  Vec shifted_roots, plain_roots;
  for (cplx x : ctx.xi) {
    shifted_roots.push_back(x - ctx.eta);
    plain_roots.push_back(x);
  }
  const Polynomial t10 = k1 * Polynomial::from_roots(shifted_roots) +
                         (trace(ctx.twist.K) - k1) * Polynomial::from_roots(plain_roots);
  Vec x(ctx.N);
  for (int a = 0; a < ctx.N; ++a) x[a] = t10.eval(ctx.xi[a]);

  ReferenceState ref;
  ref.polys = fused_values(ctx, x);
  ref.polys.t[1] = t10;

  const cplx probes[2] = {ctx.probe_point(), ctx.probe_point() + cplx(0.4, -0.3)};
  double worst = 0.0;
  for (cplx u : probes) {
    const Mat t1u = transfer(ctx, 1, u).mat;
    const Vec tv = matvec(t1u, v);
    const cplx lam = t10.eval(u);
    double diff = 0.0;
    for (size_t i = 0; i < v.size(); ++i) diff += std::norm(tv[i] - lam * v[i]);
    worst = std::max(worst, std::sqrt(diff) / std::max(frob_norm(t1u) * vec_norm(v), 1e-300));
  }
  ref.eigen_residual = worst;
  ref.vector = std::move(v);
  return ref;
}

Vec aba_vector(const ModelContext& ctx, const SovBasis& basis, const Vec& phi_roots,
               const Vec& reference) {
  Vec v = reference;
  for (cplx root : phi_roots) v = matvec(b_operator(ctx, basis, root).mat, v);
  const double nrm = vec_norm(v);
  if (nrm == 0.0) throw NumericalFailure("aba_vector: separating product annihilated the state");
  for (cplx& z : v) z /= nrm;
  return v;
}

}  // namespace sovlat
