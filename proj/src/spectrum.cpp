#include "sovlat/spectrum.hpp"

#include <algorithm>

#include "sovlat/linalg.hpp"

namespace sovlat {

namespace {

Polynomial nodal_poly(const Vec& xi) { return Polynomial::from_roots(xi); }

Polynomial lagrange_numerator(const Vec& xi, int a) {
  Vec others;
  for (size_t b = 0; b < xi.size(); ++b)
    if (static_cast<int>(b) != a) others.push_back(xi[b]);
  return Polynomial::from_roots(others);
}

}  // namespace

Polynomial t1_from_x(const ModelContext& ctx, const Vec& x) {
  if (static_cast<int>(x.size()) != ctx.N) throw ConstructionError("t1_from_x: wrong tuple size");
  Polynomial p = trace(ctx.twist.K) * nodal_poly(ctx.xi);
  for (int a = 0; a < ctx.N; ++a) {
    cplx denom = 1.0;
    for (int b = 0; b < ctx.N; ++b)
      if (b != a) denom *= (ctx.xi[a] - ctx.xi[b]);
    p = p + (x[a] / denom) * lagrange_numerator(ctx.xi, a);
  }
  return p;
}

EigenPolys fused_values(const ModelContext& ctx, const Vec& x) {
  EigenPolys out;
  out.t.resize(ctx.n + 1);
  out.t[0] = Polynomial::constant(1.0);
  out.t[1] = t1_from_x(ctx, x);

  for (int m = 1; m <= ctx.n - 2; ++m) {
    // t_{m+1} = prefactor * [asymptotic term + sum_a g_a^{(m+1)} x_a t_m(xi_a - eta)]
    Vec pref_roots;
    for (int b = 0; b < ctx.N; ++b)
      for (int r = 1; r <= m; ++r)
        pref_roots.push_back(ctx.xi[b] + static_cast<double>(r) * ctx.eta);
    const Polynomial pref = Polynomial::from_roots(pref_roots);

    Polynomial bracket = asymptotic(ctx, m + 1) * nodal_poly(ctx.xi);
    for (int a = 0; a < ctx.N; ++a) {
      cplx denom = 1.0;
      for (int b = 0; b < ctx.N; ++b) {
        if (b != a) denom *= (ctx.xi[a] - ctx.xi[b]);
        for (int r = 1; r <= m; ++r)
          denom *= (ctx.xi[a] - ctx.xi[b] - static_cast<double>(r) * ctx.eta);
      }
      const cplx weight = x[a] * out.t[m].eval(ctx.xi[a] - ctx.eta) / denom;
      bracket = bracket + weight * lagrange_numerator(ctx.xi, a);
    }
    out.t[m + 1] = pref * bracket;
  }
  out.t[ctx.n] = q_det_polynomial(ctx);
  return out;
}

Vec system_residual(const ModelContext& ctx, const Vec& x) {
  return SystemEvaluator(ctx).residual(x);
}

double system_residual_norm(const ModelContext& ctx, const Vec& x) {
  return SystemEvaluator(ctx).residual_norm(x);
}

SystemEvaluator::SystemEvaluator(const ModelContext& ctx) : n_(ctx.n), N_(ctx.N) {
  trK_ = trace(ctx.twist.K);
  qdet_.resize(N_);
  scale_.resize(N_);
  t1_const_.resize(N_);
  t1_weights_.assign(N_, Vec(N_));
  const Polynomial nodal = nodal_poly(ctx.xi);
  for (int a = 0; a < N_; ++a) {
    const cplx p = ctx.xi[a] - ctx.eta;
    qdet_[a] = q_det_closed_form(ctx, ctx.xi[a]);
    scale_[a] = std::max(std::abs(qdet_[a]), 1e-300);
    t1_const_[a] = trK_ * nodal.eval(p);
    for (int b = 0; b < N_; ++b) t1_weights_[a][b] = g_function(ctx, b, 1, p);
  }
  pref_.assign(std::max(n_ - 2, 0), Vec(N_));
  asym_term_.assign(std::max(n_ - 2, 0), Vec(N_));
  g_.assign(std::max(n_ - 2, 0), std::vector<Vec>(N_, Vec(N_)));
  for (int m = 1; m <= n_ - 2; ++m) {
    const cplx asym = asymptotic(ctx, m + 1);
    for (int a = 0; a < N_; ++a) {
      const cplx p = ctx.xi[a] - ctx.eta;
      cplx pref = 1.0;
      for (int b = 0; b < N_; ++b)
        for (int r = 1; r <= m; ++r) pref *= (p - ctx.xi[b] - static_cast<double>(r) * ctx.eta);
      pref_[m - 1][a] = pref;
      asym_term_[m - 1][a] = asym * nodal.eval(p);
      for (int b = 0; b < N_; ++b) g_[m - 1][a][b] = g_function(ctx, b, m + 1, p);
    }
  }
}

Vec SystemEvaluator::raw(const Vec& x) const {
  Vec v(N_);
  for (int a = 0; a < N_; ++a) {
    cplx s = t1_const_[a];
    for (int b = 0; b < N_; ++b) s += t1_weights_[a][b] * x[b];
    v[a] = s;
  }
  for (int m = 1; m <= n_ - 2; ++m) {
    Vec next(N_);
    for (int a = 0; a < N_; ++a) {
      cplx s = asym_term_[m - 1][a];
      for (int b = 0; b < N_; ++b) s += g_[m - 1][a][b] * x[b] * v[b];
      next[a] = pref_[m - 1][a] * s;
    }
    v = std::move(next);
  }
  Vec f(N_);
  for (int a = 0; a < N_; ++a) f[a] = x[a] * v[a] - qdet_[a];
  return f;
}

Vec SystemEvaluator::residual(const Vec& x) const {
  Vec f = raw(x);
  for (int a = 0; a < N_; ++a) f[a] /= scale_[a];
  return f;
}

double SystemEvaluator::residual_norm(const Vec& x) const {
  double worst = 0.0;
  for (const cplx& z : residual(x)) worst = std::max(worst, std::abs(z));
  return worst;
}

Mat SystemEvaluator::jacobian(const Vec& x) const {
  Mat J(N_, N_);
  for (int b = 0; b < N_; ++b) {
    const double delta = 1e-6 * (1.0 + std::abs(x[b]));
    Vec xp = x, xm = x;
    xp[b] += delta;
    xm[b] -= delta;
    const Vec fp = raw(xp), fm = raw(xm);
    for (int a = 0; a < N_; ++a) J(a, b) = (fp[a] - fm[a]) / (2.0 * delta);
  }
  return J;
}

namespace {

struct NewtonOutcome {
  Vec x;
  double residual = 1e308;
  bool converged = false;
  bool singular = false;
  double last_drop = 0.0;
};

NewtonOutcome newton_polish(const SystemEvaluator& eval, const Vec& x0, double target,
                            int max_iter = 80) {
  NewtonOutcome out;
  out.x = x0;
  out.residual = eval.residual_norm(out.x);
  int stalls = 0;
  for (int iter = 0; iter < max_iter; ++iter) {
    if (out.residual <= target) break;
    Mat J = eval.jacobian(out.x);
    Vec step;
    try {
      LuFactor lu(J);
      Vec f = eval.raw(out.x);
      for (cplx& z : f) z = -z;
      step = lu.solve(f);
    } catch (const NumericalFailure&) {
      out.singular = true;
      break;
    }

    // Damped update; the factor-2 candidate is the right full step for a
    // double root and is only kept when it actually wins.
    const double candidates[] = {1.0,    2.0,    0.5,     0.25,    0.125,  0.0625,
                                 0.03125, 0.015625, 0.0078125, 0.00390625, 0.001953125};
    double best_res = out.residual;
    Vec best_x;
    double used_t = 0.0;
    for (double t : candidates) {
      Vec cand = out.x;
      for (int a = 0; a < eval.size(); ++a) cand[a] += t * step[a];
      const double r = eval.residual_norm(cand);
      if (r < best_res) {
        best_res = r;
        best_x = cand;
        used_t = t;
        if (t == 1.0) break;  // prefer the plain Newton step when it improves
      }
    }
    if (best_x.empty()) {
      if (++stalls >= 2) break;
      continue;
    }
    stalls = 0;
    if (used_t >= 1.0) out.last_drop = out.residual / std::max(best_res, 1e-300);
    out.x = std::move(best_x);
    out.residual = best_res;
  }
  out.converged = out.residual <= std::max(target, 1e-10);
  // Flag multiple roots: the Jacobian at the solution collapses relative to
  // its size a fixed displacement away.
  if (!out.singular) {
    const auto sv_here = singular_values(eval.jacobian(out.x));
    Vec displaced = out.x;
    for (cplx& z : displaced) z += 0.1 * (1.0 + std::abs(z));
    const auto sv_there = singular_values(eval.jacobian(displaced));
    const double ref = std::max(sv_there.back(), 1e-300);
    out.singular = sv_here.back() < 1e-4 * ref;
  }
  // A root of multiplicity m is determined only to residual^(1/m); push
  // multiple roots down to the evaluation floor with multiplicity-sized
  // steps to tighten the location.
  if (out.converged && out.singular) {
    for (int iter = 0; iter < 25; ++iter) {
      Vec step;
      try {
        LuFactor lu(eval.jacobian(out.x));
        Vec f = eval.raw(out.x);
        for (cplx& z : f) z = -z;
        step = lu.solve(f);
      } catch (const NumericalFailure&) {
        break;
      }
      double best_res = out.residual;
      Vec best_x;
      for (double t : {4.0, 3.0, 2.0, 1.0, 0.5}) {
        Vec cand = out.x;
        for (int a = 0; a < eval.size(); ++a) cand[a] += t * step[a];
        const double r = eval.residual_norm(cand);
        if (r < best_res) {
          best_res = r;
          best_x = cand;
        }
      }
      if (best_x.empty()) break;
      out.x = std::move(best_x);
      out.residual = best_res;
    }
  }
  return out;
}

double tuple_distance(const Vec& a, const Vec& b) {
  double d = 0.0;
  for (size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
  return d;
}

double tuple_scale(const Vec& a) {
  double s = 1.0;
  for (const cplx& z : a) s = std::max(s, std::abs(z));
  return s;
}

bool tuple_less(const Vec& a, const Vec& b) {
  for (size_t i = 0; i < a.size(); ++i) {
    if (a[i].real() != b[i].real()) return a[i].real() < b[i].real();
    if (a[i].imag() != b[i].imag()) return a[i].imag() < b[i].imag();
  }
  return false;
}

}  // namespace

Oracle brute_force_spectrum(const ModelContext& ctx, const TransferFamily& fam) {
  const int dq = ctx.state_dim();
  Oracle oracle;
  EigenDecomposition ed;
  cplx probe = ctx.probe_point();
  Mat t1p;
  for (int attempt = 0;; ++attempt) {
    t1p = transfer(ctx, 1, probe).mat;
    ed = eigen_decompose(t1p);
    const int rank = numerical_rank(ed.right_vectors, 1e-10);
    if (rank == dq || !ctx.twist.diagonalizable) {
      oracle.defective = rank < dq;
      break;
    }
    // Defective probe for a diagonalizable twist: move the probe and retry.
    if (attempt >= 8)
      throw NumericalFailure("brute_force_spectrum: probe stays defective for diagonalizable twist");
    probe += cplx(0.17, 0.11) * (1.0 + static_cast<double>(attempt));
  }
  oracle.probe = probe;
  oracle.t1_probe = t1p;

  const double scale = std::max(frob_norm(t1p) / std::sqrt(static_cast<double>(dq)), 1e-300);
  // Cluster probe eigenvalues to detect degeneracy.
  std::vector<int> assigned(dq, -1);
  std::vector<std::vector<int>> clusters;
  for (int i = 0; i < dq; ++i) {
    if (assigned[i] >= 0) continue;
    std::vector<int> group{i};
    assigned[i] = static_cast<int>(clusters.size());
    for (int j = i + 1; j < dq; ++j) {
      if (assigned[j] >= 0) continue;
      for (int g : group)
        if (std::abs(ed.eigenvalues[j] - ed.eigenvalues[g]) <= ctx.tol.cluster * scale) {
          group.push_back(j);
          assigned[j] = assigned[i];
          break;
        }
    }
    clusters.push_back(std::move(group));
  }

  for (const auto& group : clusters) {
    OracleEigenpair pair;
    pair.multiplicity = static_cast<int>(group.size());
    cplx mu = 0.0;
    for (int g : group) mu += ed.eigenvalues[g];
    mu /= static_cast<double>(group.size());
    pair.probe_value = mu;

    // Representative eigenvector: best residual within the cluster, then one
    // inverse-iteration refinement against a slightly shifted probe matrix.
    Vec best;
    double best_res = 1e308;
    for (int g : group) {
      Vec v(dq);
      for (int i = 0; i < dq; ++i) v[i] = ed.right_vectors(i, g);
      Vec tv = matvec(t1p, v);
      double r = 0.0;
      for (int i = 0; i < dq; ++i) r += std::norm(tv[i] - mu * v[i]);
      r = std::sqrt(r);
      if (r < best_res) {
        best_res = r;
        best = v;
      }
    }
    try {
      Mat shifted = t1p;
      const cplx mu_shift = mu + cplx(1e-11, 1e-11) * scale;
      for (int i = 0; i < dq; ++i) shifted(i, i) -= mu_shift;
      Vec w = solve(shifted, best);
      const double nw = vec_norm(w);
      if (nw > 0.0)
        for (cplx& z : w) z /= nw;
      Vec tw = matvec(t1p, w);
      double r = 0.0;
      for (int i = 0; i < dq; ++i) r += std::norm(tw[i] - mu * w[i]);
      if (std::sqrt(r) < best_res) best = w;
    } catch (const NumericalFailure&) {
    }
    const double nb = vec_norm(best);
    for (cplx& z : best) z /= nb;

    pair.x.resize(ctx.N);
    const cplx denom = dot_conj(best, best);
    for (int a = 0; a < ctx.N; ++a)
      pair.x[a] = dot_conj(best, matvec(fam.at(1, a, 0), best)) / denom;
    pair.eigenvector = std::move(best);
    oracle.pairs.push_back(std::move(pair));
  }
  std::sort(oracle.pairs.begin(), oracle.pairs.end(),
            [](const OracleEigenpair& a, const OracleEigenpair& b) { return tuple_less(a.x, b.x); });
  return oracle;
}

std::vector<SystemSolution> solve_system(const ModelContext& ctx, const TransferFamily& fam,
                                         SolveMode mode, const Oracle* oracle,
                                         int starts_per_state, int max_rounds) {
  const SystemEvaluator eval(ctx);
  const double target = std::min(ctx.tol.newton, 1e-12);
  std::vector<SystemSolution> sols;

  // Simple roots separate at tol.dedupe; a multiple root is only localized
  // to about floor^(1/multiplicity), so singular-flagged tuples merge within
  // that wider radius (multiplicity is at most the system order n).
  const double singular_window =
      std::max(ctx.tol.dedupe, 50.0 * std::pow(1e-15, 1.0 / ctx.n));
  auto push_unique = [&](const NewtonOutcome& nw) {
    if (!nw.converged) return;
    for (const auto& s : sols) {
      const double window =
          (s.jacobian_singular || nw.singular) ? singular_window : ctx.tol.dedupe;
      if (tuple_distance(s.x, nw.x) <= window * std::max(tuple_scale(s.x), tuple_scale(nw.x)))
        return;
    }
    sols.push_back({nw.x, nw.residual, nw.singular, nw.last_drop});
  };

  if (mode == SolveMode::kOracleSeeded) {
    if (oracle == nullptr)
      throw ConstructionError("solve_system: oracle-seeded mode needs the oracle");
    for (const auto& pair : oracle->pairs) {
      NewtonOutcome nw = newton_polish(eval, pair.x, target);
      if (!nw.converged)
        throw NumericalFailure("solve_system: oracle tuple failed to polish to tolerance");
      push_unique(nw);
    }
  } else {
    (void)fam;
    const int dq = ctx.state_dim();
    std::vector<double> radius(ctx.N);
    for (int a = 0; a < ctx.N; ++a)
      radius[a] =
          3.0 * (1.0 + std::pow(std::abs(q_det_closed_form(ctx, ctx.xi[a])), 1.0 / ctx.n));
    Rng rng(ctx.rng_seed ^ 0x6d756c7469ULL);
    for (int round = 0; round < max_rounds; ++round) {
      const int nstarts = starts_per_state * dq;
      std::vector<Vec> starts(nstarts, Vec(ctx.N));
      for (auto& s : starts)
        for (int a = 0; a < ctx.N; ++a) s[a] = rng.disk(radius[a] * (1.0 + 0.5 * round));
      std::vector<NewtonOutcome> outcomes(nstarts);
#pragma omp parallel for schedule(dynamic)
      for (int i = 0; i < nstarts; ++i) outcomes[i] = newton_polish(eval, starts[i], target);
      for (const auto& nw : outcomes) push_unique(nw);
      if (static_cast<int>(sols.size()) >= dq) break;
    }
  }
  std::sort(sols.begin(), sols.end(),
            [](const SystemSolution& a, const SystemSolution& b) { return tuple_less(a.x, b.x); });
  return sols;
}

SpectrumSolution sov_eigenvector(const ModelContext& ctx, const TransferFamily& fam,
                                 const SovBasis& basis, const Vec& x, const Oracle* oracle) {
  SpectrumSolution sol;
  sol.x = x;
  sol.residual_system = system_residual_norm(ctx, x);
  if (sol.residual_system > 1e-6)
    throw RejectSolution("sov_eigenvector: tuple does not solve the discrete system");
  sol.polys = fused_values(ctx, x);

  const int dq = ctx.state_dim();
  Vec w(dq, 1.0);
  for (int idx = 0; idx < dq; ++idx) {
    const auto h = h_from_index(idx, ctx.n, ctx.N);
    cplx v = 1.0;
    for (int a = 0; a < ctx.N; ++a)
      for (int p = 0; p < h[a]; ++p) v *= x[a];
    w[idx] = v;
  }
  sol.wavefunction = w;

  Vec v = matvec(basis.U_inv, w);
  int arg = 0;
  double best = 0.0;
  for (int i = 0; i < dq; ++i)
    if (std::abs(v[i]) > best) {
      best = std::abs(v[i]);
      arg = i;
    }
  if (best == 0.0) throw RejectSolution("sov_eigenvector: zero eigenvector from basis solve");
  const cplx pivot = v[arg];
  for (cplx& z : v) z /= pivot;
  sol.eigenvector = v;

  const Polynomial& t1 = sol.polys.t[1];
  const cplx probe0 = ctx.probe_point();
  const cplx offsets[3] = {cplx(0.0, 0.0), cplx(0.4, -0.3), cplx(-0.25, 0.55)};
  double worst = 0.0;
  for (const cplx& off : offsets) {
    const cplx u = probe0 + off;
    const Mat t1u = transfer(ctx, 1, u).mat;
    const Vec tv = matvec(t1u, v);
    const cplx lam = t1.eval(u);
    double diff = 0.0;
    for (int i = 0; i < dq; ++i) diff += std::norm(tv[i] - lam * v[i]);
    const double denom = frob_norm(t1u) * vec_norm(v);
    worst = std::max(worst, std::sqrt(diff) / std::max(denom, 1e-300));
  }
  sol.residual_eigen = worst;
  if (sol.residual_eigen > ctx.tol.eigen_residual)
    throw RejectSolution("sov_eigenvector: reconstructed vector fails the eigen residual test");

  if (oracle != nullptr && !oracle->pairs.empty()) {
    double bd = 1e308;
    const OracleEigenpair* nearest = nullptr;
    for (const auto& pair : oracle->pairs) {
      const double d = tuple_distance(pair.x, x);
      if (d < bd) {
        bd = d;
        nearest = &pair;
      }
    }
    sol.oracle_overlap = overlap(nearest->eigenvector, v);
  }
  return sol;
}

SimplicityReport simplicity_report(const ModelContext& ctx, const TransferFamily& fam,
                                   const std::vector<SystemSolution>& sols, const Oracle& oracle) {
  SimplicityReport rep;
  rep.solution_count = static_cast<int>(sols.size());
  rep.min_pair_distance = 1e308;
  for (size_t i = 0; i < sols.size(); ++i)
    for (size_t j = i + 1; j < sols.size(); ++j)
      rep.min_pair_distance = std::min(rep.min_pair_distance, tuple_distance(sols[i].x, sols[j].x));
  if (sols.size() < 2) rep.min_pair_distance = 0.0;
  rep.expected_count = !ctx.twist.diagonalizable || rep.solution_count == ctx.state_dim();

  const int dq = ctx.state_dim();
  const double scale =
      std::max(frob_norm(oracle.t1_probe) / std::sqrt(static_cast<double>(dq)), 1e-300);
  for (const auto& pair : oracle.pairs) {
    Mat shifted = oracle.t1_probe;
    for (int i = 0; i < dq; ++i) shifted(i, i) -= pair.probe_value;
    const auto sv = singular_values(shifted);
    int nullity = 0;
    for (double s : sv)
      if (s <= 1e-8 * std::max(sv.front(), scale)) ++nullity;
    rep.geometric_multiplicities.push_back(nullity);
  }

  rep.oracle_tuples_covered = true;
  for (const auto& pair : oracle.pairs) {
    // A tuple of multiplicity m is only localized to about eps^(1/m).
    const double window =
        std::max(ctx.tol.match, 100.0 * std::pow(2.2e-16, 1.0 / pair.multiplicity));
    bool found = false;
    for (const auto& s : sols)
      if (tuple_distance(pair.x, s.x) <= window * tuple_scale(pair.x)) {
        found = true;
        break;
      }
    rep.oracle_tuples_covered = rep.oracle_tuples_covered && found;
  }

  // Rank of the stacked eigenvectors; defective tuples that fail the eigen
  // residual test are skipped rather than fatal.
  std::vector<Vec> vectors;
  SovBasis basis;
  try {
    basis = build_basis(ctx, fam, build_seed(ctx));
    for (const auto& s : sols) {
      try {
        vectors.push_back(sov_eigenvector(ctx, fam, basis, s.x).eigenvector);
      } catch (const RejectSolution&) {
      }
    }
  } catch (const DegenerateBasis&) {
  }
  if (!vectors.empty()) {
    Mat stack(dq, static_cast<int>(vectors.size()));
    for (size_t j = 0; j < vectors.size(); ++j)
      for (int i = 0; i < dq; ++i) stack(i, static_cast<int>(j)) = vectors[j][i];
    rep.eigenvector_rank = numerical_rank(stack, 1e-8);
  }
  return rep;
}

}  // namespace sovlat
