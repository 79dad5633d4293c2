// Acceptance suite: every criterion prints one PASS/FAIL line; the exit
// code is the number of failed criteria.
#include <chrono>
#include <cstdio>
#include <vector>

#include "sovlat/linalg.hpp"
#include "sovlat/qsc.hpp"
#include "sovlat/report.hpp"

using namespace sovlat;

namespace {

int failures = 0;

void verdict(int index, bool pass, const char* title, const std::string& detail) {
  std::printf("[%s] criterion %02d: %s (%s)\n", pass ? "PASS" : "FAIL", index, title,
              detail.c_str());
  std::fflush(stdout);
  if (!pass) ++failures;
}

struct Stopwatch {
  std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
  double s() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  }
};

ModelContext random_instance(int n, int N, std::uint64_t seed, double window = 0.05) {
  Rng rng(seed);
  const cplx eta = cplx(1.2, 0.0) + 0.4 * rng.disk(1.0);
  const Mat K = random_simple_twist(n, rng, {});
  const Vec xi = random_xi(n, N, eta, rng, window);
  return make_context(n, N, eta, xi, K, {}, seed);
}

ModelContext golden() {
  Mat K(2, 2);
  K(0, 0) = 1.0;
  K(1, 1) = 2.0;
  return make_context(2, 1, 1.0, {0.0}, K);
}

double tuple_dist(const Vec& a, const Vec& b) {
  double d = 0.0;
  for (size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
  return d;
}

double tuple_scale(const Vec& a) {
  double s = 1.0;
  for (const cplx& z : a) s = std::max(s, std::abs(z));
  return s;
}

char buffer[512];

// ---- criteria ------------------------------------------------------------

void criterion_1() {
  Stopwatch sw;
  double worst = 0.0;
  for (int n : {2, 3, 4}) {
    const ModelContext ctx = random_instance(n, 1, 1000 + n);
    Rng rng(2000 + n);
    for (int t = 0; t < 10; ++t) {
      worst = std::max(worst,
                       yang_baxter_residual(ctx, rng.box(2.0), rng.box(2.0), rng.box(2.0)));
      worst = std::max(worst, twist_invariance_residual(ctx, rng.box(2.0)));
    }
  }
  const double el = sw.s();
  std::snprintf(buffer, sizeof(buffer), "max residual %.2e <= 1e-11, %.2fs < 1s", worst, el);
  verdict(1, worst <= 1e-11 && el < 1.0, "Yang-Baxter and twist invariance, n = 2, 3, 4", buffer);
}

void criterion_2() {
  Stopwatch sw;
  double worst = 0.0;
  const std::vector<std::pair<int, int>> shapes = {{2, 1}, {2, 2}, {2, 3}, {2, 4}, {3, 1},
                                                   {3, 2}, {3, 3}, {4, 1}, {4, 2}};
  for (auto [n, N] : shapes) {
    const ModelContext ctx = random_instance(n, N, 3000 + 10 * n + N);
    Rng rng(4000 + 10 * n + N);
    for (int t = 0; t < 3; ++t) {
      const cplx u = rng.box(2.0), v = rng.box(2.0);
      std::vector<Mat> tu(n + 1), tv(n + 1);
      for (int m = 1; m <= n; ++m) {
        tu[m] = transfer(ctx, m, u).mat;
        tv[m] = transfer(ctx, m, v).mat;
      }
      for (int l = 1; l <= n; ++l)
        for (int m = 1; m <= n; ++m)
          worst = std::max(worst, commutator_rel_norm(tu[l], tv[m]));
    }
  }
  const double el = sw.s();
  std::snprintf(buffer, sizeof(buffer), "max residual %.2e <= 1e-9, %.1fs < 30s", worst, el);
  verdict(2, worst <= 1e-9 && el < 30.0,
          "transfer commutativity up to n = 4 (N = 2), n = 3 (N = 3), n = 2 (N = 4)", buffer);
}

void criterion_3() {
  double worst_central = 0.0, worst_fusion = 0.0, worst_zero = 0.0;
  for (auto [n, N] : std::vector<std::pair<int, int>>{{2, 2}, {3, 2}, {4, 1}}) {
    const ModelContext ctx = random_instance(n, N, 5000 + 10 * n + N);
    const TransferFamily fam = build_family(ctx);
    Rng rng(6000 + n);
    for (int t = 0; t < 5; ++t) {
      const cplx u = rng.box(2.0);
      const Mat tn = transfer(ctx, n, u).mat;
      Mat qd = Mat::identity(ctx.state_dim());
      const cplx q = q_det_closed_form(ctx, u);
      for (cplx& z : qd.a) z *= q;
      worst_central = std::max(worst_central, rel_diff(tn, qd));
    }
    for (int a = 0; a < N; ++a)
      for (int m = 1; m <= n - 1; ++m)
        worst_fusion = std::max(worst_fusion, fusion_residual(ctx, fam, a, m));
    for (int m = 2; m <= n; ++m) {
      const double scale = frob_norm(transfer(ctx, m, ctx.probe_point()).mat);
      for (int a = 0; a < N; ++a)
        for (int r = 1; r <= m - 1; ++r)
          worst_zero = std::max(worst_zero, frob_norm(fam.at(m, a, r)) / scale);
    }
  }
  std::snprintf(buffer, sizeof(buffer),
                "centrality %.2e <= 1e-10, fusion %.2e / zeroes %.2e <= 1e-9", worst_central,
                worst_fusion, worst_zero);
  verdict(3, worst_central <= 1e-10 && worst_fusion <= 1e-9 && worst_zero <= 1e-9,
          "quantum determinant closed form, fusion identities, central zeroes", buffer);
}

void criterion_4() {
  int attempts = 0, hits = 0;
  bool shift_ok = true;
  for (auto [n, N] : std::vector<std::pair<int, int>>{{2, 2}, {2, 3}, {3, 2}}) {
    for (int t = 0; t < 20; ++t) {
      ++attempts;
      const ModelContext ctx = random_instance(n, N, 7000 + 100 * n + 10 * N + t);
      const TransferFamily fam = build_family(ctx);
      try {
        const SovBasis basis = build_basis(ctx, fam, build_seed(ctx));
        ++hits;
        if (t == 0) {
          // Shift rows must be bit-identical to the direct ordered products.
          const int dq = ctx.state_dim();
          for (int idx = 0; idx < dq && shift_ok; ++idx) {
            const auto h = h_from_index(idx, n, N);
            Vec row = basis.seed.row;
            for (int a = 0; a < N; ++a)
              for (int p = 0; p < h[a]; ++p) row = vecmat(row, fam.at(1, a, 0));
            for (int j = 0; j < dq; ++j) shift_ok = shift_ok && basis.U(idx, j) == row[j];
          }
        }
      } catch (const DegenerateBasis&) {
      }
    }
  }
  const double rate = 100.0 * hits / attempts;
  std::snprintf(buffer, sizeof(buffer), "first-draw success %d/%d (%.0f%% >= 95%%), rows %s",
                hits, attempts, rate, shift_ok ? "bit-identical" : "DIFFER");
  verdict(4, rate >= 95.0 && shift_ok, "SoV basis determinant floor and shift structure", buffer);
}

struct SolvedInstance {
  ModelContext ctx;
  TransferFamily fam;
  SovBasis basis;
  Oracle oracle;
  std::vector<SystemSolution> seeded, multistart;
};

// A degenerate random draw gets replaced by the next seed, mirroring the
// documented resample policy.
SolvedInstance solve_instance(int n, int N, std::uint64_t seed) {
  for (int attempt = 0;; ++attempt) {
    try {
      SolvedInstance si;
      si.ctx = random_instance(n, N, seed + 131 * attempt);
      si.fam = build_family(si.ctx);
      si.basis = build_basis(si.ctx, si.fam, build_seed(si.ctx));
      si.oracle = brute_force_spectrum(si.ctx, si.fam);
      si.seeded = solve_system(si.ctx, si.fam, SolveMode::kOracleSeeded, &si.oracle);
      si.multistart = solve_system(si.ctx, si.fam, SolveMode::kMultistartNewton);
      return si;
    } catch (const DegenerateBasis&) {
      if (attempt >= 8) throw;
    }
  }
}

std::vector<SolvedInstance> completeness_instances;

void criterion_5() {
  bool ok = true;
  double slowest = 0.0;
  std::string detail;
  for (auto [n, N] : std::vector<std::pair<int, int>>{{2, 2}, {2, 3}, {3, 2}}) {
    Stopwatch sw;
    completeness_instances.push_back(solve_instance(n, N, 8000 + 10 * n + N));
    const SolvedInstance& si = completeness_instances.back();
    const int dq = si.ctx.state_dim();
    bool count_ok = static_cast<int>(si.multistart.size()) == dq &&
                    static_cast<int>(si.oracle.pairs.size()) == dq;
    bool match_ok = true;
    for (const auto& p : si.oracle.pairs) {
      double best = 1e300;
      for (const auto& m : si.multistart) best = std::min(best, tuple_dist(p.x, m.x));
      match_ok = match_ok && best <= 1e-8 * tuple_scale(p.x);
    }
    bool modes_ok = si.seeded.size() == si.multistart.size();
    for (size_t i = 0; i < si.seeded.size() && modes_ok; ++i) {
      double best = 1e300;
      for (const auto& m : si.multistart) best = std::min(best, tuple_dist(si.seeded[i].x, m.x));
      modes_ok = best <= 1e-8 * tuple_scale(si.seeded[i].x);
    }
    slowest = std::max(slowest, sw.s());
    ok = ok && count_ok && match_ok && modes_ok;
    detail += std::string(detail.empty() ? "" : ", ") + "(" + std::to_string(n) + "," +
              std::to_string(N) + "): " + std::to_string(si.multistart.size()) + "/" +
              std::to_string(dq);
  }
  std::snprintf(buffer, sizeof(buffer), "%s, slowest %.1fs < 60s", detail.c_str(), slowest);
  verdict(5, ok && slowest < 60.0,
          "completeness: oracle-free multistart finds all n^N tuples matching the oracle", buffer);
}

void criterion_6() {
  double worst_res = 0.0, worst_overlap = 1.0;
  bool ok = true;
  for (const auto& si : completeness_instances) {
    for (const auto& s : si.seeded) {
      try {
        const SpectrumSolution sol =
            sov_eigenvector(si.ctx, si.fam, si.basis, s.x, &si.oracle);
        worst_res = std::max(worst_res, sol.residual_eigen);
        worst_overlap = std::min(worst_overlap, sol.oracle_overlap);
      } catch (const RejectSolution&) {
        ok = false;
      }
    }
  }
  std::snprintf(buffer, sizeof(buffer), "eigen residual %.2e <= 1e-8, overlap 1 - %.2e >= 1 - 1e-8",
                worst_res, 1.0 - worst_overlap);
  verdict(6, ok && worst_res <= 1e-8 && 1.0 - worst_overlap <= 1e-8,
          "SoV eigenvector reconstruction against the brute-force oracle", buffer);
}

void criterion_7() {
  const ModelContext ctx = golden();
  const TransferFamily fam = build_family(ctx);
  const Oracle oracle = brute_force_spectrum(ctx, fam);
  bool ok = true;
  double worst_root = 0.0;
  for (SolveMode mode : {SolveMode::kOracleSeeded, SolveMode::kMultistartNewton}) {
    const auto sols = solve_system(ctx, fam, mode, &oracle);
    ok = ok && sols.size() == 2;
    if (sols.size() == 2) {
      worst_root = std::max(worst_root, std::abs(sols[0].x[0] - 1.0));
      worst_root = std::max(worst_root, std::abs(sols[1].x[0] - 2.0));
    }
  }

  const QscCoefficients coeffs = qsc_coefficients(ctx, 1);  // alpha_bar = 2
  const Polynomial t1{Vec{1.0, 3.0}};
  const auto [phi, cs] = build_phi(ctx, t1, coeffs);
  const double phi_err =
      phi.degree == 1 ? std::max(std::abs(phi.phi.c[0] - 2.0), std::abs(phi.phi.c[1] - 1.0)) : 1.0;

  // Full polynomial expansion of the functional equation must cancel.
  Polynomial total;
  const Polynomial tower[3] = {Polynomial::constant(1.0), t1, q_det_polynomial(ctx)};
  for (int b = 0; b <= 2; ++b) {
    const cplx shift = -static_cast<double>(b) * ctx.eta;
    total = total +
            coeffs.alpha[b] * phi.phi.shifted_argument(shift) * tower[2 - b].shifted_argument(shift);
  }
  double coeff_max = 0.0;
  for (const cplx& c : total.c) coeff_max = std::max(coeff_max, std::abs(c));

  std::snprintf(buffer, sizeof(buffer),
                "roots off by %.1e <= 1e-12, phi off by %.1e <= 1e-10, cancellation %.1e",
                worst_root, phi_err, coeff_max);
  verdict(7, ok && worst_root <= 1e-12 && phi_err <= 1e-10 && coeff_max <= 1e-12,
          "golden analytic instance n=2 N=1 K=diag(1,2)", buffer);
}

void criterion_8() {
  double worst = 0.0;
  bool ok = true;
  for (auto [n, N] : std::vector<std::pair<int, int>>{{2, 3}, {3, 2}}) {
    const SolvedInstance si = solve_instance(n, N, 9000 + 10 * n + N);
    for (const auto& s : si.seeded) {
      const EigenPolys polys = fused_values(si.ctx, s.x);
      for (int i = 0; i < si.ctx.twist.block_count(); ++i) {
        const QscCoefficients coeffs = qsc_coefficients(si.ctx, i);
        try {
          const auto [phi, cs] = build_phi(si.ctx, polys.t[1], coeffs);
          ok = ok && phi.degree <= N;
          worst = std::max(worst, qsc_residual(si.ctx, polys, phi, coeffs));
        } catch (const ConstructionError&) {
          ok = false;  // existence is part of the criterion on generic instances
        }
      }
    }
  }
  std::snprintf(buffer, sizeof(buffer), "max residual %.2e <= 1e-8 over all eigenvalue-branch pairs",
                worst);
  verdict(8, ok && worst <= 1e-8,
          "quantum spectral curve for every eigenvalue and every twist eigenvalue", buffer);
}

void criterion_9() {
  double worst_tq = 0.0, worst_comm = 0.0, worst_norm = 0.0, worst_leib = 0.0;
  bool invertible = true;
  for (auto [n, N] : std::vector<std::pair<int, int>>{{2, 2}, {3, 2}}) {
    const ModelContext ctx = random_instance(n, N, 9100 + 10 * n + N);
    const TransferFamily fam = build_family(ctx);
    const QOperatorBuilder qb = q_operator_builder(ctx, fam, ctx.twist.largest_eigenvalue_index());
    Rng rng(9200 + n);
    for (int t = 0; t < 5; ++t)
      worst_tq = std::max(worst_tq, operator_tq_residual(ctx, fam, qb, rng.box(2.0)));
    for (int t = 0; t < 2; ++t)
      worst_comm = std::max(
          worst_comm, commutator_rel_norm(qb.at(rng.box(2.0)), transfer(ctx, 1, rng.box(2.0)).mat));
    worst_norm =
        std::max(worst_norm, rel_diff(qb.at(qb.xi_extra), Mat::identity(ctx.state_dim())));
    for (int a = 0; a < N; ++a) {
      const auto sv = singular_values(qb.at(ctx.xi[a]));
      invertible = invertible && sv.back() > 1e-8 * sv.front();
    }
    for (int t = 0; t < 2; ++t) {
      const cplx u = rng.box(2.0);
      worst_leib =
          std::max(worst_leib, rel_diff(qb.at(u), q_operator_leibniz(ctx, fam, qb.i_index, u,
                                                                     qb.xi_extra)));
    }
  }
  std::snprintf(buffer, sizeof(buffer),
                "TQ %.2e <= 1e-8, [Q,T1] %.2e <= 1e-9, Q(xi') = I %.2e <= 1e-10, Leibniz %.2e",
                worst_tq, worst_comm, worst_norm, worst_leib);
  verdict(9,
          worst_tq <= 1e-8 && worst_comm <= 1e-9 && worst_norm <= 1e-10 && invertible &&
              worst_leib <= 1e-8,
          "Q-operator difference equation, commutation, normalization, invertibility", buffer);
}

void criterion_10() {
  double worst_ref = 0.0, worst_overlap = 0.0;
  bool phi_const = true;
  for (auto [n, N] : std::vector<std::pair<int, int>>{{2, 2}, {3, 2}}) {
    const SolvedInstance si = solve_instance(n, N, 9300 + 10 * n + N);
    const ReferenceState ref = reference_eigenvector(si.ctx);
    worst_ref = std::max(worst_ref, ref.eigen_residual);
    const QscCoefficients coeffs = qsc_coefficients(si.ctx, 0);
    const auto [phi0, cs0] = build_phi(si.ctx, ref.polys.t[1], coeffs);
    phi_const = phi_const && phi0.degree == 0;
    for (const auto& s : si.seeded) {
      const SpectrumSolution sol = sov_eigenvector(si.ctx, si.fam, si.basis, s.x, &si.oracle);
      const auto [phi, cs] = build_phi(si.ctx, sol.polys.t[1], coeffs);
      const Vec aba = aba_vector(si.ctx, si.basis, phi.roots, ref.vector);
      worst_overlap = std::max(worst_overlap, 1.0 - overlap(aba, sol.eigenvector));
    }
  }
  std::snprintf(buffer, sizeof(buffer),
                "reference residual %.2e <= 1e-9 (phi %s), ABA misalignment %.2e <= 1e-8",
                worst_ref, phi_const ? "constant" : "NOT CONSTANT", worst_overlap);
  verdict(10, worst_ref <= 1e-9 && phi_const && worst_overlap <= 1e-8,
          "Bethe-ansatz form: reference state and separating-operator products", buffer);
}

void criterion_11() {
  bool ok = true;
  std::string detail;
  const cplx k(1.0, -0.3), eta(1.0, 0.2);
  for (int N : {1, 2}) {
    Mat K(2, 2);
    K(0, 0) = K(1, 1) = k;
    K(0, 1) = 1.0;
    Rng rng(9400 + N);
    const Vec xi = N == 1 ? Vec{0.0} : random_xi(2, 2, eta, rng, 0.05);
    const ModelContext ctx = make_context(2, N, eta, xi, K, {}, 9400 + N);
    const TransferFamily fam = build_family(ctx);
    const SovBasis basis = build_basis(ctx, fam, build_seed(ctx));
    const Oracle oracle = brute_force_spectrum(ctx, fam);
    const auto seeded = solve_system(ctx, fam, SolveMode::kOracleSeeded, &oracle);
    const SimplicityReport rep = simplicity_report(ctx, fam, seeded, oracle);

    bool geom_ok = true;
    for (int g : rep.geometric_multiplicities) geom_ok = geom_ok && g == 1;
    ok = ok && rep.oracle_tuples_covered && geom_ok;
    if (N == 1) {
      double err = 1.0;
      if (seeded.size() == 1) err = std::abs(seeded[0].x[0] - k * eta);
      ok = ok && err <= 1e-10;
      std::snprintf(buffer, sizeof(buffer), "N=1 double root off by %.1e; ", err);
      detail += buffer;
    } else {
      detail += "N=2 tuples " + std::to_string(seeded.size()) + "/" +
                std::to_string(oracle.pairs.size()) + " covered";
    }
  }
  verdict(11, ok, "non-diagonalizable w-simple twist (Jordan block, N = 1, 2)", detail);
}

void criterion_12() {
  double worst_sc = 0.0, worst_shadow = 0.0;
  for (auto [n, N] :
       std::vector<std::pair<int, int>>{{2, 1}, {2, 2}, {2, 3}, {3, 2}}) {
    const SolvedInstance si = solve_instance(n, N, 9500 + 10 * n + N);
    const int dq = si.ctx.state_dim();
    std::vector<StructureConstants> scs;
    for (int a = 0; a < N; ++a) {
      scs.push_back(structure_constants(si.ctx, si.fam, si.basis, a));
      worst_sc = std::max(worst_sc, scs.back().max_residual);
    }
    for (const auto& s : si.seeded) {
      const SpectrumSolution sol = sov_eigenvector(si.ctx, si.fam, si.basis, s.x, &si.oracle);
      for (int a = 0; a < N; ++a)
        for (int idx = 0; idx < dq; ++idx) {
          const cplx lhs = sol.wavefunction[idx] * s.x[a];
          cplx rhs = 0.0;
          for (int hp = 0; hp < dq; ++hp) rhs += scs[a].C(idx, hp) * sol.wavefunction[hp];
          const double sc = std::max({std::abs(lhs), std::abs(rhs), 1.0});
          worst_shadow = std::max(worst_shadow, std::abs(lhs - rhs) / sc);
        }
    }
  }
  std::snprintf(buffer, sizeof(buffer), "reconstruction %.2e <= 1e-9, scalar shadow %.2e <= 1e-8",
                worst_sc, worst_shadow);
  verdict(12, worst_sc <= 1e-9 && worst_shadow <= 1e-8,
          "Bethe-algebra structure constants and their scalar shadow", buffer);
}

}  // namespace

int main() {
  Stopwatch total;
  criterion_1();
  criterion_2();
  criterion_3();
  criterion_4();
  criterion_5();
  criterion_6();
  criterion_7();
  criterion_8();
  criterion_9();
  criterion_10();
  criterion_11();
  criterion_12();
  std::printf("acceptance: %d of 12 criteria failed (%.1fs total)\n", failures, total.s());
  return failures;
}
