#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "sovlat/linalg.hpp"
#include "sovlat/model.hpp"

using namespace sovlat;

namespace {

// The analytic instance used throughout: n=2, N=1, K=diag(1,2), xi=0, eta=1.
ModelContext golden() {
  Mat K(2, 2);
  K(0, 0) = 1.0;
  K(1, 1) = 2.0;
  return make_context(2, 1, 1.0, {0.0}, K);
}

ModelContext random_instance(int n, int N, cplx eta, std::uint64_t seed) {
  Rng rng(seed);
  const Mat K = random_simple_twist(n, rng, {});
  const Vec xi = random_xi(n, N, eta, rng, 0.05);
  return make_context(n, N, eta, xi, K, {}, seed);
}

}  // namespace

TEST_CASE("r_matrix closed forms") {
  const ModelContext ctx = golden();
  // u = 0 leaves eta times the permutation.
  const Mat r0 = r_matrix(ctx, 0.0).mat;
  const Mat p = permutation_operator(TensorSpace::uniform(2, 2), {1, 0}).mat;
  for (size_t i = 0; i < r0.a.size(); ++i) CHECK(r0.a[i] == ctx.eta * p.a[i]);

  // n=2, u=1, eta=1 written out.
  const Mat r1 = r_matrix(ctx, 1.0).mat;
  const double expect[4][4] = {{2, 0, 0, 0}, {0, 1, 1, 0}, {0, 1, 1, 0}, {0, 0, 0, 2}};
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) CHECK(std::abs(r1(i, j) - expect[i][j]) == 0.0);

  // R(u) R(-u) = (eta^2 - u^2) I.
  const cplx u(0.3, 0.7);
  const Mat prod = matmul(r_matrix(ctx, u).mat, r_matrix(ctx, -u).mat);
  const cplx scal = ctx.eta * ctx.eta - u * u;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      CHECK(std::abs(prod(i, j) - (i == j ? scal : cplx(0.0))) <= 1e-14);
}

TEST_CASE("Yang-Baxter residuals") {
  const ModelContext c2 = random_instance(2, 1, cplx(1.0, 0.2), 101);
  // Coinciding points reduce both sides to the same permutation product.
  CHECK(yang_baxter_residual(c2, cplx(0.4, 0.1), cplx(0.4, 0.1), cplx(0.4, 0.1)) == 0.0);
  Rng rng(51);
  for (int t = 0; t < 4; ++t)
    CHECK(yang_baxter_residual(c2, rng.box(2.0), rng.box(2.0), rng.box(2.0)) <= 1e-12);
  const ModelContext c3 = random_instance(3, 1, cplx(0.9, -0.3), 102);
  for (int t = 0; t < 4; ++t)
    CHECK(yang_baxter_residual(c3, rng.box(2.0), rng.box(2.0), rng.box(2.0)) <= 1e-12);
}

TEST_CASE("twist invariance of the R-matrix") {
  // K = identity commutes exactly (raw check: the identity twist itself is
  // derogatory, so it cannot form a model context).
  {
    const Mat R = r_matrix_block(2, cplx(0.3, 0.4), 1.0);
    const Mat KK = kron(Mat::identity(2), Mat::identity(2));
    CHECK(rel_diff(matmul(R, KK), matmul(KK, R)) == 0.0);
  }

  const ModelContext rnd = random_instance(2, 1, 1.0, 103);
  CHECK(twist_invariance_residual(rnd, cplx(0.1, -0.9)) <= 1e-12);

  Mat KJ(2, 2);
  KJ(0, 0) = KJ(1, 1) = 1.3;
  KJ(0, 1) = 1.0;
  const ModelContext jord = make_context(2, 1, 1.0, {0.0}, KJ);
  CHECK(twist_invariance_residual(jord, cplx(0.5, 0.2)) <= 1e-12);
}

TEST_CASE("monodromy closed forms at N=1") {
  const ModelContext ctx = golden();
  // At u = xi_1 the chain R-matrix degenerates to eta P.
  const Mat m = monodromy(ctx, 0.0).mat;
  const TensorSpace sp = TensorSpace::uniform(2, 2);
  const Mat p = permutation_operator(sp, {1, 0}).mat;
  const Mat expect = matmul(embed(sp, ctx.twist.K, {0}).mat, ctx.eta * p);
  CHECK(rel_diff(m, expect) <= 1e-14);

  // tr_a M(u) = (u - xi_1) tr K I + eta K.
  const cplx u(0.7, 0.3);
  const Mat tr = partial_trace(monodromy(ctx, u), {1}).mat;
  Mat closed = ctx.eta * ctx.twist.K;
  const cplx c = (u - ctx.xi[0]) * trace(ctx.twist.K);
  closed(0, 0) += c;
  closed(1, 1) += c;
  CHECK(rel_diff(tr, closed) <= 1e-13);

  // And it matches the fused construction at order one.
  CHECK(rel_diff(tr, transfer(ctx, 1, u).mat) <= 1e-13);
}

TEST_CASE("golden transfer matrix and quantum determinant") {
  const ModelContext ctx = golden();
  const cplx u(0.37, -0.83);
  const Mat t1 = transfer(ctx, 1, u).mat;
  CHECK(std::abs(t1(0, 0) - (3.0 * u + 1.0)) <= 1e-13);
  CHECK(std::abs(t1(1, 1) - (3.0 * u + 2.0)) <= 1e-13);
  CHECK(std::abs(t1(0, 1)) <= 1e-14);
  CHECK(std::abs(t1(1, 0)) <= 1e-14);

  // q-det(lambda) = 2 (lambda+1)(lambda-1); value -2 at zero.
  CHECK(std::abs(q_det_closed_form(ctx, 0.0) - cplx(-2.0)) <= 1e-14);
  CHECK(std::abs(q_det_closed_form(ctx, ctx.xi[0] - ctx.eta)) <= 1e-14);

  // Fusion at the inhomogeneity: T1(0) T1(-1) = -2 I = T2(0).
  const Mat lhs = matmul(transfer(ctx, 1, 0.0).mat, transfer(ctx, 1, -1.0).mat);
  const Mat t2 = transfer(ctx, 2, 0.0).mat;
  CHECK(rel_diff(lhs, t2) <= 1e-13);
  for (int i = 0; i < 2; ++i) CHECK(std::abs(t2(i, i) - cplx(-2.0)) <= 1e-13);

  // Scaling K by c scales the quantum determinant by c^n.
  Mat K2 = ctx.twist.K;
  for (cplx& z : K2.a) z *= cplx(0.5, 0.25);
  const ModelContext scaled = make_context(2, 1, 1.0, {0.0}, K2);
  const cplx ratio = q_det_closed_form(scaled, u) / q_det_closed_form(ctx, u);
  const cplx c = cplx(0.5, 0.25);
  CHECK(std::abs(ratio - c * c) <= 1e-13);
}

TEST_CASE("central element: T_n equals the closed form times identity") {
  const ModelContext ctx = random_instance(2, 2, cplx(1.3, 0.4), 104);
  Rng rng(52);
  for (int t = 0; t < 3; ++t) {
    const cplx u = rng.box(2.0);
    const Mat tn = transfer(ctx, 2, u).mat;
    Mat qd = Mat::identity(ctx.state_dim());
    const cplx q = q_det_closed_form(ctx, u);
    for (cplx& z : qd.a) z *= q;
    CHECK(rel_diff(tn, qd) <= 1e-10);
  }
}

TEST_CASE("central zeroes of the fused hierarchy") {
  const ModelContext ctx = random_instance(3, 2, cplx(1.1, -0.2), 105);
  const double scale2 = frob_norm(transfer(ctx, 2, ctx.probe_point()).mat);
  const double scale3 = frob_norm(transfer(ctx, 3, ctx.probe_point()).mat);
  for (int a = 0; a < 2; ++a) {
    CHECK(frob_norm(transfer(ctx, 2, ctx.xi[a] + ctx.eta).mat) <= 1e-9 * scale2);
    CHECK(frob_norm(transfer(ctx, 3, ctx.xi[a] + ctx.eta).mat) <= 1e-9 * scale3);
    CHECK(frob_norm(transfer(ctx, 3, ctx.xi[a] + 2.0 * ctx.eta).mat) <= 1e-9 * scale3);
  }
}

TEST_CASE("slab construction matches the dense serial reference") {
  Rng rng(53);
  for (auto [n, N] : std::vector<std::pair<int, int>>{{2, 1}, {2, 2}, {3, 1}, {3, 2}}) {
    const ModelContext ctx = random_instance(n, N, cplx(0.9, 0.35), 200 + n * 10 + N);
    for (int m = 1; m <= n; ++m) {
      const cplx u = rng.box(1.5);
      const Mat fast = transfer(ctx, m, u).mat;
      const Mat slow = transfer_serial_reference(ctx, m, u).mat;
      CHECK(rel_diff(fast, slow) <= 1e-12);
    }
  }
}

TEST_CASE("asymptotic invariants") {
  const ModelContext ctx = random_instance(3, 2, cplx(1.0, 0.1), 106);
  CHECK(std::abs(asymptotic(ctx, 1) - trace(ctx.twist.K)) <= 1e-12);
  CHECK(std::abs(asymptotic(ctx, 3) - ctx.twist.det) <= 1e-12 * std::abs(ctx.twist.det));

  const ModelContext g = golden();
  CHECK(std::abs(asymptotic(g, 2) - cplx(2.0)) <= 1e-13);  // k1 k2 = 2
}

TEST_CASE("interpolation weights") {
  const ModelContext ctx = random_instance(3, 3, cplx(1.2, 0.3), 107);
  // Lagrange behavior of the order-one weights at h = 0.
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b) {
      const cplx v = g_function(ctx, a, 1, ctx.xi[b]);
      CHECK(std::abs(v - (a == b ? cplx(1.0) : cplx(0.0))) <= 1e-12);
    }
  const ModelContext g = golden();
  CHECK(std::abs(g_function(g, 0, 1, cplx(0.77, 0.1)) - cplx(1.0)) == 0.0);
}

TEST_CASE("transfer family: fusion identities and interpolated reconstruction") {
  const ModelContext ctx = random_instance(3, 2, cplx(1.4, -0.4), 108);
  const TransferFamily fam = build_family(ctx);
  for (int a = 0; a < 2; ++a)
    for (int m = 1; m <= 2; ++m) CHECK(fusion_residual(ctx, fam, a, m) <= 1e-9);

  Rng rng(54);
  for (int m1 = 2; m1 <= 3; ++m1)
    for (int t = 0; t < 5; ++t) {
      const cplx u = rng.box(2.0);
      CHECK(rel_diff(transfer(ctx, m1, u).mat, transfer_interpolated(ctx, fam, m1, u).mat) <= 1e-9);
    }
  // The interpolated form vanishes on the central zero grid.
  for (int a = 0; a < 2; ++a)
    for (int r = 1; r <= 2; ++r)
      CHECK(frob_norm(transfer_interpolated(ctx, fam, 3, ctx.xi[a] + static_cast<double>(r) * ctx.eta).mat) <=
            1e-10 * frob_norm(transfer_interpolated(ctx, fam, 3, ctx.probe_point()).mat));

  // m = n-1 fusion lands on the quantum determinant.
  for (int a = 0; a < 2; ++a) {
    const Mat lhs = matmul(fam.at(1, a, 0), fam.at(2, a, -1));
    Mat qd = Mat::identity(ctx.state_dim());
    const cplx q = q_det_closed_form(ctx, ctx.xi[a]);
    for (cplx& z : qd.a) z *= q;
    CHECK(rel_diff(lhs, qd) <= 1e-9);
  }
}

TEST_CASE("transfer commutativity") {
  const ModelContext ctx = random_instance(3, 2, cplx(0.8, 0.5), 109);
  Rng rng(55);
  for (int t = 0; t < 2; ++t) {
    const cplx u = rng.box(2.0), v = rng.box(2.0);
    for (int l = 1; l <= 3; ++l)
      for (int m = 1; m <= 3; ++m)
        CHECK(commutator_rel_norm(transfer(ctx, l, u).mat, transfer(ctx, m, v).mat) <= 1e-9);
  }
}

TEST_CASE("twist construction: diagonal, Jordan, conjugated") {
  Tolerances tol;
  {
    Mat K(3, 3);
    K(0, 0) = 1.0;
    K(1, 1) = cplx(0.0, 2.0);
    K(2, 2) = -0.5;
    const TwistMatrix tw = make_twist(K, tol);
    CHECK(tw.diagonalizable);
    CHECK(tw.block_count() == 3);
    // Lexicographic block order; the largest eigenvalue is found separately.
    CHECK(std::abs(tw.blocks[0].eigenvalue - cplx(-0.5, 0.0)) <= 1e-12);
    CHECK(std::abs(tw.blocks[tw.largest_eigenvalue_index()].eigenvalue - cplx(0.0, 2.0)) <= 1e-12);
    CHECK(std::abs(tw.det - cplx(0.0, -1.0)) <= 1e-12);
  }
  {
    Mat K(2, 2);
    K(0, 0) = K(1, 1) = 1.0;
    K(0, 1) = 1.0;
    const TwistMatrix tw = make_twist(K, tol);
    CHECK(!tw.diagonalizable);
    REQUIRE(tw.block_count() == 1);
    CHECK(tw.blocks[0].size == 2);
    CHECK(rel_diff(matmul(tw.W, matmul(tw.KJ, tw.W_inv)), K) <= 1e-10);
  }
  {
    // Conjugated Jordan structure is recovered.
    Rng rng(56);
    Mat S(3, 3);
    for (cplx& z : S.a) z = rng.box(1.0);
    S(0, 0) += 2.0;
    S(1, 1) += 2.0;
    S(2, 2) += 2.0;
    const Mat J = twist_from_blocks({{cplx(1.2, 0.4), 2}, {cplx(-0.7, 0.0), 1}});
    const Mat K = matmul(S, matmul(J, inverse(S)));
    const TwistMatrix tw = make_twist(K, tol);
    CHECK(!tw.diagonalizable);
    REQUIRE(tw.block_count() == 2);
    CHECK(tw.blocks[0].size == 1);  // -0.7 sorts first
    CHECK(tw.blocks[1].size == 2);
    CHECK(std::abs(tw.blocks[1].eigenvalue - cplx(1.2, 0.4)) <= 1e-7);
    CHECK(rel_diff(matmul(tw.W, matmul(tw.KJ, tw.W_inv)), K) <= 1e-9);
  }
  {
    // The identity is derogatory (two blocks with one eigenvalue): rejected.
    CHECK_THROWS_AS(make_twist(Mat::identity(2), tol), ConstructionError);
    // Singular twists are rejected.
    Mat Z(2, 2);
    Z(0, 1) = 1.0;
    CHECK_THROWS_AS(make_twist(Z, tol), ConstructionError);
  }
  {
    // Conjugated size-3 chain: the defective eigenvalue splits by about
    // eps^(1/3) under diagonalization, exercising the gap escalation.
    Rng rng(58);
    Mat S(3, 3);
    for (cplx& z : S.a) z = rng.box(1.0);
    for (int i = 0; i < 3; ++i) S(i, i) += 2.0;
    const Mat J = twist_from_blocks({{cplx(0.9, -0.6), 3}});
    const Mat K = matmul(S, matmul(J, inverse(S)));
    const TwistMatrix tw = make_twist(K, tol);
    REQUIRE(tw.block_count() == 1);
    CHECK(tw.blocks[0].size == 3);
    CHECK(std::abs(tw.blocks[0].eigenvalue - cplx(0.9, -0.6)) <= 1e-5);
    CHECK(rel_diff(matmul(tw.W, matmul(tw.KJ, tw.W_inv)), K) <= 1e-10);
  }
}

TEST_CASE("context validation") {
  Mat K(2, 2);
  K(0, 0) = 1.0;
  K(1, 1) = 2.0;
  CHECK_THROWS_AS(make_context(2, 1, 0.0, {0.0}, K), ConfigError);
  CHECK_THROWS_AS(make_context(2, 2, 1.0, {0.0, 0.0}, K), ConstructionError);
  // Resonant pair xi_1 - xi_2 = eta.
  CHECK_THROWS_AS(make_context(2, 2, 1.0, {1.0, 0.0}, K), ConstructionError);
  // Healthy generic pair.
  const ModelContext ok = make_context(2, 2, 1.0, {cplx(0.2, 0.4), cplx(-0.3, -0.1)}, K);
  CHECK(ok.state_dim() == 4);
  CHECK(std::abs(ok.xi_extra - (ok.xi[0] - ok.eta)) == 0.0);
  // State cap.
  CHECK_THROWS_AS(make_context(2, 9, 1.0, Vec(9, 0.0), K, {}, 1, 256), ConfigError);
}

TEST_CASE("random instance battery: construction identities across seeds") {
  // Property-style sweep over several generic draws.
  for (std::uint64_t seed : {21u, 22u, 23u, 24u, 25u}) {
    const int n = 2 + static_cast<int>(seed % 2);
    const ModelContext ctx = random_instance(n, 2, cplx(1.3, 0.25), seed);
    Rng rng(seed * 7 + 1);
    const cplx u = rng.box(1.5);
    // Fused route vs dense reference.
    CHECK(rel_diff(transfer(ctx, n, u).mat, transfer_serial_reference(ctx, n, u).mat) <= 1e-11);
    // Top of the hierarchy is central.
    Mat qd = Mat::identity(ctx.state_dim());
    const cplx q = q_det_closed_form(ctx, u);
    for (cplx& z : qd.a) z *= q;
    CHECK(rel_diff(transfer(ctx, n, u).mat, qd) <= 1e-10);
    // One fusion identity per instance.
    const TransferFamily fam = build_family(ctx);
    CHECK(fusion_residual(ctx, fam, 0, 1) <= 1e-9);
  }
}

TEST_CASE("grid cache rejects off-grid keys") {
  const ModelContext ctx = random_instance(2, 2, cplx(1.1, 0.2), 112);
  const TransferFamily fam = build_family(ctx);
  CHECK_THROWS_AS(fam.at(1, 0, 2), ConstructionError);   // r beyond n-1
  CHECK_THROWS_AS(fam.at(3, 0, 0), ConstructionError);   // m beyond n
  CHECK_THROWS_AS(fam.at(1, 2, 0), ConstructionError);   // site out of range
}

TEST_CASE("every cached grid operator commutes with every other") {
  const ModelContext ctx = random_instance(2, 2, cplx(1.25, 0.45), 111);
  const TransferFamily fam = build_family(ctx);
  // Normalize against per-order family scales: the grid contains exact
  // central zeroes whose own norm is pure roundoff.
  std::vector<const Mat*> ops;
  std::vector<double> scales;
  std::vector<double> order_scale(3, 0.0);
  for (int m = 1; m <= 2; ++m)
    for (int a = 0; a < 2; ++a)
      for (int r = -1; r < 2; ++r)
        order_scale[m] = std::max(order_scale[m], frob_norm(fam.at(m, a, r)));
  for (int m = 1; m <= 2; ++m)
    for (int a = 0; a < 2; ++a)
      for (int r = -1; r < 2; ++r) {
        ops.push_back(&fam.at(m, a, r));
        scales.push_back(order_scale[m]);
      }
  for (size_t i = 0; i < ops.size(); ++i)
    for (size_t j = i + 1; j < ops.size(); ++j) {
      const Mat comm = matmul(*ops[i], *ops[j]) - matmul(*ops[j], *ops[i]);
      CHECK(frob_norm(comm) <= 1e-9 * scales[i] * scales[j]);
    }
}

TEST_CASE("transfer degree by sampling") {
  const ModelContext ctx = random_instance(2, 2, cplx(1.1, 0.6), 110);
  Rng rng(57);
  const int dq = ctx.state_dim();
  // Scalar probe of T_2 must be a degree-4 polynomial with the predicted
  // leading coefficient.
  Vec nodes, values;
  Vec pu(dq), pw(dq);
  for (int i = 0; i < dq; ++i) pu[i] = rng.box(1.0), pw[i] = rng.box(1.0);
  cplx pair = 0.0;
  for (int i = 0; i < dq; ++i) pair += pu[i] * pw[i];
  for (int s = 0; s < 7; ++s) {
    const cplx u = 3.0 * cplx(std::cos(0.9 * s), std::sin(0.9 * s));
    nodes.push_back(u);
    const Mat t2 = transfer(ctx, 2, u).mat;
    cplx val = 0.0;
    for (int i = 0; i < dq; ++i)
      for (int j = 0; j < dq; ++j) val += pu[i] * t2(i, j) * pw[j];
    values.push_back(val);
  }
  const Polynomial fit = poly_from_samples(nodes, values);
  REQUIRE(fit.degree() >= 4);
  if (fit.degree() > 4) CHECK(std::abs(fit.c[5]) <= 1e-9 * fit.max_abs_coeff());
  const cplx expect = asymptotic(ctx, 2) * pair;
  CHECK(std::abs(fit.c[4] - expect) <= 1e-8 * std::abs(expect));
}
