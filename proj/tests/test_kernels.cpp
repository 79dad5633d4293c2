#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "sovlat/random.hpp"
#include "sovlat/tensor.hpp"

using namespace sovlat;

namespace {

Mat random_mat(int r, int c, Rng& rng) {
  Mat m(r, c);
  for (cplx& z : m.a) z = rng.box(1.0);
  return m;
}

}  // namespace

TEST_CASE("matmul matches the serial reference bitwise") {
  Rng rng(11);
  for (int d : {1, 7, 33, 130}) {
    const Mat a = random_mat(d, d, rng), b = random_mat(d, d, rng);
    const Mat c1 = matmul(a, b), c2 = matmul_serial(a, b);
    for (size_t i = 0; i < c1.a.size(); ++i) REQUIRE(c1.a[i] == c2.a[i]);
  }
}

TEST_CASE("matmul agrees with a transparent triple loop") {
  Rng rng(12);
  const Mat a = random_mat(9, 5, rng), b = random_mat(5, 7, rng);
  const Mat c = matmul(a, b);
  for (int i = 0; i < 9; ++i)
    for (int j = 0; j < 7; ++j) {
      cplx s = 0.0;
      for (int k = 0; k < 5; ++k) s += a(i, k) * b(k, j);
      CHECK(std::abs(c(i, j) - s) <= 1e-14);
    }
}

TEST_CASE("kron matches serial and the definition") {
  Rng rng(13);
  const Mat a = random_mat(3, 3, rng), b = random_mat(4, 4, rng);
  const Mat k1 = kron(a, b), k2 = kron_serial(a, b);
  for (size_t i = 0; i < k1.a.size(); ++i) REQUIRE(k1.a[i] == k2.a[i]);
  for (int ia = 0; ia < 3; ++ia)
    for (int ja = 0; ja < 3; ++ja)
      for (int ib = 0; ib < 4; ++ib)
        for (int jb = 0; jb < 4; ++jb)
          CHECK(k1(ia * 4 + ib, ja * 4 + jb) == a(ia, ja) * b(ib, jb));
}

TEST_CASE("swap gate equals the embedded R-matrix product") {
  Rng rng(14);
  const std::vector<int> dims = {2, 3, 2, 3};
  const TensorSpace sp{dims};
  const FactorLayout L = sp.layout();
  const cplx u(0.37, -0.21), eta(1.1, 0.3);

  for (auto [fa, fb] : std::vector<std::pair<int, int>>{{0, 2}, {2, 0}, {1, 3}}) {
    Mat x = random_mat(sp.total_dim, 5, rng);
    Mat x_omp = x, x_ser = x;
    apply_swap_gate(x_omp, L, fa, fb, u, eta);
    apply_swap_gate_serial(x_ser, L, fa, fb, u, eta);
    for (size_t i = 0; i < x_omp.a.size(); ++i) REQUIRE(x_omp.a[i] == x_ser.a[i]);

    // Reference: dense embedding of u I + eta P on the two factors.
    const int d = dims[fa];
    Mat gate(d * d, d * d);
    for (int i = 0; i < d; ++i)
      for (int k = 0; k < d; ++k) {
        gate(i * d + k, i * d + k) += u;
        gate(i * d + k, k * d + i) += eta;
      }
    const Mat lift = embed(sp, gate, {fa, fb}).mat;
    const Mat expect = matmul(lift, x);
    for (size_t i = 0; i < expect.a.size(); ++i)
      CHECK(std::abs(expect.a[i] - x_omp.a[i]) <= 1e-13);
  }
}

TEST_CASE("factor gate equals the embedded one-site product") {
  Rng rng(15);
  const std::vector<int> dims = {3, 2, 4};
  const TensorSpace sp{dims};
  const FactorLayout L = sp.layout();
  for (int f = 0; f < 3; ++f) {
    const Mat g = random_mat(dims[f], dims[f], rng);
    Mat x = random_mat(sp.total_dim, 6, rng);
    Mat x_omp = x, x_ser = x;
    apply_factor_gate(x_omp, L, f, g);
    apply_factor_gate_serial(x_ser, L, f, g);
    for (size_t i = 0; i < x_omp.a.size(); ++i) REQUIRE(x_omp.a[i] == x_ser.a[i]);
    const Mat expect = matmul(embed(sp, g, {f}).mat, x);
    for (size_t i = 0; i < expect.a.size(); ++i)
      CHECK(std::abs(expect.a[i] - x_omp.a[i]) <= 1e-13);
  }
}

TEST_CASE("swap gate rejects unequal factor dimensions") {
  const TensorSpace sp{std::vector<int>{2, 3}};
  const FactorLayout L = sp.layout();
  Mat x(6, 1);
  CHECK_THROWS_AS(apply_swap_gate(x, L, 0, 1, 1.0, 1.0), ConstructionError);
}
