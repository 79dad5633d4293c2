#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "sovlat/kernels.hpp"
#include "sovlat/linalg.hpp"
#include "sovlat/random.hpp"

using namespace sovlat;

namespace {

Mat random_mat(int d, Rng& rng) {
  Mat m(d, d);
  for (cplx& z : m.a) z = rng.box(1.0);
  return m;
}

}  // namespace

TEST_CASE("eigenvalues of a diagonal matrix, sorted") {
  Mat a(3, 3);
  a(0, 0) = 3.0;
  a(1, 1) = 1.0;
  a(2, 2) = 2.0;
  const auto ed = eigen_decompose(a);
  CHECK(std::abs(ed.eigenvalues[0] - 1.0) <= 1e-14);
  CHECK(std::abs(ed.eigenvalues[1] - 2.0) <= 1e-14);
  CHECK(std::abs(ed.eigenvalues[2] - 3.0) <= 1e-14);
}

TEST_CASE("defective 2x2 block: repeated eigenvalue, rank-one vectors") {
  Mat a(2, 2);
  a(0, 0) = a(1, 1) = cplx(1.5, -0.5);
  a(0, 1) = 1.0;
  const auto ed = eigen_decompose(a);
  CHECK(std::abs(ed.eigenvalues[0] - cplx(1.5, -0.5)) <= 1e-12);
  CHECK(std::abs(ed.eigenvalues[1] - cplx(1.5, -0.5)) <= 1e-12);
  CHECK(numerical_rank(ed.right_vectors, 1e-8) == 1);
}

TEST_CASE("eigen residual on random matrices up to dimension 81") {
  Rng rng(21);
  for (int d : {4, 16, 81}) {
    const Mat a = random_mat(d, rng);
    const double na = frob_norm(a);
    const auto ed = eigen_decompose(a);
    for (int j = 0; j < d; ++j) {
      Vec v(d);
      for (int i = 0; i < d; ++i) v[i] = ed.right_vectors(i, j);
      const Vec av = matvec(a, v);
      double r = 0.0;
      for (int i = 0; i < d; ++i) r += std::norm(av[i] - ed.eigenvalues[j] * v[i]);
      CHECK(std::sqrt(r) <= 1e-10 * na * vec_norm(v));
    }
  }
}

TEST_CASE("lu solve, determinant, inverse") {
  Rng rng(22);
  const Mat a = random_mat(6, rng);
  const LuFactor lu(a);
  Vec b(6);
  for (cplx& z : b) z = rng.box(1.0);
  const Vec x = lu.solve(b);
  const Vec ax = matvec(a, x);
  for (int i = 0; i < 6; ++i) CHECK(std::abs(ax[i] - b[i]) <= 1e-11);

  const Mat id = matmul(a, lu.inverse());
  double diff = 0.0;
  for (int i = 0; i < 6; ++i)
    for (int j = 0; j < 6; ++j) diff += std::norm(id(i, j) - (i == j ? 1.0 : 0.0));
  CHECK(std::sqrt(diff) <= 1e-11);

  const cplx dd = lu.det() * determinant(lu.inverse());
  CHECK(std::abs(dd - 1.0) <= 1e-11);
}

TEST_CASE("singular value based rank") {
  Mat a(3, 3);
  a(0, 0) = 1.0;
  a(1, 1) = 2.0;
  CHECK(numerical_rank(a) == 2);
  const auto sv = singular_values(a);
  CHECK(std::abs(sv[0] - 2.0) <= 1e-13);
  CHECK(std::abs(sv[1] - 1.0) <= 1e-13);
  CHECK(std::abs(sv[2]) <= 1e-13);
}

TEST_CASE("determinant of a triangular matrix") {
  Mat a(3, 3);
  a(0, 0) = 2.0;
  a(1, 1) = cplx(0.0, 1.0);
  a(2, 2) = -3.0;
  a(0, 2) = 5.0;
  const cplx d = determinant(a);
  CHECK(std::abs(d - cplx(0.0, -6.0)) <= 1e-13);
}
