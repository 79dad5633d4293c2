// Timing comparison of the OpenMP kernels against their serial references.
#include <chrono>
#include <cstdio>
#include <functional>

#include <omp.h>

#include "sovlat/model.hpp"

using namespace sovlat;

namespace {

double time_of(const std::function<void()>& fn, int reps = 3) {
  double best = 1e300;
  for (int r = 0; r < reps; ++r) {
    const auto t0 = std::chrono::steady_clock::now();
    fn();
    const auto t1 = std::chrono::steady_clock::now();
    best = std::min(best, std::chrono::duration<double>(t1 - t0).count());
  }
  return best;
}

Mat random_mat(int d, Rng& rng) {
  Mat m(d, d);
  for (cplx& z : m.a) z = rng.box(1.0);
  return m;
}

}  // namespace

int main() {
  std::printf("threads: %d\n\n", omp_get_max_threads());
  Rng rng(42);

  std::printf("%-34s %10s %10s %8s\n", "kernel", "serial[s]", "omp[s]", "speedup");
  for (int d : {128, 256, 512}) {
    const Mat a = random_mat(d, rng), b = random_mat(d, rng);
    Mat out;
    const double ts = time_of([&] { out = matmul_serial(a, b); });
    const double tp = time_of([&] { out = matmul(a, b); });
    std::printf("matmul %4d x %-4d                  %10.4f %10.4f %8.2fx\n", d, d, ts, tp, ts / tp);
  }

  {
    const std::vector<int> dims(6, 3);  // 729-dimensional slab space
    const FactorLayout L(dims);
    Mat xs(static_cast<int>(L.total), 243), xp = xs;
    for (cplx& z : xs.a) z = rng.box(1.0);
    xp = xs;
    const double ts = time_of([&] { apply_swap_gate_serial(xs, L, 0, 3, cplx(0.7, 0.1), 1.0); });
    const double tp = time_of([&] { apply_swap_gate(xp, L, 0, 3, cplx(0.7, 0.1), 1.0); });
    std::printf("swap gate on 729 x 243 slab        %10.4f %10.4f %8.2fx\n", ts, tp, ts / tp);
  }

  // Fused transfer: OpenMP slab streaming vs dense embedded products.
  {
    Rng xrng(7);
    Tolerances tol;
    const Mat K = random_simple_twist(3, xrng, tol);
    const Vec xi = random_xi(3, 3, cplx(1.6, 0.4), xrng, 0.05);
    const ModelContext ctx = make_context(3, 3, cplx(1.6, 0.4), xi, K);
    for (int m : {2, 3}) {
      Mat out;
      const double ts =
          time_of([&] { out = transfer_serial_reference(ctx, m, cplx(0.3, 0.2)).mat; }, 1);
      const double tp = time_of([&] { out = transfer(ctx, m, cplx(0.3, 0.2)).mat; }, 1);
      std::printf("fused transfer n=3 N=3 m=%d         %10.4f %10.4f %8.2fx\n", m, ts, tp, ts / tp);
    }
  }
  return 0;
}
