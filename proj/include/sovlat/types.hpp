#ifndef SOVLAT_TYPES_HPP
#define SOVLAT_TYPES_HPP

#include <complex>
#include <vector>
#include <stdexcept>
#include <string>
#include <cmath>
#include <cstdint>

namespace sovlat {

using cplx = std::complex<double>;
using Vec = std::vector<cplx>;

// Error hierarchy. Construction problems (bad parameters, degenerate data)
// are distinguished from numerical failures (a decomposition that did not
// converge) because the CLI maps them to different exit codes.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct ConfigError : Error {
  using Error::Error;
};
struct ConstructionError : Error {
  using Error::Error;
};
struct NumericalFailure : Error {
  using Error::Error;
};
struct DegenerateBasis : ConstructionError {
  double abs_det;
  double cond;
  DegenerateBasis(const std::string& msg, double d, double c)
      : ConstructionError(msg), abs_det(d), cond(c) {}
};
struct UnsupportedTwist : ConstructionError {
  using ConstructionError::ConstructionError;
};
struct RejectSolution : Error {
  using Error::Error;
};

// Dense square-or-rectangular complex matrix, row major.
struct Mat {
  int rows = 0;
  int cols = 0;
  std::vector<cplx> a;

  Mat() = default;
  Mat(int r, int c) : rows(r), cols(c), a(static_cast<size_t>(r) * c) {}

  cplx& operator()(int i, int j) { return a[static_cast<size_t>(i) * cols + j]; }
  const cplx& operator()(int i, int j) const { return a[static_cast<size_t>(i) * cols + j]; }

  cplx* row_ptr(int i) { return a.data() + static_cast<size_t>(i) * cols; }
  const cplx* row_ptr(int i) const { return a.data() + static_cast<size_t>(i) * cols; }

  static Mat identity(int d) {
    Mat m(d, d);
    for (int i = 0; i < d; ++i) m(i, i) = 1.0;
    return m;
  }
  static Mat diagonal(const Vec& d) {
    Mat m(static_cast<int>(d.size()), static_cast<int>(d.size()));
    for (size_t i = 0; i < d.size(); ++i) m(static_cast<int>(i), static_cast<int>(i)) = d[i];
    return m;
  }

  bool finite() const {
    for (const cplx& z : a)
      if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) return false;
    return true;
  }
};

inline double frob_norm(const Mat& m) {
  double s = 0.0;
  for (const cplx& z : m.a) s += std::norm(z);
  return std::sqrt(s);
}

inline double vec_norm(const Vec& v) {
  double s = 0.0;
  for (const cplx& z : v) s += std::norm(z);
  return std::sqrt(s);
}

inline cplx dot_conj(const Vec& u, const Vec& v) {
  cplx s = 0.0;
  for (size_t i = 0; i < u.size(); ++i) s += std::conj(u[i]) * v[i];
  return s;
}

// |<u,v>| / (||u|| ||v||), the alignment of two nonzero vectors.
inline double overlap(const Vec& u, const Vec& v) {
  double nu = vec_norm(u), nv = vec_norm(v);
  if (nu == 0.0 || nv == 0.0) return 0.0;
  return std::abs(dot_conj(u, v)) / (nu * nv);
}

inline Mat operator+(const Mat& x, const Mat& y) {
  Mat r = x;
  for (size_t i = 0; i < r.a.size(); ++i) r.a[i] += y.a[i];
  return r;
}
inline Mat operator-(const Mat& x, const Mat& y) {
  Mat r = x;
  for (size_t i = 0; i < r.a.size(); ++i) r.a[i] -= y.a[i];
  return r;
}
inline Mat operator*(cplx s, const Mat& x) {
  Mat r = x;
  for (cplx& z : r.a) z *= s;
  return r;
}

}  // namespace sovlat

#endif
