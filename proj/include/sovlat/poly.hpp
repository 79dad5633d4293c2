#ifndef SOVLAT_POLY_HPP
#define SOVLAT_POLY_HPP

#include "sovlat/types.hpp"

namespace sovlat {

// Univariate complex polynomial, coefficients in ascending degree.
// Canonical form trims exact zero tail coefficients only; tolerance-based
// trimming is a separate, explicit operation.
struct Polynomial {
  Vec c;

  Polynomial() = default;
  explicit Polynomial(Vec coeffs) : c(std::move(coeffs)) { normalize(); }
  static Polynomial constant(cplx v) { return Polynomial(Vec{v}); }
  static Polynomial from_roots(const Vec& roots);  // monic

  int degree() const { return static_cast<int>(c.size()) - 1; }  // -1 for zero poly
  bool is_zero() const { return c.empty(); }
  cplx leading() const { return c.empty() ? cplx(0.0) : c.back(); }
  cplx eval(cplx x) const;
  Polynomial derivative() const;
  Polynomial shifted_argument(cplx s) const;  // p(x + s)
  double max_abs_coeff() const;
  Polynomial trimmed(double rel_tol) const;  // drop tail coeffs below rel_tol * max
  Vec roots() const;                         // companion-matrix eigenvalues

  void normalize() {
    while (!c.empty() && c.back() == cplx(0.0)) c.pop_back();
  }
};

Polynomial operator+(const Polynomial& p, const Polynomial& q);
Polynomial operator-(const Polynomial& p, const Polynomial& q);
Polynomial operator*(const Polynomial& p, const Polynomial& q);
Polynomial operator*(cplx s, const Polynomial& p);

// Unique interpolating polynomial of degree <= nodes-1 through the samples,
// assembled from the Lagrange form. Nodes closer than node_tol are rejected.
Polynomial poly_from_samples(const Vec& nodes, const Vec& values, double node_tol = 1e-10);

}  // namespace sovlat

#endif
