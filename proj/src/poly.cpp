#include "sovlat/poly.hpp"

#include <algorithm>

#include "sovlat/linalg.hpp"

namespace sovlat {

Polynomial Polynomial::from_roots(const Vec& roots) {
  Vec c{1.0};
  for (cplx r : roots) {
    Vec next(c.size() + 1, 0.0);
    for (size_t i = 0; i < c.size(); ++i) {
      next[i + 1] += c[i];
      next[i] -= r * c[i];
    }
    c = std::move(next);
  }
  return Polynomial(std::move(c));
}

cplx Polynomial::eval(cplx x) const {
  cplx v = 0.0;
  for (size_t i = c.size(); i-- > 0;) v = v * x + c[i];
  return v;
}

Polynomial Polynomial::derivative() const {
  if (c.size() <= 1) return Polynomial();
  Vec d(c.size() - 1);
  for (size_t i = 1; i < c.size(); ++i) d[i - 1] = static_cast<double>(i) * c[i];
  return Polynomial(std::move(d));
}

Polynomial Polynomial::shifted_argument(cplx s) const {
  Vec d = c;
  const int deg = static_cast<int>(d.size()) - 1;
  for (int i = 0; i < deg; ++i)
    for (int j = deg - 1; j >= i; --j) d[j] += s * d[j + 1];
  return Polynomial(std::move(d));
}

double Polynomial::max_abs_coeff() const {
  double m = 0.0;
  for (cplx z : c) m = std::max(m, std::abs(z));
  return m;
}

Polynomial Polynomial::trimmed(double rel_tol) const {
  const double cut = rel_tol * max_abs_coeff();
  Vec d = c;
  while (!d.empty() && std::abs(d.back()) <= cut) d.pop_back();
  return Polynomial(std::move(d));
}

Vec Polynomial::roots() const {
  Polynomial p = *this;
  if (p.c.size() <= 1) return {};
  const int d = p.degree();
  Mat comp(d, d);
  const cplx lead = p.c.back();
  for (int i = 1; i < d; ++i) comp(i, i - 1) = 1.0;
  for (int i = 0; i < d; ++i) comp(i, d - 1) = -p.c[i] / lead;
  return eigen_decompose(comp).eigenvalues;
}

Polynomial operator+(const Polynomial& p, const Polynomial& q) {
  Vec c(std::max(p.c.size(), q.c.size()), 0.0);
  for (size_t i = 0; i < p.c.size(); ++i) c[i] += p.c[i];
  for (size_t i = 0; i < q.c.size(); ++i) c[i] += q.c[i];
  return Polynomial(std::move(c));
}

Polynomial operator-(const Polynomial& p, const Polynomial& q) {
  Vec c(std::max(p.c.size(), q.c.size()), 0.0);
  for (size_t i = 0; i < p.c.size(); ++i) c[i] += p.c[i];
  for (size_t i = 0; i < q.c.size(); ++i) c[i] -= q.c[i];
  return Polynomial(std::move(c));
}

Polynomial operator*(const Polynomial& p, const Polynomial& q) {
  if (p.is_zero() || q.is_zero()) return {};
  Vec c(p.c.size() + q.c.size() - 1, 0.0);
  for (size_t i = 0; i < p.c.size(); ++i)
    for (size_t j = 0; j < q.c.size(); ++j) c[i + j] += p.c[i] * q.c[j];
  return Polynomial(std::move(c));
}

Polynomial operator*(cplx s, const Polynomial& p) {
  Vec c = p.c;
  for (cplx& z : c) z *= s;
  return Polynomial(std::move(c));
}

Polynomial poly_from_samples(const Vec& nodes, const Vec& values, double node_tol) {
  if (nodes.size() != values.size() || nodes.empty())
    throw ConstructionError("poly_from_samples: node/value count mismatch");
  const size_t m = nodes.size();
  for (size_t i = 0; i < m; ++i)
    for (size_t j = i + 1; j < m; ++j)
      if (std::abs(nodes[i] - nodes[j]) <= node_tol)
        throw ConstructionError("poly_from_samples: coincident interpolation nodes");

  // Nodal polynomial, then per-node synthetic division gives the Lagrange
  // numerators; the barycentric weight is its value at the node.
  Polynomial nodal = Polynomial::from_roots(nodes);
  Vec acc(m, 0.0);
  Vec q(m, 0.0);
  for (size_t j = 0; j < m; ++j) {
    const cplx xj = nodes[j];
    q[m - 1] = nodal.c[m];
    for (size_t k = m - 1; k-- > 0;) q[k] = nodal.c[k + 1] + xj * q[k + 1];
    cplx denom = 0.0;  // q evaluated at xj
    for (size_t k = m; k-- > 0;) denom = denom * xj + q[k];
    const cplx w = values[j] / denom;
    for (size_t k = 0; k < m; ++k) acc[k] += w * q[k];
  }
  return Polynomial(std::move(acc));
}

}  // namespace sovlat
