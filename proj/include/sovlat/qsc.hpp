#ifndef SOVLAT_QSC_HPP
#define SOVLAT_QSC_HPP

#include "sovlat/spectrum.hpp"

namespace sovlat {

// Coefficients of the order-n difference equation built from one twist
// eigenvalue alpha_bar = k_i.
struct QscCoefficients {
  int i_index = 0;  // index into the twist block list
  cplx alpha_bar{0.0};
  Polynomial a;                    // prod_a (lambda + eta - xi_a)
  std::vector<Polynomial> alpha;   // alpha[0] = -1, alpha[1..n]
  double char_residual = 0.0;      // characteristic relation at alpha_bar
};
QscCoefficients qsc_coefficients(const ModelContext& ctx, int i_index);

struct PhiPolynomial {
  Polynomial phi;  // monic after degree trimming
  Vec roots;
  int degree = 0;
  double ratio_residual = 0.0;  // re-verified discrete ratio conditions
};

// The linear system determining phi values on the interpolation nodes.
struct CramerSystem {
  Mat C;
  std::vector<Mat> C_replaced;
  cplx det_C{0.0};
  cplx xi_extra{0.0};
  Vec phi_values;          // phi(xi_1..xi_N), with phi(xi_extra) = 1
  double cramer_vs_lu = 0.0;  // max disagreement of the two solution routes
};

std::pair<PhiPolynomial, CramerSystem> build_phi(const ModelContext& ctx, const Polynomial& t1,
                                                 const QscCoefficients& coeffs);

// Rank-one update matrix of the one-determinant representation, and its
// companion variant (internal cross-checks of the determinant identities).
Mat delta_matrix(const ModelContext& ctx, cplx lambda, cplx xi_extra);
Mat delta_bar_matrix(const ModelContext& ctx, cplx lambda, cplx xi_extra);

// Max relative residual of the functional equation over the probe grid:
// all xi_a + k eta for k in [-1, n-1], the probe point, three seeded points.
double qsc_residual(const ModelContext& ctx, const EigenPolys& polys, const PhiPolynomial& phi,
                    const QscCoefficients& coeffs);
Vec qsc_probe_grid(const ModelContext& ctx);

// Q-operator family for a diagonalizable simple-spectrum twist, assembled in
// the transfer eigenbasis; evaluation is a diagonal polynomial per
// eigenvector.
struct QOperatorBuilder {
  int i_index = 0;
  cplx alpha_bar{0.0};
  cplx xi_extra{0.0};
  Mat V, V_inv;                     // transfer eigenbasis
  std::vector<Polynomial> phi_ops;  // per eigenvector, normalized to 1 at xi_extra
  Vec det_C;                        // per-eigenvector system determinant

  Mat at(cplx u) const;
};
QOperatorBuilder q_operator_builder(const ModelContext& ctx, const TransferFamily& fam,
                                    int i_index);
Mat q_operator(const ModelContext& ctx, const TransferFamily& fam, int i_index, cplx u);

// Direct determinant evaluation over the commuting operator entries,
// feasible at small N; cross-checks the eigenbasis construction. xi_extra
// must match the node the compared builder settled on.
Mat q_operator_leibniz(const ModelContext& ctx, const TransferFamily& fam, int i_index, cplx u,
                       cplx xi_extra);

double operator_tq_residual(const ModelContext& ctx, const TransferFamily& fam,
                            const QOperatorBuilder& qb, cplx u);

// Common eigenvector from the leading twist eigenvalue direction, and its
// transfer eigenvalue tower.
struct ReferenceState {
  Vec vector;
  EigenPolys polys;
  double eigen_residual = 0.0;
};
ReferenceState reference_eigenvector(const ModelContext& ctx);

// Product of the separating operators over the phi roots applied to the
// reference state; the Bethe-ansatz form of an eigenvector.
Vec aba_vector(const ModelContext& ctx, const SovBasis& basis, const Vec& phi_roots,
               const Vec& reference);

}  // namespace sovlat

#endif
