#ifndef SOVLAT_SPECTRUM_HPP
#define SOVLAT_SPECTRUM_HPP

#include "sovlat/sov.hpp"

namespace sovlat {

// Degree-N polynomial with t1(xi_a) = x_a and leading coefficient tr K.
Polynomial t1_from_x(const ModelContext& ctx, const Vec& x);

// The full tower t_0 = 1, t_1, ..., t_n built from the x values by the
// interpolation recursion; t_n is the closed-form quantum determinant.
struct EigenPolys {
  std::vector<Polynomial> t;  // size n + 1
};
EigenPolys fused_values(const ModelContext& ctx, const Vec& x);

// Residuals of the discrete system, x_a t_{n-1}(xi_a - eta) - qdet(xi_a),
// each normalized by |qdet(xi_a)|.
Vec system_residual(const ModelContext& ctx, const Vec& x);
double system_residual_norm(const ModelContext& ctx, const Vec& x);

// Scalar recursion evaluator with all x-independent interpolation data
// precomputed; this is the hot path of the Newton solvers.
class SystemEvaluator {
 public:
  explicit SystemEvaluator(const ModelContext& ctx);
  Vec raw(const Vec& x) const;        // unnormalized residual map
  Vec residual(const Vec& x) const;   // normalized
  double residual_norm(const Vec& x) const;
  Mat jacobian(const Vec& x) const;   // central differences of raw()
  int size() const { return N_; }
  double scale(int a) const { return scale_[a]; }

 private:
  int n_, N_;
  cplx trK_;
  Vec qdet_;                           // qdet(xi_a)
  std::vector<double> scale_;          // |qdet(xi_a)|
  Vec t1_const_;                       // trK * nodal(xi_a - eta)
  std::vector<Vec> t1_weights_;        // g_b^{(1)}(xi_a - eta)
  std::vector<Vec> pref_, asym_term_;  // per recursion order, per point
  std::vector<std::vector<Vec>> g_;    // g_[m][a][b] at xi_a - eta
};

// Brute-force diagonalization of T1 at a fixed generic probe point; the
// independent oracle everything else is checked against.
struct OracleEigenpair {
  cplx probe_value;
  int multiplicity = 1;  // algebraic, from clustering
  Vec eigenvector;
  Vec x;                 // Rayleigh values at the xi grid
};
struct Oracle {
  cplx probe{0.0};
  Mat t1_probe;
  bool defective = false;  // eigenvector matrix numerically rank deficient
  std::vector<OracleEigenpair> pairs;  // one per eigenvalue cluster
};
Oracle brute_force_spectrum(const ModelContext& ctx, const TransferFamily& fam);

enum class SolveMode { kOracleSeeded, kMultistartNewton };

struct SystemSolution {
  Vec x;
  double residual = 0.0;  // max normalized residual
  bool jacobian_singular = false;
  double last_newton_drop = 0.0;  // residual contraction of the final step
};

// Oracle-seeded mode polishes the oracle x-tuples; multistart mode runs
// damped Newton from random starts and never consults the oracle.
std::vector<SystemSolution> solve_system(const ModelContext& ctx, const TransferFamily& fam,
                                         SolveMode mode, const Oracle* oracle = nullptr,
                                         int starts_per_state = 64, int max_rounds = 10);

struct SpectrumSolution {
  Vec x;
  EigenPolys polys;
  Vec eigenvector;   // standard basis, largest component fixed to 1
  Vec wavefunction;  // SoV components prod_a x_a^{h_a}
  double residual_system = 0.0;
  double residual_eigen = 0.0;
  double oracle_overlap = -1.0;  // -1 when no oracle supplied
};

// Reconstruct the eigenvector from a solution tuple; throws RejectSolution
// when the reconstructed vector fails the eigen residual test (the converse
// direction of the spectrum characterization).
SpectrumSolution sov_eigenvector(const ModelContext& ctx, const TransferFamily& fam,
                                 const SovBasis& basis, const Vec& x,
                                 const Oracle* oracle = nullptr);

struct SimplicityReport {
  int solution_count = 0;
  double min_pair_distance = 0.0;
  bool expected_count = false;        // count == n^N (diagonalizable simple twist)
  int eigenvector_rank = 0;           // rank of the stacked SoV eigenvectors
  std::vector<int> geometric_multiplicities;
  bool oracle_tuples_covered = false; // every oracle tuple matched by a solution
};
SimplicityReport simplicity_report(const ModelContext& ctx, const TransferFamily& fam,
                                   const std::vector<SystemSolution>& sols, const Oracle& oracle);

}  // namespace sovlat

#endif
