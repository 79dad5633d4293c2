#ifndef SOVLAT_LINALG_HPP
#define SOVLAT_LINALG_HPP

#include "sovlat/types.hpp"

namespace sovlat {

// General complex (non-Hermitian) eigen-decomposition. Eigenvalues are
// sorted lexicographically by (re, im) and the right-eigenvector columns are
// permuted along. For a defective matrix the vector matrix is rank
// deficient; callers that assume diagonalizability must check.
struct EigenDecomposition {
  Vec eigenvalues;
  Mat right_vectors;  // column j belongs to eigenvalues[j], unit 2-norm
};
EigenDecomposition eigen_decompose(const Mat& A);

// LU factorization (partial pivoting) kept in LAPACK's column-major form.
class LuFactor {
 public:
  explicit LuFactor(const Mat& A);
  Vec solve(const Vec& b) const;
  Mat solve(const Mat& B) const;  // solves A X = B columnwise
  cplx det() const;
  Mat inverse() const;
  double rcond() const;  // 1-norm reciprocal condition estimate
  int dim() const { return n_; }

 private:
  int n_;
  Vec lu_;                 // column-major
  std::vector<int> ipiv_;
  double anorm1_;
  bool singular_ = false;
};

Vec solve(const Mat& A, const Vec& b);
Mat solve(const Mat& A, const Mat& B);
Mat inverse(const Mat& A);
cplx determinant(const Mat& A);

struct Svd {
  std::vector<double> s;  // descending
  Mat u;                  // present when vectors requested
  Mat vh;                 // conjugate-transposed right vectors
};
std::vector<double> singular_values(const Mat& A);
Svd svd(const Mat& A);

// Numerical rank against a relative threshold on the largest singular value.
int numerical_rank(const Mat& A, double rel_tol = 1e-10);

}  // namespace sovlat

#endif
