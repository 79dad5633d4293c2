#include "sovlat/tensor.hpp"

#include <algorithm>
#include <numeric>

namespace sovlat {

DenseOperator tensor_product(const DenseOperator& A, const DenseOperator& B, int max_dim) {
  const long total = static_cast<long>(A.space.total_dim) * B.space.total_dim;
  if (total > max_dim)
    throw ConstructionError("tensor_product: instance too large, dim " + std::to_string(total) +
                            " exceeds cap " + std::to_string(max_dim));
  std::vector<int> dims = A.space.factor_dims;
  dims.insert(dims.end(), B.space.factor_dims.begin(), B.space.factor_dims.end());
  return DenseOperator(TensorSpace(std::move(dims)), kron(A.mat, B.mat));
}

int permutation_sign(const std::vector<int>& perm) {
  int inversions = 0;
  for (size_t i = 0; i < perm.size(); ++i)
    for (size_t j = i + 1; j < perm.size(); ++j)
      if (perm[i] > perm[j]) ++inversions;
  return inversions % 2 == 0 ? 1 : -1;
}

DenseOperator permutation_operator(const TensorSpace& space, const std::vector<int>& perm) {
  const int m = space.factors();
  if (static_cast<int>(perm.size()) != m)
    throw ConstructionError("permutation_operator: permutation length mismatch");
  for (int d : space.factor_dims)
    if (d != space.factor_dims[0])
      throw ConstructionError("permutation_operator: invalid space, unequal factor dimensions");
  std::vector<int> seen(m, 0);
  for (int p : perm) {
    if (p < 0 || p >= m || seen[p]++) throw ConstructionError("permutation_operator: not a permutation");
  }

  const FactorLayout L = space.layout();
  Mat P(space.total_dim, space.total_dim);
  std::vector<int> digits(m);
  for (long col = 0; col < L.total; ++col) {
    for (int f = 0; f < m; ++f) digits[f] = L.digit(col, f);
    long row = 0;
    for (int f = 0; f < m; ++f) row += static_cast<long>(digits[perm[f]]) * L.strides[f];
    P(static_cast<int>(row), static_cast<int>(col)) = 1.0;
  }
  return DenseOperator(space, std::move(P));
}

DenseOperator antisymmetrizer(int m, int n) {
  if (m < 1 || m > n)
    throw ConstructionError("antisymmetrizer: order out of range, need 1 <= m <= n");
  const TensorSpace space = TensorSpace::uniform(m, n);
  Mat acc(space.total_dim, space.total_dim);
  std::vector<int> perm(m);
  std::iota(perm.begin(), perm.end(), 0);
  double count = 0.0;
  do {
    const double sgn = permutation_sign(perm);
    const Mat P = permutation_operator(space, perm).mat;
    for (size_t i = 0; i < acc.a.size(); ++i) acc.a[i] += sgn * P.a[i];
    count += 1.0;
  } while (std::next_permutation(perm.begin(), perm.end()));
  for (cplx& z : acc.a) z /= count;
  return DenseOperator(space, std::move(acc));
}

DenseOperator partial_trace(const DenseOperator& A, const std::vector<int>& keep) {
  const int nf = A.space.factors();
  if (keep.empty())
    throw ConstructionError("partial_trace: empty keep set, use trace() for the full trace");
  std::vector<int> k = keep;
  std::sort(k.begin(), k.end());
  if (std::unique(k.begin(), k.end()) != k.end())
    throw ConstructionError("partial_trace: duplicate factor index");
  for (int f : k)
    if (f < 0 || f >= nf) throw ConstructionError("partial_trace: factor index out of range");

  std::vector<int> traced;
  for (int f = 0; f < nf; ++f)
    if (!std::binary_search(k.begin(), k.end(), f)) traced.push_back(f);

  const FactorLayout L = A.space.layout();
  std::vector<int> kept_dims;
  for (int f : k) kept_dims.push_back(A.space.factor_dims[f]);
  if (traced.empty()) return A;

  long dk = 1, dt = 1;
  for (int f : k) dk *= A.space.factor_dims[f];
  for (int f : traced) dt *= A.space.factor_dims[f];

  // Enumerate kept and traced sub-indices, composing full composite indices
  // through the original strides.
  auto offset_of = [&](const std::vector<int>& factors, long sub) {
    long off = 0;
    for (size_t p = factors.size(); p-- > 0;) {
      const int f = factors[p];
      off += (sub % A.space.factor_dims[f]) * L.strides[f];
      sub /= A.space.factor_dims[f];
    }
    return off;
  };

  std::vector<long> kept_offsets(dk), traced_offsets(dt);
  for (long s = 0; s < dk; ++s) kept_offsets[s] = offset_of(k, s);
  for (long s = 0; s < dt; ++s) traced_offsets[s] = offset_of(traced, s);

  Mat R(static_cast<int>(dk), static_cast<int>(dk));
  for (long i = 0; i < dk; ++i)
    for (long j = 0; j < dk; ++j) {
      cplx s = 0.0;
      for (long t = 0; t < dt; ++t)
        s += A.mat(static_cast<int>(kept_offsets[i] + traced_offsets[t]),
                   static_cast<int>(kept_offsets[j] + traced_offsets[t]));
      R(static_cast<int>(i), static_cast<int>(j)) = s;
    }
  return DenseOperator(TensorSpace(std::move(kept_dims)), std::move(R));
}

cplx trace(const Mat& A) {
  cplx s = 0.0;
  for (int i = 0; i < std::min(A.rows, A.cols); ++i) s += A(i, i);
  return s;
}

DenseOperator embed(const TensorSpace& space, const Mat& gate, const std::vector<int>& factors) {
  long gdim = 1;
  for (int f : factors) {
    if (f < 0 || f >= space.factors()) throw ConstructionError("embed: factor index out of range");
    gdim *= space.factor_dims[f];
  }
  if (gate.rows != gdim || gate.cols != gdim)
    throw ConstructionError("embed: gate dimension does not match listed factors");

  const FactorLayout L = space.layout();
  Mat X(space.total_dim, space.total_dim);
  for (long r = 0; r < L.total; ++r) {
    long gr = 0;
    for (int f : factors) gr = gr * space.factor_dims[f] + L.digit(r, f);
    long base = r;
    for (int f : factors) base -= static_cast<long>(L.digit(r, f)) * L.strides[f];
    for (long gc = 0; gc < gdim; ++gc) {
      long c = base, rem = gc;
      for (size_t p = factors.size(); p-- > 0;) {
        const int f = factors[p];
        c += (rem % space.factor_dims[f]) * L.strides[f];
        rem /= space.factor_dims[f];
      }
      X(static_cast<int>(r), static_cast<int>(c)) = gate(static_cast<int>(gr), static_cast<int>(gc));
    }
  }
  return DenseOperator(space, std::move(X));
}

}  // namespace sovlat
