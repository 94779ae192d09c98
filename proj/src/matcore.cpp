#include "entsampler/matcore.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "entsampler/error.hpp"

namespace entsampler {

std::int64_t total_dim(const Dims& dims) {
  std::int64_t n = 1;
  for (int d : dims) {
    if (d < 1) throw Error(ErrorCode::DimMismatch, "subsystem dimension " + std::to_string(d));
    n *= d;
  }
  return n;
}

double log2_safe(double x) {
  if (x <= 0.0) return -std::numeric_limits<double>::infinity();
  return std::log2(x);
}

double hermiticity_error(const Matrix& m) {
  if (m.rows() != m.cols()) return std::numeric_limits<double>::infinity();
  return (m - m.adjoint()).cwiseAbs().maxCoeff();
}

Matrix hermitize(const Matrix& m, double tol) {
  if (m.rows() != m.cols()) {
    throw Error(ErrorCode::DimMismatch, "matrix is not square");
  }
  if (m.size() == 0) return m;
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  const double err = hermiticity_error(m);
  if (!(err <= tol * scale)) {
    throw Error(ErrorCode::NotHermitian, "max |M - M^dag| = " + std::to_string(err));
  }
  return (m + m.adjoint()) * 0.5;
}

EigenDecomposition eig_hermitian(const Matrix& m, double tol) {
  const Matrix h = hermitize(m, tol);
  Eigen::SelfAdjointEigenSolver<Matrix> solver(h);
  if (solver.info() != Eigen::Success) {
    throw Error(ErrorCode::NoConvergence, "Hermitian eigensolver did not converge");
  }
  const auto n = h.rows();
  EigenDecomposition out{RealVector(n), Matrix(n, n)};
  for (Eigen::Index i = 0; i < n; ++i) {
    out.values(i) = solver.eigenvalues()(n - 1 - i);
    out.vectors.col(i) = solver.eigenvectors().col(n - 1 - i);
  }
  return out;
}

namespace {

// Applies f to the support eigenvalues; the rest map to zero.
template <class F>
Matrix spectral_support(const Matrix& m, double cutoff, F f) {
  if (m.size() == 0) return m;
  const EigenDecomposition e = eig_hermitian(m);
  const double lmax = e.values(0);
  const auto n = m.rows();
  if (lmax <= 0.0) {
    if (lmax < 0.0) throw Error(ErrorCode::NegativeEigenvalue, "matrix is negative definite");
    return Matrix::Zero(n, n);
  }
  const double lmin = e.values(n - 1);
  if (lmin < -cutoff * lmax) {
    throw Error(ErrorCode::NegativeEigenvalue,
                "eigenvalue " + std::to_string(lmin) + " below -cutoff*lambda_max");
  }
  const double threshold = cutoff * lmax;
  Eigen::Index rank = 0;
  while (rank < n && e.values(rank) > threshold) ++rank;
  const Matrix v = e.vectors.leftCols(rank);
  RealVector w(rank);
  for (Eigen::Index i = 0; i < rank; ++i) w(i) = f(e.values(i));
  Matrix out = v * w.cast<cplx>().asDiagonal() * v.adjoint();
  return (out + out.adjoint()) * 0.5;
}

}  // namespace

Matrix mat_pow_support(const Matrix& m, double p, double cutoff) {
  return spectral_support(m, cutoff, [p](double x) { return std::pow(x, p); });
}

Matrix support_projector(const Matrix& m, double cutoff) {
  return spectral_support(m, cutoff, [](double) { return 1.0; });
}

Matrix tensor(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

Matrix tensor(const std::vector<Matrix>& factors) {
  Matrix out = Matrix::Ones(1, 1);
  for (const auto& f : factors) out = tensor(out, f);
  return out;
}

namespace {

void check_perm(const Dims& dims, const std::vector<int>& perm) {
  std::vector<int> sorted = perm;
  std::sort(sorted.begin(), sorted.end());
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    if (sorted[i] != static_cast<int>(i)) {
      throw Error(ErrorCode::IndexOutOfRange, "invalid subsystem permutation");
    }
  }
  if (perm.size() != dims.size()) {
    throw Error(ErrorCode::DimMismatch, "permutation length differs from subsystem count");
  }
}

// old_index[new] for a subsystem permutation.
std::vector<std::int64_t> permutation_table(const Dims& dims, const std::vector<int>& perm) {
  check_perm(dims, perm);
  const std::size_t k = dims.size();
  std::vector<std::int64_t> old_stride(k);
  std::int64_t s = 1;
  for (std::size_t i = k; i-- > 0;) {
    old_stride[i] = s;
    s *= dims[i];
  }
  const std::int64_t n = s;
  std::vector<std::int64_t> table(static_cast<std::size_t>(n));
  std::vector<int> digits(k, 0);
  for (std::int64_t idx = 0; idx < n; ++idx) {
    std::int64_t old = 0;
    for (std::size_t j = 0; j < k; ++j) old += digits[j] * old_stride[perm[j]];
    table[static_cast<std::size_t>(idx)] = old;
    for (std::size_t j = k; j-- > 0;) {
      if (++digits[j] < dims[perm[j]]) break;
      digits[j] = 0;
    }
  }
  return table;
}

bool is_identity(const std::vector<int>& perm) {
  for (std::size_t i = 0; i < perm.size(); ++i) {
    if (perm[i] != static_cast<int>(i)) return false;
  }
  return true;
}

}  // namespace

Matrix permute_subsystems(const Matrix& m, const Dims& dims, const std::vector<int>& perm) {
  const std::int64_t n = total_dim(dims);
  if (m.rows() != n || m.cols() != n) {
    throw Error(ErrorCode::DimMismatch, "matrix size does not match subsystem dims");
  }
  if (is_identity(perm)) {
    check_perm(dims, perm);
    return m;
  }
  const auto t = permutation_table(dims, perm);
  Matrix out(n, n);
  for (std::int64_t j = 0; j < n; ++j) {
    for (std::int64_t i = 0; i < n; ++i) out(i, j) = m(t[i], t[j]);
  }
  return out;
}

Vector permute_subsystems(const Vector& v, const Dims& dims, const std::vector<int>& perm) {
  const std::int64_t n = total_dim(dims);
  if (v.size() != n) throw Error(ErrorCode::DimMismatch, "vector size does not match subsystem dims");
  const auto t = permutation_table(dims, perm);
  Vector out(n);
  for (std::int64_t i = 0; i < n; ++i) out(i) = v(t[i]);
  return out;
}

Matrix partial_trace(const Matrix& m, const Dims& dims, const std::vector<int>& keep) {
  const std::int64_t n = total_dim(dims);
  if (m.rows() != n || m.cols() != n) {
    throw Error(ErrorCode::DimMismatch, "matrix size does not match subsystem dims");
  }
  std::vector<bool> kept(dims.size(), false);
  std::vector<int> perm;
  std::int64_t dk = 1;
  for (int k : keep) {
    if (k < 0 || k >= static_cast<int>(dims.size()) || kept[k]) {
      throw Error(ErrorCode::IndexOutOfRange, "invalid subsystem index in keep set");
    }
    kept[k] = true;
    perm.push_back(k);
    dk *= dims[k];
  }
  for (int i = 0; i < static_cast<int>(dims.size()); ++i) {
    if (!kept[i]) perm.push_back(i);
  }
  const Matrix p = permute_subsystems(m, dims, perm);
  const std::int64_t dt = n / dk;
  Matrix out = Matrix::Zero(dk, dk);
  for (std::int64_t t = 0; t < dt; ++t) {
    out += Eigen::Map<const Matrix, 0, Eigen::Stride<Eigen::Dynamic, Eigen::Dynamic>>(
        p.data() + t + t * n, dk, dk, Eigen::Stride<Eigen::Dynamic, Eigen::Dynamic>(dt * n, dt));
  }
  return out;
}

double trace_square(const Matrix& m) { return m.squaredNorm(); }

namespace {

Matrix psd_sqrt(const Matrix& m) {
  const EigenDecomposition e = eig_hermitian(m, 1e-9);
  const double lmax = std::max(0.0, e.values(0));
  const double lmin = e.values(e.values.size() - 1);
  if (lmin < -1e-9 * std::max(1.0, lmax)) {
    throw Error(ErrorCode::NegativeEigenvalue, "fidelity argument is not PSD");
  }
  // Roundoff-level eigenvalues are zeroed so their square roots do not leak in.
  RealVector w = e.values;
  for (Eigen::Index i = 0; i < w.size(); ++i) w(i) = w(i) > 1e-13 * lmax ? std::sqrt(w(i)) : 0.0;
  return e.vectors * w.cast<cplx>().asDiagonal() * e.vectors.adjoint();
}

}  // namespace

double fidelity(const Matrix& rho, const Matrix& sigma) {
  if (rho.rows() != sigma.rows() || rho.cols() != sigma.cols()) {
    throw Error(ErrorCode::DimMismatch, "fidelity arguments differ in size");
  }
  // F = ‖√ρ √σ‖_1, the sum of singular values.
  const Matrix prod = psd_sqrt(rho) * psd_sqrt(sigma);
  Eigen::JacobiSVD<Matrix> svd(prod);
  return svd.singularValues().sum();
}

double min_eigenvalue(const Matrix& m) {
  const EigenDecomposition e = eig_hermitian(m, 1e-9);
  return e.values(e.values.size() - 1);
}

double max_eigenvalue(const Matrix& m) { return eig_hermitian(m, 1e-9).values(0); }

}  // namespace entsampler
