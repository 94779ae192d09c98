#pragma once

#include <complex>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>

namespace entsampler {

using cplx = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;

// Subsystem dimensions of a composite system, most significant first.
using Dims = std::vector<int>;

inline constexpr double kSupportCutoff = 1e-10;
inline constexpr double kHermitianTol = 1e-12;

std::int64_t total_dim(const Dims& dims);

double log2_safe(double x);

// Largest entrywise deviation from Hermiticity.
double hermiticity_error(const Matrix& m);

// (M + M†)/2 when M is Hermitian within tol (relative to its largest entry),
// NotHermitian otherwise.
Matrix hermitize(const Matrix& m, double tol = kHermitianTol);

struct EigenDecomposition {
  RealVector values;  // descending
  Matrix vectors;     // columns are eigenvectors
};

EigenDecomposition eig_hermitian(const Matrix& m, double tol = kHermitianTol);

// M^p on the support of a PSD matrix: eigenvalues at or below cutoff·λ_max
// are treated as zero, so negative powers act as pseudo-inverses.
Matrix mat_pow_support(const Matrix& m, double p, double cutoff = kSupportCutoff);

// Orthogonal projector onto the support of a PSD matrix.
Matrix support_projector(const Matrix& m, double cutoff = kSupportCutoff);

Matrix tensor(const Matrix& a, const Matrix& b);
Matrix tensor(const std::vector<Matrix>& factors);

// Reorders subsystems: subsystem j of the result is subsystem perm[j] of m.
Matrix permute_subsystems(const Matrix& m, const Dims& dims, const std::vector<int>& perm);
Vector permute_subsystems(const Vector& v, const Dims& dims, const std::vector<int>& perm);

// Keeps the listed subsystems (in the listed order) and traces out the rest.
Matrix partial_trace(const Matrix& m, const Dims& dims, const std::vector<int>& keep);

// Trace of the square of a Hermitian matrix, i.e. its squared Frobenius norm.
double trace_square(const Matrix& m);

// Uhlmann fidelity tr sqrt(sqrt(ρ) σ sqrt(ρ)).
double fidelity(const Matrix& rho, const Matrix& sigma);

double min_eigenvalue(const Matrix& m);
double max_eigenvalue(const Matrix& m);

}  // namespace entsampler
