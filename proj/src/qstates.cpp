#include "entsampler/qstates.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "entsampler/error.hpp"
#include "entsampler/rng.hpp"

namespace entsampler {

void validate(const DensityOperator& rho, double tol) {
  const std::int64_t n = total_dim(rho.dims);
  if (rho.matrix.rows() != n || rho.matrix.cols() != n) {
    throw Error(ErrorCode::DimMismatch, "matrix size " + std::to_string(rho.matrix.rows()) +
                                            " does not match dims product " + std::to_string(n));
  }
  const EigenDecomposition e = eig_hermitian(rho.matrix, 1e-10);
  const double lmax = std::max(0.0, e.values(0));
  const double lmin = e.values(e.values.size() - 1);
  if (lmin < -tol * std::max(1.0, lmax)) {
    throw Error(ErrorCode::NegativeEigenvalue,
                "state has eigenvalue " + std::to_string(lmin));
  }
  if (rho.normalized && std::abs(rho.trace() - 1.0) > tol) {
    throw Error(ErrorCode::InvalidArgument,
                "normalized state has trace " + std::to_string(rho.trace()));
  }
}

int PauliString::weight() const {
  int w = 0;
  for (int s : symbols) w += (s != 0);
  return w;
}

int PauliString::offdiagonal_weight() const {
  int w = 0;
  for (int s : symbols) w += (s >= d);
  return w;
}

std::int64_t PauliString::index() const {
  std::int64_t idx = 0;
  for (int s : symbols) {
    if (s < 0 || s >= d * d) throw Error(ErrorCode::IndexOutOfRange, "Pauli symbol out of range");
    idx = idx * d * d + s;
  }
  return idx;
}

PauliString PauliString::from_index(int d, int n, std::int64_t index) {
  PauliString p{d, std::vector<int>(n, 0)};
  for (int i = n; i-- > 0;) {
    p.symbols[i] = static_cast<int>(index % (d * d));
    index /= d * d;
  }
  if (index != 0) throw Error(ErrorCode::IndexOutOfRange, "Pauli index out of range");
  return p;
}

std::int64_t pauli_count(int d, int n) {
  std::int64_t c = 1;
  for (int i = 0; i < n; ++i) c *= static_cast<std::int64_t>(d) * d;
  return c;
}

Vector max_entangled_vector(int d, int n, bool normalized) {
  if (d < 2 || n < 1) throw Error(ErrorCode::InvalidArgument, "max_entangled needs d >= 2, n >= 1");
  std::int64_t dn = 1;
  for (int i = 0; i < n; ++i) dn *= d;
  Vector v = Vector::Zero(dn * dn);
  const double amp = normalized ? std::pow(static_cast<double>(dn), -0.5) : 1.0;
  for (std::int64_t a = 0; a < dn; ++a) v(a * dn + a) = amp;
  return v;
}

DensityOperator max_entangled(int d, int n, bool normalized) {
  const Vector v = max_entangled_vector(d, n, normalized);
  return {v * v.adjoint(), Dims(2 * n, d), normalized};
}

Matrix weyl(int d, int s) {
  if (d < 2 || s < 0 || s >= d * d) {
    throw Error(ErrorCode::IndexOutOfRange, "Weyl index " + std::to_string(s) + " for d=" + std::to_string(d));
  }
  const int a = s / d;
  const int b = s % d;
  Matrix w = Matrix::Zero(d, d);
  for (int x = 0; x < d; ++x) {
    const double phase = 2.0 * std::numbers::pi * static_cast<double>(x * b % d) / d;
    w((x + a) % d, x) = std::polar(1.0, phase);
  }
  return w;
}

Matrix weyl(const PauliString& s) {
  Matrix out = Matrix::Ones(1, 1);
  for (int sym : s.symbols) out = tensor(out, weyl(s.d, sym));
  return out;
}

Matrix phi_s(const PauliString& s) {
  const Matrix w = weyl(s);
  const std::int64_t dn = w.rows();
  // (W ⊗ I)|Φ⟩ = Σ_a W|a⟩ ⊗ |a⟩, so its amplitude at (x, a) is W(x, a).
  Vector v(dn * dn);
  for (std::int64_t x = 0; x < dn; ++x) {
    for (std::int64_t a = 0; a < dn; ++a) v(x * dn + a) = w(x, a);
  }
  return v * v.adjoint();
}

int bell_label_from_index(int s) {
  static constexpr int table[4] = {0, 3, 1, 2};
  if (s < 0 || s > 3) throw Error(ErrorCode::IndexOutOfRange, "qubit Weyl index");
  return table[s];
}

int bell_index_from_label(int label) {
  static constexpr int table[4] = {0, 2, 3, 1};
  if (label < 0 || label > 3) throw Error(ErrorCode::IndexOutOfRange, "Bell label");
  return table[label];
}

bool is_prime(int d) {
  if (d < 2) return false;
  for (int p = 2; p * p <= d; ++p) {
    if (d % p == 0) return false;
  }
  return true;
}

MubFamily mub_bases(int d) {
  if (!is_prime(d)) throw Error(ErrorCode::NotPrime, "MUB construction needs prime d, got " + std::to_string(d));
  MubFamily family{d, {}};
  family.unitaries.push_back(Matrix::Identity(d, d));
  const double norm = 1.0 / std::sqrt(static_cast<double>(d));
  if (d == 2) {
    Matrix h(2, 2), y(2, 2);
    h << norm, norm, norm, -norm;
    // Rows ⟨e| for e = (|0⟩ ± i|1⟩)/√2.
    y << cplx(norm, 0), cplx(0, -norm), cplx(norm, 0), cplx(0, norm);
    family.unitaries.push_back(h);
    family.unitaries.push_back(y);
    return family;
  }
  // Quadratic-phase bases over the prime field: e_{a,b}(x) = ω^{a x² + b x}/√d.
  for (int a = 0; a < d; ++a) {
    Matrix u(d, d);
    for (int b = 0; b < d; ++b) {
      for (int x = 0; x < d; ++x) {
        const int e = (a * x % d * x + b * x) % d;
        u(b, x) = std::conj(std::polar(norm, 2.0 * std::numbers::pi * e / d));
      }
    }
    family.unitaries.push_back(u);
  }
  return family;
}

double two_design_residual(const MubFamily& family) {
  const int d = family.d;
  Matrix sum = Matrix::Zero(d * d, d * d);
  for (const Matrix& u : family.unitaries) {
    for (int x = 0; x < d; ++x) {
      const Vector e = u.row(x).adjoint();
      const Matrix p = e * e.adjoint();
      sum += tensor(p, p);
    }
  }
  Matrix target = Matrix::Identity(d * d, d * d);
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < d; ++j) target(i * d + j, j * d + i) += 1.0;
  }
  return (sum - target).cwiseAbs().maxCoeff();
}

namespace {

Matrix gaussian_matrix(std::int64_t rows, std::int64_t cols, Rng& rng) {
  Matrix g(rows, cols);
  for (std::int64_t j = 0; j < cols; ++j) {
    for (std::int64_t i = 0; i < rows; ++i) {
      const double re = rng.normal();
      const double im = rng.normal();
      g(i, j) = cplx(re, im);
    }
  }
  return g;
}

}  // namespace

DensityOperator random_state(const Dims& dims, int rank, std::uint64_t seed) {
  const std::int64_t n = total_dim(dims);
  if (rank < 1 || rank > n) throw Error(ErrorCode::InvalidArgument, "rank out of range");
  Rng rng = Rng(seed).split("random_state");
  const Matrix g = gaussian_matrix(n, rank, rng);
  Matrix rho = g * g.adjoint();
  rho /= rho.trace().real();
  return {(rho + rho.adjoint()) * 0.5, dims, true};
}

Matrix random_unitary(int dim, std::uint64_t seed) {
  Rng rng = Rng(seed).split("random_unitary");
  const Matrix g = gaussian_matrix(dim, dim, rng);
  Eigen::HouseholderQR<Matrix> qr(g);
  Matrix q = qr.householderQ() * Matrix::Identity(dim, dim);
  const Matrix r = qr.matrixQR();
  for (int i = 0; i < dim; ++i) {
    const cplx rii = r(i, i);
    const double mag = std::abs(rii);
    if (mag > 0) q.col(i) *= rii / mag;
  }
  return q;
}

DensityOperator BellDiagonalState::to_density() const {
  std::int64_t dn = 1;
  for (int i = 0; i < n; ++i) dn *= d;
  Matrix rho = Matrix::Zero(dn * dn, dn * dn);
  for (std::size_t idx = 0; idx < probs.size(); ++idx) {
    if (probs[idx] == 0.0) continue;
    rho += (probs[idx] / static_cast<double>(dn)) * phi_s(PauliString::from_index(d, n, idx));
  }
  return {rho, Dims(2 * n, d), true};
}

double BellDiagonalState::h2() const {
  double sq = 0.0;
  for (double p : probs) sq += p * p;
  return -std::log2(std::pow(static_cast<double>(d), n) * sq);
}

std::int64_t binomial(int n, int k) {
  if (k < 0 || k > n) return 0;
  std::int64_t r = 1;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

BellDiagonalState corrupted_epr_bell(int n, int d, int w) {
  if (w < 0 || w > n) throw Error(ErrorCode::InvalidArgument, "weight out of range");
  BellDiagonalState st{d, n, std::vector<double>(static_cast<std::size_t>(pauli_count(d, n)), 0.0)};
  const double count = static_cast<double>(binomial(n, w)) * std::pow(static_cast<double>(d * d - 1), w);
  for (std::size_t idx = 0; idx < st.probs.size(); ++idx) {
    if (PauliString::from_index(d, n, idx).weight() == w) st.probs[idx] = 1.0 / count;
  }
  return st;
}

DensityOperator corrupted_epr(int n, int d, int w) {
  return corrupted_epr_bell(n, d, w).to_density();
}

DensityOperator fixed_weight_classical(int n, int d, int w) {
  if (w < 0 || w > n) throw Error(ErrorCode::InvalidArgument, "weight out of range");
  const Dims dims(n, d);
  const std::int64_t dn = total_dim(dims);
  const double count = static_cast<double>(binomial(n, w)) * std::pow(static_cast<double>(d - 1), w);
  Matrix rho = Matrix::Zero(dn, dn);
  for (std::int64_t x = 0; x < dn; ++x) {
    int weight = 0;
    for (std::int64_t r = x; r > 0; r /= d) weight += (r % d != 0);
    if (weight == w) rho(x, x) = 1.0 / count;
  }
  return {rho, dims, true};
}

DensityOperator cq_state(const std::vector<double>& probs,
                         const std::vector<DensityOperator>& conditionals) {
  if (probs.empty() || probs.size() != conditionals.size()) {
    throw Error(ErrorCode::DimMismatch, "probabilities and conditionals differ in count");
  }
  double total = 0.0;
  for (double p : probs) {
    if (p < 0.0) throw Error(ErrorCode::InvalidArgument, "negative probability");
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-10) throw Error(ErrorCode::InvalidArgument, "probabilities do not sum to 1");
  const Dims& edims = conditionals.front().dims;
  const std::int64_t de = total_dim(edims);
  const auto nx = static_cast<std::int64_t>(probs.size());
  Matrix rho = Matrix::Zero(nx * de, nx * de);
  for (std::int64_t x = 0; x < nx; ++x) {
    const auto& c = conditionals[x];
    if (c.dims != edims) throw Error(ErrorCode::DimMismatch, "conditional states differ in dims");
    rho.block(x * de, x * de, de, de) = probs[x] * c.matrix;
  }
  Dims dims{static_cast<int>(nx)};
  dims.insert(dims.end(), edims.begin(), edims.end());
  return {rho, dims, true};
}

}  // namespace entsampler
