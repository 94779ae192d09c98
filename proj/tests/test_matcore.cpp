#include <cmath>

#include "doctest.h"
#include "entsampler/error.hpp"
#include "entsampler/matcore.hpp"
#include "entsampler/qstates.hpp"
#include "test_util.hpp"

using namespace entsampler;
using entsampler::testing::max_abs;
using entsampler::testing::random_hermitian;
using entsampler::testing::random_matrix;
using entsampler::testing::random_psd;

TEST_CASE("eig_hermitian on diagonal and Pauli X") {
  Matrix d(2, 2);
  d << 1.0, 0.0, 0.0, 3.0;
  auto e = eig_hermitian(d);
  CHECK(e.values(0) == doctest::Approx(3.0));
  CHECK(e.values(1) == doctest::Approx(1.0));

  Matrix x(2, 2);
  x << 0.0, 1.0, 1.0, 0.0;
  e = eig_hermitian(x);
  CHECK(e.values(0) == doctest::Approx(1.0));
  CHECK(e.values(1) == doctest::Approx(-1.0));
  const double r = 1.0 / std::sqrt(2.0);
  CHECK(std::abs(std::abs(e.vectors(0, 0)) - r) < 1e-12);
  CHECK(std::abs(e.vectors(0, 0) - e.vectors(1, 0)) < 1e-12);
  CHECK(std::abs(e.vectors(0, 1) + e.vectors(1, 1)) < 1e-12);
}

TEST_CASE("eig_hermitian reconstructs random matrices up to dimension 256") {
  for (int n : {8, 64, 256}) {
    const Matrix m = random_hermitian(n, 42 + n);
    const auto e = eig_hermitian(m);
    const Matrix rec = e.vectors * e.values.cast<cplx>().asDiagonal() * e.vectors.adjoint();
    CHECK(max_abs(m - rec) <= 1e-10 * max_abs(m));
    CHECK(max_abs(e.vectors.adjoint() * e.vectors - Matrix::Identity(n, n)) <= 1e-10);
    for (int i = 1; i < n; ++i) CHECK(e.values(i - 1) >= e.values(i));
  }
}

TEST_CASE("eig_hermitian rejects non-Hermitian input") {
  Matrix m(2, 2);
  m << 0.0, 1.0, 0.0, 0.0;
  try {
    eig_hermitian(m);
    FAIL("expected NotHermitian");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NotHermitian);
  }
}

TEST_CASE("mat_pow_support") {
  const Matrix half = Matrix::Identity(2, 2) * 0.5;
  CHECK(max_abs(mat_pow_support(half, -0.25) - std::pow(2.0, 0.25) * Matrix::Identity(2, 2)) < 1e-12);

  Matrix p = Matrix::Zero(2, 2);
  p(0, 0) = 1.0;
  CHECK(max_abs(mat_pow_support(p, -0.5) - p) < 1e-12);

  // (M^{-1/4})^4 is the support pseudo-inverse of a rank-2 matrix.
  const Matrix m = random_psd(4, 2, 7);
  const Matrix q = mat_pow_support(m, -0.25);
  const Matrix q4 = q * q * q * q;
  const Matrix pinv = m.completeOrthogonalDecomposition().pseudoInverse();
  CHECK(max_abs(q4 - pinv) < 1e-9 * max_abs(pinv));
  // (M^p)^{1/p} reproduces M.
  CHECK(max_abs(mat_pow_support(mat_pow_support(m, 0.5), 2.0) - m) < 1e-9 * max_abs(m));

  Matrix neg = Matrix::Identity(2, 2);
  neg(1, 1) = -0.5;
  CHECK_THROWS_AS(mat_pow_support(neg, 0.5), Error);
}

TEST_CASE("tensor products") {
  CHECK(max_abs(tensor(Matrix::Identity(2, 2), Matrix::Identity(2, 2)) - Matrix::Identity(4, 4)) == 0.0);
  Matrix p0 = Matrix::Zero(2, 2), p1 = Matrix::Zero(2, 2);
  p0(0, 0) = 1.0;
  p1(1, 1) = 1.0;
  Matrix expect = Matrix::Zero(4, 4);
  expect(1, 1) = 1.0;
  CHECK(max_abs(tensor(p0, p1) - expect) == 0.0);

  const Matrix a = random_matrix(3, 3, 1), b = random_matrix(3, 3, 2);
  CHECK(std::abs(tensor(a, b).trace() - a.trace() * b.trace()) < 1e-12);
  const Matrix c = random_matrix(3, 3, 3), d = random_matrix(3, 3, 4);
  CHECK(max_abs(tensor(a, b) * tensor(c, d) - tensor(a * c, b * d)) < 1e-12);
}

TEST_CASE("partial trace") {
  const Matrix ra = random_psd(2, 2, 11), rb = random_psd(3, 3, 12);
  const Matrix prod = tensor(ra, rb);
  CHECK(max_abs(partial_trace(prod, {2, 3}, {0}) - ra * rb.trace()) < 1e-12);

  const auto phi = max_entangled(2, 1, true);
  CHECK(max_abs(partial_trace(phi.matrix, phi.dims, {0}) - 0.5 * Matrix::Identity(2, 2)) < 1e-15);

  const auto rho = random_state({2, 2, 2}, 8, 5);
  const Matrix kept = partial_trace(rho.matrix, rho.dims, {0, 1});
  CHECK(std::abs(kept.trace().real() - 1.0) < 1e-12);

  // Tracing {1} then {2} equals tracing {1, 2}.
  const Matrix step = partial_trace(rho.matrix, rho.dims, {0, 2});
  const Matrix twice = partial_trace(step, {2, 2}, {0});
  CHECK(max_abs(twice - partial_trace(rho.matrix, rho.dims, {0})) < 1e-14);

  // Kept subsystems come out in the listed order.
  const Matrix swapped = partial_trace(prod, {2, 3}, {1, 0});
  CHECK(max_abs(swapped - tensor(rb, ra)) < 1e-12);
}

TEST_CASE("swap and transpose tricks on the maximally entangled vector") {
  const Matrix x = random_matrix(4, 4, 21), y = random_matrix(4, 4, 22);
  const auto phi = max_entangled(4, 1, false);
  const cplx lhs = (x * y).trace();
  const cplx rhs = (tensor(x, y.transpose()) * phi.matrix).trace();
  CHECK(std::abs(lhs - rhs) < 1e-10);

  const Vector v = max_entangled_vector(4, 1, false);
  const Vector left = tensor(x, Matrix::Identity(4, 4)) * v;
  const Vector right = tensor(Matrix::Identity(4, 4), x.transpose()) * v;
  CHECK((left - right).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("fidelity") {
  const auto rho = random_state({3}, 3, 9);
  CHECK(fidelity(rho.matrix, rho.matrix) == doctest::Approx(1.0).epsilon(1e-10));
  Matrix p0 = Matrix::Zero(2, 2), p1 = Matrix::Zero(2, 2);
  p0(0, 0) = 1.0;
  p1(1, 1) = 1.0;
  CHECK(std::abs(fidelity(p0, p1)) < 1e-12);
  CHECK(fidelity(p0, Matrix::Identity(2, 2) * 0.5) == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-12));
  const auto sigma = random_state({3}, 2, 10);
  CHECK(std::abs(fidelity(rho.matrix, sigma.matrix) - fidelity(sigma.matrix, rho.matrix)) < 1e-9);
}
