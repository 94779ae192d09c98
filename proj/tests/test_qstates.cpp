#include <cmath>
#include <numbers>

#include "doctest.h"
#include "entsampler/entropy.hpp"
#include "entsampler/error.hpp"
#include "entsampler/qstates.hpp"
#include "test_util.hpp"

using namespace entsampler;
using entsampler::testing::max_abs;

namespace {

Matrix bell_projector(int label) {
  // Eqs. for the qubit Bell basis, unnormalized (norm² 2).
  Vector v = Vector::Zero(4);
  switch (label) {
    case 0: v << 1, 0, 0, 1; break;
    case 1: v << 0, 1, 1, 0; break;
    case 2: v << 0, 1, -1, 0; break;
    case 3: v << 1, 0, 0, -1; break;
  }
  return v * v.adjoint();
}

}  // namespace

TEST_CASE("max_entangled") {
  const Vector v = max_entangled_vector(2, 1, false);
  CHECK(v(0) == cplx(1.0));
  CHECK(v(1) == cplx(0.0));
  CHECK(v(2) == cplx(0.0));
  CHECK(v(3) == cplx(1.0));
  CHECK(std::abs(max_entangled_vector(3, 1, true).norm() - 1.0) < 1e-12);
  CHECK(std::abs(max_entangled_vector(2, 3, false).squaredNorm() - 8.0) < 1e-12);
  CHECK(max_abs(max_entangled(2, 1, false).matrix - bell_projector(0)) == 0.0);
}

TEST_CASE("weyl operators, diagonal first") {
  Matrix z(2, 2), x(2, 2);
  z << 1, 0, 0, -1;
  x << 0, 1, 1, 0;
  CHECK(max_abs(weyl(2, 0) - Matrix::Identity(2, 2)) < 1e-15);
  CHECK(max_abs(weyl(2, 1) - z) < 1e-15);
  CHECK(max_abs(weyl(2, 2) - x) < 1e-15);
  CHECK(max_abs(weyl(2, 3) - x * z) < 1e-15);
  for (int s = 0; s < 4; ++s) {
    for (int t = 0; t < 4; ++t) {
      const cplx ip = (weyl(2, s).adjoint() * weyl(2, t)).trace();
      CHECK(std::abs(ip - cplx(s == t ? 2.0 : 0.0)) < 1e-14);
    }
  }
  // d=3, s=4: |x⟩ -> e^{2πix/3}|x+1⟩.
  const Matrix w = weyl(3, 4);
  for (int col = 0; col < 3; ++col) {
    for (int row = 0; row < 3; ++row) {
      const cplx expect = row == (col + 1) % 3 ? std::polar(1.0, 2 * std::numbers::pi * col / 3) : 0.0;
      CHECK(std::abs(w(row, col) - expect) < 1e-14);
    }
  }
  CHECK_THROWS_AS(weyl(2, 4), Error);
}

TEST_CASE("weyl commutation up to phase") {
  for (int d : {2, 3, 5}) {
    for (int s = 0; s < d * d; ++s) {
      for (int t = 0; t < d * d; ++t) {
        const int a = (s / d + t / d) % d, b = (s % d + t % d) % d;
        const Matrix prod = weyl(d, s) * weyl(d, t);
        const Matrix target = weyl(d, a * d + b);
        const cplx phase = (target.adjoint() * prod).trace() / static_cast<double>(d);
        CHECK(std::abs(std::abs(phase) - 1.0) < 1e-12);
        CHECK(max_abs(prod - phase * target) < 1e-12);
      }
    }
  }
}

TEST_CASE("phi_s reproduces the qubit Bell basis through the label remap") {
  for (int s = 0; s < 4; ++s) {
    const Matrix p = phi_s(PauliString{2, {s}});
    CHECK(max_abs(p - bell_projector(bell_label_from_index(s))) < 1e-14);
    CHECK(bell_index_from_label(bell_label_from_index(s)) == s);
  }
  // Singlet from XZ.
  CHECK(bell_label_from_index(3) == 2);
}

TEST_CASE("phi_s completeness and orthogonality") {
  for (int d : {2, 3}) {
    for (int n : {1, 2, 3}) {
      if (d == 3 && n == 3) continue;  // 729² operators would be slow; covered by d=3, n<=2
      const std::int64_t count = pauli_count(d, n);
      const std::int64_t dn = static_cast<std::int64_t>(std::pow(d, n));
      Matrix sum = Matrix::Zero(dn * dn, dn * dn);
      std::vector<Vector> vecs;
      for (std::int64_t i = 0; i < count; ++i) {
        const Matrix p = phi_s(PauliString::from_index(d, n, i));
        sum += p;
      }
      CHECK(max_abs(sum - static_cast<double>(dn) * Matrix::Identity(dn * dn, dn * dn)) < 1e-10);
      // tr[Φ_s Φ_t] = d^{2n} δ_st on a sample of pairs.
      for (std::int64_t i = 0; i < std::min<std::int64_t>(count, 9); ++i) {
        for (std::int64_t j = 0; j < std::min<std::int64_t>(count, 9); ++j) {
          const double ip = (phi_s(PauliString::from_index(d, n, i)) * phi_s(PauliString::from_index(d, n, j)))
                                .trace()
                                .real();
          CHECK(std::abs(ip - (i == j ? static_cast<double>(dn * dn) : 0.0)) < 1e-9);
        }
      }
    }
  }
  const Matrix p = phi_s(PauliString{2, {1, 0}});
  CHECK((p * p).trace().real() == doctest::Approx(16.0));
}

TEST_CASE("pauli strings") {
  const PauliString s{3, {0, 4, 2, 7}};
  CHECK(s.weight() == 3);
  CHECK(s.offdiagonal_weight() == 2);
  const auto back = PauliString::from_index(3, 4, s.index());
  CHECK(back.symbols == s.symbols);
}

TEST_CASE("mutually unbiased bases") {
  for (int d : {2, 3, 5, 7}) {
    const MubFamily f = mub_bases(d);
    CHECK(static_cast<int>(f.unitaries.size()) == d + 1);
    for (const auto& u : f.unitaries) CHECK(max_abs(u * u.adjoint() - Matrix::Identity(d, d)) < 1e-10);
    for (std::size_t a = 0; a < f.unitaries.size(); ++a) {
      for (std::size_t b = a + 1; b < f.unitaries.size(); ++b) {
        const Matrix overlaps = f.unitaries[a] * f.unitaries[b].adjoint();
        CHECK((overlaps.cwiseAbs().array() - 1.0 / std::sqrt(d)).abs().maxCoeff() < 1e-9);
      }
    }
    CHECK(two_design_residual(f) <= 1e-9);
  }
  // Qubit bases are the Z, X and Y eigenbases.
  const MubFamily q = mub_bases(2);
  Matrix y(2, 2);
  y << 0, cplx(0, -1), cplx(0, 1), 0;
  for (int x = 0; x < 2; ++x) {
    const Vector e = q.unitaries[2].row(x).adjoint();
    const Vector ye = y * e;
    CHECK(std::abs(std::abs(e.dot(ye)) - 1.0) < 1e-12);
  }
  CHECK_THROWS_AS(mub_bases(4), Error);
  try {
    mub_bases(6);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NotPrime);
  }
}

TEST_CASE("random states") {
  const auto pure = random_state({2, 2}, 1, 3);
  CHECK((pure.matrix * pure.matrix).trace().real() == doctest::Approx(1.0).epsilon(1e-10));
  const auto mixed = random_state({2, 2}, 4, 3);
  CHECK((mixed.matrix * mixed.matrix).trace().real() < 1.0);
  CHECK(mixed.trace() == doctest::Approx(1.0).epsilon(1e-12));
  const auto again = random_state({2, 2}, 4, 3);
  CHECK((mixed.matrix - again.matrix).cwiseAbs().maxCoeff() == 0.0);
  validate(mixed);
  const Matrix u = random_unitary(5, 1);
  CHECK(max_abs(u.adjoint() * u - Matrix::Identity(5, 5)) < 1e-12);
}

TEST_CASE("corrupted EPR states") {
  const auto w0 = corrupted_epr(2, 2, 0);
  const auto phi = max_entangled(2, 2, true);
  CHECK(max_abs(w0.matrix - phi.matrix) < 1e-14);
  CHECK(h2_cond(w0, {{0, 1}, {2, 3}}).value == doctest::Approx(-2.0).epsilon(1e-12));

  const auto w1 = corrupted_epr(2, 2, 1);
  CHECK(w1.trace() == doctest::Approx(1.0));
  CHECK(h2_cond(w1, {{0, 1}, {2, 3}}).value == doctest::Approx(std::log2(6.0 / 4.0)).epsilon(1e-12));

  // n=1, w=1: equal mixture of the three non-identity Bell states.
  const auto single = corrupted_epr(1, 2, 1);
  Matrix expect = Matrix::Zero(4, 4);
  for (int label = 1; label < 4; ++label) expect += bell_projector(label) / 6.0;
  CHECK(max_abs(single.matrix - expect) < 1e-14);

  for (int d : {2, 3}) {
    for (int n = 1; n <= 3; ++n) {
      if (d == 3 && n == 3) continue;
      for (int w = 0; w <= n; ++w) {
        const auto st = corrupted_epr_bell(n, d, w);
        const double closed =
            -std::log2(std::pow(d, n) / (binomial(n, w) * std::pow(d * d - 1.0, w)));
        CHECK(st.h2() == doctest::Approx(closed).epsilon(1e-12));
        std::vector<int> a(n), b(n);
        for (int i = 0; i < n; ++i) {
          a[i] = i;
          b[i] = n + i;
        }
        CHECK(h2_cond(st.to_density(), {a, b}).value == doctest::Approx(closed).epsilon(1e-9));
      }
    }
  }
}

TEST_CASE("fixed weight classical states") {
  CHECK(h2_cond(fixed_weight_classical(3, 2, 0), {{0, 1, 2}, {}}).value == doctest::Approx(0.0));
  const auto w1 = fixed_weight_classical(3, 2, 1);
  CHECK(std::abs(w1.matrix(4, 4).real() - 1.0 / 3) < 1e-15);  // |100⟩
  CHECK(std::abs(w1.matrix(2, 2).real() - 1.0 / 3) < 1e-15);  // |010⟩
  CHECK(std::abs(w1.matrix(1, 1).real() - 1.0 / 3) < 1e-15);  // |001⟩
  CHECK(h2_cond(w1, {{0, 1, 2}, {}}).value == doctest::Approx(std::log2(3.0)));
  CHECK(h2_cond(fixed_weight_classical(4, 3, 2), {{0, 1, 2, 3}, {}}).value ==
        doctest::Approx(std::log2(24.0)));
}

TEST_CASE("cq states") {
  DensityOperator e0{Matrix::Zero(2, 2), {2}, true};
  e0.matrix(0, 0) = 1.0;
  DensityOperator e1{Matrix::Zero(2, 2), {2}, true};
  e1.matrix(1, 1) = 1.0;
  const auto single = cq_state({1.0}, {e1});
  CHECK(single.dims == Dims{1, 2});
  CHECK(max_abs(single.matrix - e1.matrix) == 0.0);
  const auto corr = cq_state({0.5, 0.5}, {e0, e1});
  CHECK(std::abs(h2_cond(corr, {{0}, {1}}).value) < 1e-12);
  DensityOperator mixed{Matrix::Identity(2, 2) * 0.5, {2}, true};
  const auto indep = cq_state({0.5, 0.5}, {mixed, mixed});
  CHECK(h2_cond(indep, {{0}, {1}}).value == doctest::Approx(1.0));
  CHECK_THROWS_AS(cq_state({0.5, 0.5}, {e0, DensityOperator{Matrix::Identity(3, 3) / 3.0, {3}, true}}), Error);
}
