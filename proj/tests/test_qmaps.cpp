#include <cmath>
#include <numeric>

#include "doctest.h"
#include "entsampler/entropy.hpp"
#include "entsampler/error.hpp"
#include "entsampler/qmaps.hpp"
#include "test_util.hpp"

using namespace entsampler;
using entsampler::testing::max_abs;
using entsampler::testing::random_matrix;

namespace {

KrausMap identity_map(int d) { return KrausMap::plain({d}, {d}, {Matrix::Identity(d, d)}); }

KrausMap random_channel(int din, int dout, int nk, std::uint64_t seed) {
  // Columns of a random isometry din -> dout·nk, cut into Kraus blocks.
  const Matrix u = random_unitary(dout * nk, seed).leftCols(din);
  std::vector<Matrix> ops;
  for (int k = 0; k < nk; ++k) ops.push_back(u.middleRows(k * dout, dout));
  return KrausMap::plain({din}, {dout}, ops);
}

void check_tables_match(const LambdaTable& a, const LambdaTable& b, double tol) {
  const auto fa = a.to_full(), fb = b.to_full();
  REQUIRE(fa.values.size() == fb.values.size());
  for (std::size_t i = 0; i < fa.values.size(); ++i) CHECK(std::abs(fa.values[i] - fb.values[i]) < tol);
}

std::vector<int> iota_vec(int n, int start = 0) {
  std::vector<int> v(n);
  std::iota(v.begin(), v.end(), start);
  return v;
}

}  // namespace

TEST_CASE("apply basics") {
  const auto rho = random_state({2, 3}, 6, 1);
  const auto same = apply(identity_map(2), rho, {0});
  CHECK(max_abs(same.matrix - rho.matrix) < 1e-14);

  std::vector<Matrix> ops;
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) {
      Matrix k = Matrix::Zero(2, 2);
      k(i, j) = 1.0 / std::sqrt(2.0);
      ops.push_back(k);
    }
  }
  const KrausMap dep = KrausMap::plain({2}, {2}, ops);
  const auto q = random_state({2}, 2, 2);
  CHECK(max_abs(apply_to(dep, q.matrix) - Matrix::Identity(2, 2) * 0.5) < 1e-14);
  CHECK(dep.trace_scale().value() == doctest::Approx(1.0));

  // Acting on the second subsystem leaves the first untouched.
  const auto r2 = apply(dep, rho, {0});
  CHECK(max_abs(r2.matrix - tensor(Matrix::Identity(2, 2) * 0.5, partial_trace(rho.matrix, rho.dims, {1}))) <
        1e-14);
  const auto rho3 = random_state({3, 2, 2}, 4, 3);
  const auto r3 = apply(dep, rho3, {2});
  CHECK(r3.dims == Dims{3, 2, 2});
  CHECK(max_abs(r3.matrix - tensor(partial_trace(rho3.matrix, rho3.dims, {0, 1}), Matrix::Identity(2, 2) * 0.5)) <
        1e-14);
}

TEST_CASE("apply matches explicit Kraus operators, including labels and permutations") {
  const KrausMap m = sampling_map(3, 2, 2);
  const auto rho = random_state({2, 2, 2, 3}, 5, 9);
  const auto out = apply(m, rho, {0, 1, 2});
  CHECK(out.dims == Dims{4, 3, 3});
  Matrix expect = Matrix::Zero(36, 36);
  for (const auto& k : m.kraus_ops()) {
    const Matrix kk = tensor(k, Matrix::Identity(3, 3));
    expect += kk * rho.matrix * kk.adjoint();
  }
  CHECK(max_abs(out.matrix - expect) < 1e-13);

  // Acting on a non-leading, unordered subsystem list.
  const auto rho4 = random_state({3, 2, 2}, 6, 10);
  const KrausMap u = KrausMap::plain({2, 2}, {2, 2}, {random_unitary(4, 3)});
  const auto lhs = apply(u, rho4, {2, 1});
  const Matrix perm = permute_subsystems(rho4.matrix, rho4.dims, {0, 2, 1});
  const Matrix big = tensor(Matrix::Identity(3, 3), u.kraus_ops().front());
  CHECK(lhs.dims == Dims{3, 2, 2});
  // Output occupies the first acted position (1), so its subsystems are (u_out0, u_out1) at (1, 2).
  CHECK(max_abs(lhs.matrix - big * perm * big.adjoint()) < 1e-13);
}

TEST_CASE("product maps apply sitewise like their flattened form") {
  const KrausMap m = bb84_map(2);
  const auto rho = random_state({2, 2, 2}, 8, 12);
  const auto a = apply(m, rho, {0, 1});
  const KrausMap flat(m.flattened());
  const auto b = apply(flat, rho, {0, 1});
  CHECK(a.dims == b.dims);
  CHECK(a.dims == Dims{2, 2, 2, 2, 2});
  CHECK(max_abs(a.matrix - b.matrix) < 1e-14);
}

TEST_CASE("BB84 map output on the maximally entangled state is classical") {
  const auto phi = max_entangled(2, 1, true);
  const auto out = apply(bb84_map(1), phi, {0});
  CHECK(out.dims == Dims{2, 2, 2});  // X, Θ, Ā
  // Every (x,θ) block with the idle half: ½·½·|x_θ⟩⟨x_θ|^T.
  const Matrix xtheta = partial_trace(out.matrix, out.dims, {0, 1});
  CHECK(max_abs(xtheta - Matrix::Identity(4, 4) * 0.25) < 1e-14);
}

TEST_CASE("adjoint and compose") {
  const Matrix u = random_unitary(3, 5);
  const KrausMap conj = KrausMap::plain({3}, {3}, {u});
  const KrausMap inv = KrausMap::plain({3}, {3}, {u.adjoint()});
  const Matrix x = random_matrix(3, 3, 6);
  CHECK(max_abs(apply_to(adjoint(conj), x) - apply_to(inv, x)) < 1e-13);

  const KrausMap f = random_channel(3, 2, 3, 7);
  const Matrix y = random_matrix(2, 2, 8);
  const cplx lhs = (apply_to(f, x).adjoint() * y).trace();
  const cplx rhs = (x.adjoint() * apply_to(adjoint(f), y)).trace();
  CHECK(std::abs(lhs - rhs) < 1e-10);
  CHECK(max_abs(apply_to(adjoint(adjoint(f)), x) - apply_to(f, x)) < 1e-12);

  const KrausMap g = random_channel(2, 3, 2, 9);
  CHECK(max_abs(apply_to(compose(g, f), x) - apply_to(g, apply_to(f, x))) < 1e-12);
  CHECK_THROWS_AS(compose(f, f), Error);

  // Adjoint of a labeled map pairs with the assembled output.
  const KrausMap s = sampling_map(2, 1, 2);
  const Matrix z = random_matrix(4, 4, 10);
  const Matrix w = random_matrix(4, 4, 11);
  const cplx l2 = (apply_to(s, z).adjoint() * w).trace();
  const cplx r2 = (z.adjoint() * apply_to(adjoint(s), w)).trace();
  CHECK(std::abs(l2 - r2) < 1e-10);
}

TEST_CASE("lambda coefficients: BB84 and MUB single site") {
  const LambdaTable t = lambda_coefficients(bb84_map(1), 2, 1);
  const double expect[4] = {0.25, 0.125, 0.0, 0.125};
  for (int label = 0; label < 4; ++label) {
    CHECK(std::abs(t.at(bell_index_from_label(label)) - expect[label]) < 1e-12);
  }
  CHECK(t.residual < 1e-12);

  const LambdaTable m = lambda_coefficients(mub_map(1, 2), 2, 1);
  CHECK(std::abs(m.at(0) - 1.0 / 6) < 1e-12);
  for (int s = 1; s < 4; ++s) CHECK(std::abs(m.at(s) - 1.0 / 18) < 1e-12);

  const LambdaTable id = lambda_coefficients(identity_map(3), 3, 1);
  CHECK(std::abs(id.at(0) - 1.0) < 1e-12);
  for (int s = 1; s < 9; ++s) CHECK(std::abs(id.at(s)) < 1e-12);
}

TEST_CASE("lambda coefficients match the closed forms") {
  CHECK(std::abs(sampling_lambda_table(2, 1, 2).values[0] - 0.25) < 1e-15);
  CHECK(std::abs(sampling_lambda_table(2, 1, 2).values[1] - 0.125) < 1e-15);
  CHECK(sampling_lambda_table(2, 1, 2).values[2] == 0.0);
  for (int d : {2, 3}) {
    for (int n = 1; n <= (d == 2 ? 4 : 2); ++n) {
      for (int k = 1; k <= n; ++k) {
        check_tables_match(lambda_coefficients(sampling_map(n, k, d), d, n), sampling_lambda_table(n, k, d), 1e-12);
        check_tables_match(lambda_coefficients(cq_sampling_map(n, k, d), d, n), cq_sampling_lambda_table(n, k, d),
                           1e-12);
      }
    }
  }
  // cq, n=1, k=1, d=2: 1/2 on the diagonal symbols, 0 elsewhere.
  const LambdaTable cq = lambda_coefficients(cq_sampling_map(1, 1, 2), 2, 1);
  CHECK(std::abs(cq.at(0) - 0.5) < 1e-12);
  CHECK(std::abs(cq.at(1) - 0.5) < 1e-12);
  CHECK(std::abs(cq.at(2)) < 1e-12);
  CHECK(std::abs(cq.at(3)) < 1e-12);
  // k = n: only the identity class survives.
  const LambdaTable full = sampling_lambda_table(3, 3, 2);
  CHECK(full.values[0] == doctest::Approx(1.0));
  for (int w = 1; w <= 3; ++w) CHECK(full.values[w] == 0.0);

  for (int n = 1; n <= 3; ++n) check_tables_match(lambda_coefficients(bb84_map(n), 2, n), bb84_lambda_table(n), 1e-12);
  for (int d : {2, 3}) {
    for (int n = 1; n <= 2; ++n) check_tables_match(lambda_coefficients(mub_map(n, d), d, n), mub_lambda_table(n, d), 1e-12);
  }
  // BB84 n=2: λ_{|s|=ℓ} = 2^{-ℓ}/16 with multiplicity 3^ℓ C(2,ℓ) over {0,1,3}-strings.
  const LambdaTable b2 = lambda_coefficients(bb84_map(2), 2, 2);
  int counts[3] = {0, 0, 0};
  for (std::int64_t i = 0; i < 16; ++i) {
    const auto s = PauliString::from_index(2, 2, i);
    if (b2.at(i) > 1e-12) {
      CHECK(b2.at(i) == doctest::Approx(std::pow(2.0, -s.weight()) / 16));
      ++counts[s.weight()];
    }
  }
  CHECK(counts[0] == 1);
  CHECK(counts[1] == 4);
  CHECK(counts[2] == 4);
}

TEST_CASE("lambda extraction rejects maps outside the hypothesis") {
  // Amplitude damping is not diagonal in the Φ_s basis.
  Matrix k0 = Matrix::Zero(2, 2), k1 = Matrix::Zero(2, 2);
  k0(0, 0) = 1.0;
  k0(1, 1) = std::sqrt(0.5);
  k1(0, 1) = std::sqrt(0.5);
  try {
    lambda_coefficients(KrausMap::plain({2}, {2}, {k0, k1}), 2, 1);
    FAIL("expected NotDiagonalInPhiBasis");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NotDiagonalInPhiBasis);
  }
}

TEST_CASE("sampling maps") {
  const KrausMap m = sampling_map(4, 2, 2);
  CHECK(m.out_dims() == Dims{4});
  CHECK(m.label_dims() == Dims{6});
  CHECK(m.trace_scale().value() == doctest::Approx(1.0));
  CHECK(subsets(4, 2).size() == 6);
  CHECK(subsets(4, 2).front() == std::vector<int>{0, 1});
  CHECK(subsets(4, 2).back() == std::vector<int>{2, 3});

  // Applying then conditioning on ρ_E reproduces the subset average / C(n,k).
  const auto rho = random_state({2, 2, 2, 2, 2}, 6, 44);
  const auto blocks = apply_blocks(m, rho.matrix, rho.dims, {0, 1, 2, 3});
  const Matrix rho_e = partial_trace(rho.matrix, rho.dims, {4});
  const Matrix x = mat_pow_support(rho_e, -0.25);
  double mass = 0.0;
  for (const auto& b : blocks.blocks) mass += sandwiched_collision_mass(b, 4, 2, x);
  double avg = 0.0;
  for (const auto& s : subsets(4, 2)) {
    std::vector<int> a = s;
    avg += std::exp2(-h2_cond(rho, {a, {4}}).value);
  }
  avg /= 6.0;
  CHECK(6.0 * mass == doctest::Approx(avg).epsilon(1e-12));

  const KrausMap one = sampling_map(1, 1, 3);
  const auto r1 = random_state({3}, 3, 4);
  CHECK(max_abs(apply_to(one, r1.matrix) - r1.matrix) < 1e-14);

  // Measured output is diagonal on X_S.
  const auto cq = apply(cq_sampling_map(3, 2, 2), random_state({2, 2, 2}, 8, 5), {0, 1, 2});
  const Matrix xs = partial_trace(cq.matrix, cq.dims, {0});
  CHECK(max_abs(xs - Matrix(xs.diagonal().asDiagonal())) < 1e-14);
}

TEST_CASE("theorem 1 bound evaluator") {
  const LambdaTable t = bb84_lambda_table(1);
  const double h2 = 0.3;
  const double sum = std::accumulate(t.values.begin(), t.values.end(), 0.0);
  CHECK(theorem1_bound(t, [](const PauliString&) { return true; }, h2) == doctest::Approx(sum * std::exp2(-h2)));
  CHECK(theorem1_bound(t, [](const PauliString&) { return false; }, h2) == doctest::Approx(0.25 * 2));

  // BB84 n=1 on Φ^N: bound 1 with S+ = all, measured value 1/2.
  const auto phi = max_entangled(2, 1, true);
  CHECK(theorem1_bound_threshold(t, 2, -1.0) == doctest::Approx(1.0));
  const auto blocks = apply_blocks(bb84_map(1), phi.matrix, phi.dims, {0});
  const Matrix x = mat_pow_support(partial_trace(phi.matrix, phi.dims, {1}), -0.25);
  double mass = 0.0;
  for (const auto& b : blocks.blocks) mass += sandwiched_collision_mass(b, 2, 2, x);
  CHECK(mass == doctest::Approx(0.5));

  // Multiplicity counting agrees with enumeration.
  for (int n = 1; n <= 4; ++n) {
    for (int d : {2, 3}) {
      if (d == 3 && n > 3) continue;
      for (int l0 = 0; l0 <= n + 1; ++l0) {
        const auto s = sampling_lambda_table(n, 1, d);
        const auto c = cq_sampling_lambda_table(n, 1, d);
        const auto m = mub_lambda_table(n, d);
        for (const auto* tab : {&s, &c, &m}) {
          const double fast = theorem1_bound_threshold(*tab, l0, 0.7);
          const double slow = theorem1_bound(tab->to_full(), [l0](const PauliString& p) { return p.weight() < l0; }, 0.7);
          CHECK(fast == doctest::Approx(slow).epsilon(1e-12));
        }
      }
    }
  }
}
