#include "entsampler/qmaps.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "entsampler/error.hpp"

namespace entsampler {

namespace {

Dims concat(const Dims& a, const Dims& b) {
  Dims out = a;
  out.insert(out.end(), b.begin(), b.end());
  return out;
}

void check_family(const KrausFamily& f) {
  const std::int64_t labels = f.label_count();
  if (static_cast<std::int64_t>(f.branches.size()) != labels) {
    throw Error(ErrorCode::DimMismatch, "branch count " + std::to_string(f.branches.size()) +
                                            " differs from label count " + std::to_string(labels));
  }
  const std::int64_t din = f.in_dim();
  const std::int64_t dout = f.out_dim();
  for (const auto& branch : f.branches) {
    for (const auto& k : branch) {
      if (k.rows() != dout || k.cols() != din) {
        throw Error(ErrorCode::DimMismatch, "Kraus operator shape does not match family dims");
      }
    }
  }
}

using Strided = Eigen::Stride<Eigen::Dynamic, Eigen::Dynamic>;

// (K ⊗ I_r)·m, where the rows of m are indexed (input, rest).
Matrix left_kron(const Matrix& k, const Matrix& m, std::int64_t dr) {
  const std::int64_t din = k.cols();
  const std::int64_t dout = k.rows();
  const std::int64_t c = m.cols();
  Matrix out(dout * dr, c);
  for (std::int64_t r = 0; r < dr; ++r) {
    Eigen::Map<const Matrix, 0, Strided> in(m.data() + r, din, c, Strided(m.rows(), dr));
    Eigen::Map<Matrix, 0, Strided> o(out.data() + r, dout, c, Strided(out.rows(), dr));
    o.noalias() = k * in;
  }
  return out;
}

// Σ_i (K_i ⊗ I) x (K_i ⊗ I)† for x ordered (input, rest).
Matrix conjugate_sum(const std::vector<Matrix>& kraus, const Matrix& x, std::int64_t din, std::int64_t dout,
                     std::int64_t dr) {
  Matrix acc = Matrix::Zero(dout * dr, dout * dr);
  for (const auto& k : kraus) {
    const Matrix t = left_kron(k, x, dr);
    const Matrix ta = t.adjoint();
    acc += left_kron(k, ta, dr).adjoint();
  }
  (void)din;
  return acc;
}

}  // namespace

KrausMap::KrausMap(KrausFamily family) {
  check_family(family);
  factors_.push_back(std::move(family));
}

KrausMap KrausMap::plain(Dims in_dims, Dims out_dims, std::vector<Matrix> kraus) {
  return KrausMap(KrausFamily{std::move(in_dims), std::move(out_dims), {}, {std::move(kraus)}});
}

KrausMap KrausMap::product(std::vector<KrausFamily> factors) {
  KrausMap m;
  for (auto& f : factors) {
    check_family(f);
    m.factors_.push_back(std::move(f));
  }
  return m;
}

Dims KrausMap::in_dims() const {
  Dims d;
  for (const auto& f : factors_) d = concat(d, f.in_dims);
  return d;
}

Dims KrausMap::out_dims() const {
  Dims d;
  for (const auto& f : factors_) d = concat(d, f.out_dims);
  return d;
}

Dims KrausMap::label_dims() const {
  Dims d;
  for (const auto& f : factors_) d = concat(d, f.label_dims);
  return d;
}

KrausFamily KrausMap::flattened() const {
  if (factors_.size() == 1) return factors_.front();
  KrausFamily out{in_dims(), out_dims(), label_dims(), {}};
  out.branches.push_back({Matrix::Ones(1, 1)});
  for (const auto& f : factors_) {
    std::vector<std::vector<Matrix>> next;
    next.reserve(out.branches.size() * f.branches.size());
    for (const auto& acc : out.branches) {
      for (const auto& branch : f.branches) {
        std::vector<Matrix> ops;
        ops.reserve(acc.size() * branch.size());
        for (const auto& a : acc) {
          for (const auto& k : branch) ops.push_back(entsampler::tensor(a, k));
        }
        next.push_back(std::move(ops));
      }
    }
    out.branches = std::move(next);
  }
  return out;
}

std::vector<Matrix> KrausMap::kraus_ops() const {
  const KrausFamily f = flattened();
  const std::int64_t labels = f.label_count();
  std::vector<Matrix> ops;
  for (std::int64_t c = 0; c < labels; ++c) {
    Matrix e = Matrix::Zero(labels, 1);
    e(c, 0) = 1.0;
    for (const auto& k : f.branches[c]) ops.push_back(entsampler::tensor(k, e));
  }
  return ops;
}

std::optional<double> KrausMap::trace_scale(double tol) const {
  double mu = 1.0;
  for (const auto& f : factors_) {
    const std::int64_t din = f.in_dim();
    Matrix s = Matrix::Zero(din, din);
    for (const auto& branch : f.branches) {
      for (const auto& k : branch) s += k.adjoint() * k;
    }
    const double m = s.trace().real() / static_cast<double>(din);
    if ((s - m * Matrix::Identity(din, din)).cwiseAbs().maxCoeff() > tol) return std::nullopt;
    mu *= m;
  }
  return mu;
}

KrausMap adjoint(const KrausMap& map) {
  std::vector<Matrix> ops;
  for (const auto& k : map.kraus_ops()) ops.push_back(k.adjoint());
  return KrausMap::plain(concat(map.out_dims(), map.label_dims()), map.in_dims(), std::move(ops));
}

KrausMap compose(const KrausMap& f, const KrausMap& g) {
  const Dims mid = concat(g.out_dims(), g.label_dims());
  if (total_dim(mid) != f.in_dim()) throw Error(ErrorCode::DimMismatch, "compose: dimensions do not chain");
  const auto fk = f.kraus_ops();
  const auto gk = g.kraus_ops();
  std::vector<Matrix> ops;
  ops.reserve(fk.size() * gk.size());
  for (const auto& a : fk) {
    for (const auto& b : gk) ops.push_back(a * b);
  }
  return KrausMap::plain(g.in_dims(), concat(f.out_dims(), f.label_dims()), std::move(ops));
}

KrausMap tensor(const KrausMap& a, const KrausMap& b) {
  std::vector<KrausFamily> factors = a.factors();
  factors.insert(factors.end(), b.factors().begin(), b.factors().end());
  return KrausMap::product(std::move(factors));
}

KrausMap tensor_power(const KrausMap& map, int n) {
  if (n < 1) throw Error(ErrorCode::InvalidArgument, "tensor power needs n >= 1");
  std::vector<KrausFamily> factors;
  for (int i = 0; i < n; ++i) factors.insert(factors.end(), map.factors().begin(), map.factors().end());
  return KrausMap::product(std::move(factors));
}

LabeledBlocks apply_blocks(const KrausMap& map, const Matrix& x, const Dims& dims,
                           const std::vector<int>& acting_on) {
  const Dims in = map.in_dims();
  if (acting_on.size() != in.size()) {
    throw Error(ErrorCode::DimMismatch, "map acts on " + std::to_string(in.size()) + " subsystems, " +
                                            std::to_string(acting_on.size()) + " given");
  }
  const std::int64_t n = total_dim(dims);
  if (x.rows() != n || x.cols() != n) throw Error(ErrorCode::DimMismatch, "operator does not match dims");
  std::vector<bool> used(dims.size(), false);
  for (std::size_t i = 0; i < acting_on.size(); ++i) {
    const int s = acting_on[i];
    if (s < 0 || s >= static_cast<int>(dims.size()) || used[s]) {
      throw Error(ErrorCode::IndexOutOfRange, "invalid acted-on subsystem");
    }
    used[s] = true;
    if (dims[s] != in[i]) throw Error(ErrorCode::DimMismatch, "subsystem dimension differs from map input");
  }

  // tag >= 0: untouched original subsystem; tag < 0: output of a factor.
  std::vector<int> tags(dims.size());
  std::iota(tags.begin(), tags.end(), 0);
  Dims cur = dims;
  std::vector<Matrix> blocks{x};
  int last_insert = 0;
  std::size_t offset = 0;
  for (std::size_t fi = 0; fi < map.factors().size(); ++fi) {
    const KrausFamily& f = map.factors()[fi];
    std::vector<int> pos;
    for (std::size_t j = 0; j < f.in_dims.size(); ++j) {
      const int orig = acting_on[offset + j];
      pos.push_back(static_cast<int>(std::find(tags.begin(), tags.end(), orig) - tags.begin()));
    }
    offset += f.in_dims.size();
    std::vector<int> perm = pos;
    Dims rest_dims;
    std::vector<int> rest_tags;
    for (int i = 0; i < static_cast<int>(cur.size()); ++i) {
      if (std::find(pos.begin(), pos.end(), i) == pos.end()) {
        perm.push_back(i);
        rest_dims.push_back(cur[i]);
        rest_tags.push_back(tags[i]);
      }
    }
    const int insert = *std::min_element(pos.begin(), pos.end());
    const std::int64_t din = f.in_dim();
    const std::int64_t dout = f.out_dim();
    const std::int64_t dr = total_dim(rest_dims);

    // Order (out, rest) -> rest[0..insert) out rest[insert..).
    const int nout = static_cast<int>(f.out_dims.size());
    std::vector<int> back;
    Dims work_dims = concat(f.out_dims, rest_dims);
    Dims next_dims;
    std::vector<int> next_tags;
    for (int i = 0; i < insert; ++i) {
      back.push_back(nout + i);
      next_dims.push_back(rest_dims[i]);
      next_tags.push_back(rest_tags[i]);
    }
    for (int j = 0; j < nout; ++j) {
      back.push_back(j);
      next_dims.push_back(f.out_dims[j]);
      next_tags.push_back(-1 - static_cast<int>(fi));
    }
    for (int i = insert; i < static_cast<int>(rest_dims.size()); ++i) {
      back.push_back(nout + i);
      next_dims.push_back(rest_dims[i]);
      next_tags.push_back(rest_tags[i]);
    }

    std::vector<Matrix> next;
    next.reserve(blocks.size() * f.branches.size());
    for (const auto& b : blocks) {
      const Matrix front = permute_subsystems(b, cur, perm);
      for (const auto& branch : f.branches) {
        const Matrix y = conjugate_sum(branch, front, din, dout, dr);
        next.push_back(permute_subsystems(y, work_dims, back));
      }
    }
    blocks = std::move(next);
    cur = std::move(next_dims);
    tags = std::move(next_tags);
    last_insert = insert;
  }

  LabeledBlocks out;
  out.dims = cur;
  out.label_dims = map.label_dims();
  out.blocks = std::move(blocks);
  out.label_position = last_insert;
  for (int i = 0; i < static_cast<int>(tags.size()); ++i) {
    if (tags[i] < 0) out.label_position = i + 1;
  }
  return out;
}

DensityOperator apply(const KrausMap& map, const DensityOperator& x, const std::vector<int>& acting_on) {
  LabeledBlocks lb = apply_blocks(map, x.matrix, x.dims, acting_on);
  if (lb.label_dims.empty()) return {std::move(lb.blocks.front()), lb.dims, false};
  const std::int64_t bd = total_dim(lb.dims);
  const auto nl = static_cast<std::int64_t>(lb.blocks.size());
  Matrix diag = Matrix::Zero(nl * bd, nl * bd);
  for (std::int64_t c = 0; c < nl; ++c) diag.block(c * bd, c * bd, bd, bd) = lb.blocks[c];
  // diag is ordered (labels, block dims); move the labels into place.
  const Dims work = concat(lb.label_dims, lb.dims);
  const int nlab = static_cast<int>(lb.label_dims.size());
  std::vector<int> perm;
  Dims final_dims;
  for (int i = 0; i < lb.label_position; ++i) {
    perm.push_back(nlab + i);
    final_dims.push_back(lb.dims[i]);
  }
  for (int j = 0; j < nlab; ++j) {
    perm.push_back(j);
    final_dims.push_back(lb.label_dims[j]);
  }
  for (int i = lb.label_position; i < static_cast<int>(lb.dims.size()); ++i) {
    perm.push_back(nlab + i);
    final_dims.push_back(lb.dims[i]);
  }
  return {permute_subsystems(diag, work, perm), final_dims, false};
}

Matrix apply_to(const KrausMap& map, const Matrix& x) {
  const Dims in = map.in_dims();
  std::vector<int> all(in.size());
  std::iota(all.begin(), all.end(), 0);
  return apply(map, DensityOperator{x, in, false}, all).matrix;
}

double LambdaTable::at(std::int64_t index) const {
  switch (mode) {
    case Mode::Full:
      return values.at(static_cast<std::size_t>(index));
    case Mode::BySupportWeight:
      return values.at(static_cast<std::size_t>(PauliString::from_index(d, n, index).weight()));
    case Mode::ByOffdiagonalWeight:
      return values.at(static_cast<std::size_t>(PauliString::from_index(d, n, index).offdiagonal_weight()));
  }
  return 0.0;
}

double LambdaTable::at(const PauliString& s) const {
  switch (mode) {
    case Mode::Full:
      return values.at(static_cast<std::size_t>(s.index()));
    case Mode::BySupportWeight:
      return values.at(static_cast<std::size_t>(s.weight()));
    case Mode::ByOffdiagonalWeight:
      return values.at(static_cast<std::size_t>(s.offdiagonal_weight()));
  }
  return 0.0;
}

LambdaTable LambdaTable::to_full() const {
  if (mode == Mode::Full) return *this;
  LambdaTable out{d, n, Mode::Full, {}, residual};
  const std::int64_t count = pauli_count(d, n);
  out.values.resize(static_cast<std::size_t>(count));
  for (std::int64_t i = 0; i < count; ++i) out.values[i] = at(i);
  return out;
}

namespace {

struct SiteLambda {
  std::vector<double> lambda;  // length d^{2n}
  double norm_sq = 0.0;        // ‖J‖²
  double diag_sq = 0.0;        // ‖Σ λ_s Φ_s‖²
};

// χ(s,t) with W_s† W_t W_s = χ W_t, for single sites.
Matrix conjugation_phases(int d) {
  const int q = d * d;
  Matrix chi(q, q);
  for (int s = 0; s < q; ++s) {
    const Matrix ws = weyl(d, s);
    for (int t = 0; t < q; ++t) {
      const Matrix wt = weyl(d, t);
      chi(s, t) = (wt.adjoint() * ws.adjoint() * wt * ws).trace() / static_cast<double>(d);
    }
  }
  return chi;
}

SiteLambda lambda_generic(const KrausFamily& f, int d, int n) {
  const std::int64_t count = pauli_count(d, n);
  const std::int64_t dn = f.in_dim();
  const double ddn = static_cast<double>(dn);
  Eigen::VectorXcd r(count);
  double resid_sq = 0.0;
  for (std::int64_t t = 0; t < count; ++t) {
    const Matrix wt = weyl(PauliString::from_index(d, n, t));
    double rt = 0.0;
    Matrix z = Matrix::Zero(dn, dn);
    for (const auto& branch : f.branches) {
      Matrix y = Matrix::Zero(f.out_dim(), f.out_dim());
      for (const auto& k : branch) y += k * wt * k.adjoint();
      rt += y.squaredNorm();
      for (const auto& k : branch) z += k.adjoint() * y * k;
    }
    r(t) = rt;
    resid_sq += (z - (rt / ddn) * wt).squaredNorm();
  }
  resid_sq /= ddn;

  // λ = (⊗χ) r / d^{3n}, applied one site axis at a time.
  const Matrix chi = conjugation_phases(d);
  const std::int64_t q = static_cast<std::int64_t>(d) * d;
  std::int64_t stride = 1;
  for (int axis = 0; axis < n; ++axis) {
    Eigen::VectorXcd next(count);
    for (std::int64_t base = 0; base < count; ++base) {
      const std::int64_t digit = (base / stride) % q;
      const std::int64_t root = base - digit * stride;
      cplx acc = 0.0;
      for (std::int64_t t = 0; t < q; ++t) acc += chi(digit, t) * r(root + t * stride);
      next(base) = acc;
    }
    r = std::move(next);
    stride *= q;
  }
  SiteLambda out;
  out.lambda.resize(count);
  const double scale = std::pow(ddn, 3.0);
  for (std::int64_t s = 0; s < count; ++s) out.lambda[s] = r(s).real() / scale;
  // ‖Σ λ_s Φ_s‖² = d^{2n} Σ λ_s², and the residual is orthogonal to it.
  for (double l : out.lambda) out.diag_sq += l * l;
  out.diag_sq *= ddn * ddn;
  out.norm_sq = out.diag_sq + resid_sq;
  return out;
}

}  // namespace

LambdaTable lambda_coefficients(const KrausMap& map, int d, int n, double tol) {
  if (map.in_dims() != Dims(n, d)) {
    throw Error(ErrorCode::DimMismatch, "map does not act on n qudits of dimension d");
  }
  const auto& factors = map.factors();
  const bool sitewise = static_cast<int>(factors.size()) == n &&
                        std::all_of(factors.begin(), factors.end(),
                                    [d](const KrausFamily& f) { return f.in_dims == Dims{d}; });
  LambdaTable table{d, n, LambdaTable::Mode::Full, {}, 0.0};
  if (sitewise && n > 1) {
    std::vector<SiteLambda> sites;
    for (const auto& f : factors) sites.push_back(lambda_generic(f, d, 1));
    const std::int64_t count = pauli_count(d, n);
    table.values.assign(count, 1.0);
    for (std::int64_t idx = 0; idx < count; ++idx) {
      const PauliString s = PauliString::from_index(d, n, idx);
      for (int i = 0; i < n; ++i) table.values[idx] *= sites[i].lambda[s.symbols[i]];
    }
    double all = 1.0, diag = 1.0;
    for (const auto& s : sites) {
      all *= s.norm_sq;
      diag *= s.diag_sq;
    }
    table.residual = std::sqrt(std::max(0.0, all - diag));
  } else {
    SiteLambda g = lambda_generic(map.flattened(), d, n);
    table.values = std::move(g.lambda);
    table.residual = std::sqrt(std::max(0.0, g.norm_sq - g.diag_sq));
  }
  const double min_lambda = *std::min_element(table.values.begin(), table.values.end());
  if (min_lambda < -tol || table.residual > tol) {
    throw Error(ErrorCode::NotDiagonalInPhiBasis,
                "min lambda " + std::to_string(min_lambda) + ", residual " + std::to_string(table.residual));
  }
  return table;
}

std::vector<std::vector<int>> subsets(int n, int k) {
  std::vector<std::vector<int>> out;
  if (k < 0 || k > n) return out;
  std::vector<int> s(k);
  std::iota(s.begin(), s.end(), 0);
  while (true) {
    out.push_back(s);
    int i = k - 1;
    while (i >= 0 && s[i] == n - k + i) --i;
    if (i < 0) break;
    ++s[i];
    for (int j = i + 1; j < k; ++j) s[j] = s[j - 1] + 1;
  }
  return out;
}

namespace {

// Digits of x in base d with n sites, first site most significant.
std::vector<int> digits(std::int64_t x, int d, int n) {
  std::vector<int> out(n);
  for (int i = n; i-- > 0;) {
    out[i] = static_cast<int>(x % d);
    x /= d;
  }
  return out;
}

std::int64_t undigits(const std::vector<int>& v, const std::vector<int>& sites, int d) {
  std::int64_t x = 0;
  for (int s : sites) x = x * d + v[s];
  return x;
}

std::vector<int> complement(const std::vector<int>& s, int n) {
  std::vector<int> out;
  for (int i = 0; i < n; ++i) {
    if (std::find(s.begin(), s.end(), i) == s.end()) out.push_back(i);
  }
  return out;
}

void check_nkd(int n, int k, int d) {
  if (d < 2 || n < 1 || k < 1 || k > n) {
    throw Error(ErrorCode::InvalidArgument, "need d >= 2 and 1 <= k <= n");
  }
}

}  // namespace

KrausMap sampling_map(int n, int k, int d) {
  check_nkd(n, k, d);
  const auto all = subsets(n, k);
  const double amp = 1.0 / std::sqrt(static_cast<double>(all.size()));
  const std::int64_t dn = total_dim(Dims(n, d));
  const std::int64_t dk = total_dim(Dims(k, d));
  KrausFamily f{Dims(n, d), {static_cast<int>(dk)}, {static_cast<int>(all.size())}, {}};
  for (const auto& s : all) {
    const auto sc = complement(s, n);
    std::vector<Matrix> ops(static_cast<std::size_t>(dn / dk), Matrix::Zero(dk, dn));
    for (std::int64_t x = 0; x < dn; ++x) {
      const auto v = digits(x, d, n);
      ops[undigits(v, sc, d)](undigits(v, s, d), x) = amp;
    }
    f.branches.push_back(std::move(ops));
  }
  return KrausMap(std::move(f));
}

KrausMap cq_sampling_map(int n, int k, int d) {
  check_nkd(n, k, d);
  const auto all = subsets(n, k);
  const double amp = 1.0 / std::sqrt(static_cast<double>(all.size()));
  const std::int64_t dn = total_dim(Dims(n, d));
  const std::int64_t dk = total_dim(Dims(k, d));
  KrausFamily f{Dims(n, d), {static_cast<int>(dk)}, {static_cast<int>(all.size())}, {}};
  for (const auto& s : all) {
    std::vector<Matrix> ops;
    ops.reserve(dn);
    for (std::int64_t x = 0; x < dn; ++x) {
      Matrix op = Matrix::Zero(dk, dn);
      op(undigits(digits(x, d, n), s, d), x) = amp;
      ops.push_back(std::move(op));
    }
    f.branches.push_back(std::move(ops));
  }
  return KrausMap(std::move(f));
}

namespace {

// Measures in basis θ (rows of U_θ) and records θ as the label.
KrausFamily measurement_site(const std::vector<Matrix>& bases) {
  const int d = static_cast<int>(bases.front().rows());
  const double amp = 1.0 / std::sqrt(static_cast<double>(bases.size()));
  KrausFamily f{{d}, {d}, {static_cast<int>(bases.size())}, {}};
  for (const auto& u : bases) {
    std::vector<Matrix> ops;
    for (int x = 0; x < d; ++x) {
      Matrix op = Matrix::Zero(d, d);
      op.row(x) = amp * u.row(x);
      ops.push_back(std::move(op));
    }
    f.branches.push_back(std::move(ops));
  }
  return f;
}

}  // namespace

KrausMap bb84_map(int n) {
  const double h = 1.0 / std::sqrt(2.0);
  Matrix had(2, 2);
  had << h, h, h, -h;
  return tensor_power(KrausMap(measurement_site({Matrix::Identity(2, 2), had})), n);
}

KrausMap mub_map(int n, int d) {
  return tensor_power(KrausMap(measurement_site(mub_bases(d).unitaries)), n);
}

LambdaTable sampling_lambda_table(int n, int k, int d) {
  check_nkd(n, k, d);
  const double c = static_cast<double>(binomial(n, k));
  LambdaTable t{d, n, LambdaTable::Mode::BySupportWeight, {}, 0.0};
  for (int w = 0; w <= n; ++w) {
    t.values.push_back(static_cast<double>(binomial(n - w, k)) / (std::pow(d, n - k) * c * c));
  }
  return t;
}

LambdaTable cq_sampling_lambda_table(int n, int k, int d) {
  check_nkd(n, k, d);
  const double c = static_cast<double>(binomial(n, k));
  LambdaTable t{d, n, LambdaTable::Mode::ByOffdiagonalWeight, {}, 0.0};
  for (int w = 0; w <= n; ++w) {
    t.values.push_back(static_cast<double>(binomial(n - w, k)) / (std::pow(d, n) * c * c));
  }
  return t;
}

LambdaTable bb84_lambda_table(int n) {
  LambdaTable t{2, n, LambdaTable::Mode::Full, {}, 0.0};
  const std::int64_t count = pauli_count(2, n);
  for (std::int64_t i = 0; i < count; ++i) {
    const PauliString s = PauliString::from_index(2, n, i);
    const bool allowed = std::none_of(s.symbols.begin(), s.symbols.end(),
                                      [](int x) { return bell_label_from_index(x) == 2; });
    t.values.push_back(allowed ? std::pow(4.0, -n) * std::pow(2.0, -s.weight()) : 0.0);
  }
  return t;
}

LambdaTable mub_lambda_table(int n, int d) {
  if (!is_prime(d)) throw Error(ErrorCode::NotPrime, "MUB map needs prime d");
  LambdaTable t{d, n, LambdaTable::Mode::BySupportWeight, {}, 0.0};
  for (int w = 0; w <= n; ++w) {
    t.values.push_back(std::pow((d + 1.0) * d, -n) * std::pow(d + 1.0, -w));
  }
  return t;
}

double theorem1_bound(const LambdaTable& table, const std::function<bool(const PauliString&)>& in_plus,
                      double h2) {
  const std::int64_t count = pauli_count(table.d, table.n);
  double plus = 0.0;
  double minus_max = 0.0;
  for (std::int64_t i = 0; i < count; ++i) {
    const PauliString s = PauliString::from_index(table.d, table.n, i);
    const double l = table.at(s);
    if (in_plus(s)) {
      plus += l;
    } else {
      minus_max = std::max(minus_max, l);
    }
  }
  return plus * std::exp2(-h2) + minus_max * std::pow(table.d, table.n);
}

double theorem1_bound_threshold(const LambdaTable& table, int l0, double h2) {
  const int n = table.n;
  const int d = table.d;
  if (table.mode == LambdaTable::Mode::Full) {
    return theorem1_bound(table, [l0](const PauliString& s) { return s.weight() < l0; }, h2);
  }
  double plus = 0.0;
  double minus_max = 0.0;
  const double q = static_cast<double>(d) * d;
  for (int l = 0; l <= n; ++l) {
    if (table.mode == LambdaTable::Mode::BySupportWeight) {
      const double mult = static_cast<double>(binomial(n, l)) * std::pow(q - 1.0, l);
      if (l < l0) {
        plus += mult * table.values[l];
      } else {
        minus_max = std::max(minus_max, table.values[l]);
      }
      continue;
    }
    // Strings with support weight l and w off-diagonal sites.
    for (int w = 0; w <= l; ++w) {
      const double mult = static_cast<double>(binomial(n, w)) * std::pow(q - d, w) *
                          static_cast<double>(binomial(n - w, l - w)) * std::pow(d - 1.0, l - w);
      if (mult == 0.0) continue;
      if (l < l0) {
        plus += mult * table.values[w];
      } else {
        minus_max = std::max(minus_max, table.values[w]);
      }
    }
  }
  return plus * std::exp2(-h2) + minus_max * std::pow(d, n);
}

}  // namespace entsampler
