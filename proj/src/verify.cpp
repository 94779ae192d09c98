#include "entsampler/verify.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <boost/multiprecision/cpp_int.hpp>
#include <chrono>
#include <cmath>
#include <exception>
#include <mutex>
#include <sstream>
#include <thread>

#include "entsampler/entropy.hpp"
#include "entsampler/error.hpp"
#include "entsampler/qmaps.hpp"
#include "entsampler/rates.hpp"
#include "entsampler/rng.hpp"
#include "json.hpp"

namespace entsampler {

using nlohmann::json;

TrialRecord make_record(std::int64_t trial, std::uint64_t seed, std::string check, std::string params,
                        CheckKind kind, double value, double bound, double tolerance) {
  TrialRecord r;
  r.trial = trial;
  r.seed = seed;
  r.check = std::move(check);
  r.params = std::move(params);
  r.kind = kind;
  r.value = value;
  r.bound = bound;
  r.tolerance = tolerance;
  switch (kind) {
    case CheckKind::Upper: r.slack = bound - value; break;
    case CheckKind::Lower: r.slack = value - bound; break;
    case CheckKind::Equality: r.slack = -std::abs(value - bound); break;
  }
  r.passed = r.slack >= -tolerance;
  return r;
}

void VerificationReport::add(TrialRecord r) {
  if (!r.passed) ++failures;
  if (r.kind == CheckKind::Equality) {
    worst_equality_error = std::max(worst_equality_error, -r.slack);
  } else {
    worst_slack = std::min(worst_slack, r.slack);
  }
  records.push_back(std::move(r));
}

void VerificationReport::merge(const VerificationReport& other) {
  trials += other.trials;
  runtime_seconds += other.runtime_seconds;
  for (const auto& r : other.records) add(r);
}

std::string to_string(CheckKind kind) {
  switch (kind) {
    case CheckKind::Upper: return "upper";
    case CheckKind::Lower: return "lower";
    case CheckKind::Equality: return "equality";
  }
  return "";
}

std::uint64_t trial_seed(std::uint64_t seed, std::string_view label, std::int64_t trial) {
  return Rng(seed).split(label).split(static_cast<std::uint64_t>(trial)).next_u64();
}

std::vector<TrialRecord> run_trials(std::int64_t count, int jobs,
                                    const std::function<std::vector<TrialRecord>(std::int64_t)>& body) {
  std::vector<std::vector<TrialRecord>> per(static_cast<std::size_t>(std::max<std::int64_t>(count, 0)));
  const int workers = static_cast<int>(std::clamp<std::int64_t>(jobs, 1, std::max<std::int64_t>(count, 1)));
  if (workers == 1) {
    for (std::int64_t t = 0; t < count; ++t) per[t] = body(t);
  } else {
    std::atomic<std::int64_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::int64_t t = next++; t < count; t = next++) {
          try {
            per[t] = body(t);
          } catch (...) {
            std::lock_guard<std::mutex> lock(failure_mutex);
            if (!failure) failure = std::current_exception();
          }
        }
      });
    }
    for (auto& th : pool) th.join();
    if (failure) std::rethrow_exception(failure);
  }
  std::vector<TrialRecord> out;
  for (auto& v : per) {
    for (auto& r : v) out.push_back(std::move(r));
  }
  return out;
}

MapKind parse_map_kind(const std::string& id) {
  if (id == "sampling") return MapKind::Sampling;
  if (id == "cq_sampling") return MapKind::CqSampling;
  if (id == "bb84") return MapKind::Bb84;
  if (id == "mub") return MapKind::Mub;
  throw Error(ErrorCode::InvalidArgument, "unknown map kind '" + id + "'");
}

std::string map_kind_id(MapKind kind) {
  switch (kind) {
    case MapKind::Sampling: return "sampling";
    case MapKind::CqSampling: return "cq_sampling";
    case MapKind::Bb84: return "bb84";
    case MapKind::Mub: return "mub";
  }
  return "";
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::int64_t ipow(std::int64_t b, int e) {
  std::int64_t r = 1;
  for (int i = 0; i < e; ++i) r *= b;
  return r;
}

std::vector<int> range(int n) {
  std::vector<int> v(n);
  for (int i = 0; i < n; ++i) v[i] = i;
  return v;
}

Dims site_dims(int n, int d, std::int64_t de) {
  Dims dims(n, d);
  dims.push_back(static_cast<int>(de));
  return dims;
}

constexpr std::int64_t kInstanceDimCap = 256;

std::int64_t pick_env_dim(Rng& rng, std::int64_t da) {
  std::vector<std::int64_t> options;
  for (std::int64_t de : {1, 2, 4, 8}) {
    if (da * de <= kInstanceDimCap) options.push_back(de);
  }
  return options[rng.below(options.size())];
}

DensityOperator random_joint_state(int n, int d, std::int64_t de, Rng& rng) {
  const Dims dims = site_dims(n, d, de);
  const std::int64_t dim = total_dim(dims);
  const int rank = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(dim)));
  return random_state(dims, rank, rng.next_u64());
}

DensityOperator max_entangled_joint(int n, int d) {
  DensityOperator phi = max_entangled(d, n, true);
  phi.dims = site_dims(n, d, ipow(d, n));
  return phi;
}

// Classical register over [d]^n with a random, often skewed, distribution.
DensityOperator random_cq_joint(int n, int d, std::int64_t de, Rng& rng) {
  const std::int64_t nx = ipow(d, n);
  const double spread = std::array<double, 3>{0.5, 2.0, 4.0}[rng.below(3)];
  const std::uint64_t support = 1 + rng.below(static_cast<std::uint64_t>(nx));
  std::vector<double> p(nx, 0.0);
  double total = 0.0;
  for (std::int64_t x = 0; x < nx; ++x) {
    const bool keep = rng.below(static_cast<std::uint64_t>(nx)) < support;
    p[x] = keep ? std::exp(spread * rng.normal()) : 0.0;
    total += p[x];
  }
  if (total <= 0.0) {
    p[rng.below(static_cast<std::uint64_t>(nx))] = 1.0;
    total = 1.0;
  }
  for (auto& v : p) v /= total;
  std::vector<DensityOperator> cond;
  for (std::int64_t x = 0; x < nx; ++x) {
    const int rank = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(de)));
    cond.push_back(random_state({static_cast<int>(de)}, rank, rng.next_u64()));
  }
  DensityOperator rho = cq_state(p, cond);
  rho.dims = site_dims(n, d, de);
  return rho;
}

// Column c of a Weyl operator has one nonzero entry, value[c] at row[c].
struct Monomial {
  std::vector<int> row;
  std::vector<cplx> value;
};

std::vector<Monomial> weyl_monomials(int d, int n) {
  std::vector<Monomial> out;
  const std::int64_t count = pauli_count(d, n);
  for (std::int64_t idx = 0; idx < count; ++idx) {
    const Matrix w = weyl(PauliString::from_index(d, n, idx));
    Monomial m;
    for (std::int64_t c = 0; c < w.cols(); ++c) {
      Eigen::Index r = 0;
      w.col(c).cwiseAbs().maxCoeff(&r);
      m.row.push_back(static_cast<int>(r));
      m.value.push_back(w(r, c));
    }
    out.push_back(std::move(m));
  }
  return out;
}

// tr[ρ̃ (W⊗I) ρ̃ (W⊗I)†] for ρ̃ ordered (A, E).
double weyl_overlap(const Matrix& rt, const Monomial& w, std::int64_t da, std::int64_t de) {
  cplx acc = 0.0;
  for (std::int64_t c = 0; c < da; ++c) {
    for (std::int64_t cp = 0; cp < da; ++cp) {
      const cplx phase = w.value[c] * std::conj(w.value[cp]);
      const std::int64_t rc = w.row[c], rcp = w.row[cp];
      for (std::int64_t e = 0; e < de; ++e) {
        for (std::int64_t ep = 0; ep < de; ++ep) {
          acc += rt(rcp * de + ep, rc * de + e) * phase * rt(c * de + e, cp * de + ep);
        }
      }
    }
  }
  return acc.real();
}

// ρ̂ = Σ_{e,e'} ρ̃_{[e'e]} ⊗ ρ̃_{[ee']}^T on A Ā, with ρ̃_{[ee']} = ⟨e|ρ̃|e'⟩.
Matrix rho_hat(const Matrix& rt, std::int64_t da, std::int64_t de) {
  Matrix out = Matrix::Zero(da * da, da * da);
  Matrix b1(da, da), b2(da, da);
  for (std::int64_t e = 0; e < de; ++e) {
    for (std::int64_t ep = 0; ep < de; ++ep) {
      for (std::int64_t a = 0; a < da; ++a) {
        for (std::int64_t ap = 0; ap < da; ++ap) {
          b1(a, ap) = rt(a * de + ep, ap * de + e);
          b2(a, ap) = rt(a * de + e, ap * de + ep);
        }
      }
      out += tensor(b1, b2.transpose());
    }
  }
  return out;
}

double block_mass(const LabeledBlocks& lb, std::int64_t de, const Matrix& x) {
  const std::int64_t dout = total_dim(lb.dims) / de;
  double mass = 0.0;
  for (const auto& b : lb.blocks) mass += sandwiched_collision_mass(b, dout, de, x);
  return mass;
}

std::string kv(std::initializer_list<std::pair<const char*, double>> items) {
  std::ostringstream os;
  bool first = true;
  for (const auto& [k, v] : items) {
    if (!first) os << ' ';
    first = false;
    os << k << '=' << v;
  }
  return os.str();
}

struct MapCase {
  int k = 0;
  KrausMap map;
  LambdaTable table;
};

std::vector<MapCase> map_cases(MapKind kind, int n, int d) {
  std::vector<MapCase> out;
  switch (kind) {
    case MapKind::Sampling:
      for (int k = 1; k <= n; ++k) out.push_back({k, sampling_map(n, k, d), sampling_lambda_table(n, k, d)});
      break;
    case MapKind::CqSampling:
      for (int k = 1; k <= n; ++k) out.push_back({k, cq_sampling_map(n, k, d), cq_sampling_lambda_table(n, k, d)});
      break;
    case MapKind::Bb84:
      if (d != 2) throw Error(ErrorCode::InvalidArgument, "the BB84 map acts on qubits");
      out.push_back({0, bb84_map(n), bb84_lambda_table(n)});
      break;
    case MapKind::Mub:
      if (!is_prime(d)) throw Error(ErrorCode::NotPrime, "MUB map needs a prime dimension");
      out.push_back({0, mub_map(n, d), mub_lambda_table(n, d)});
      break;
  }
  return out;
}

constexpr double kLinearTol = 1e-10;
constexpr double kEntropyTol = 1e-8;
constexpr double kSdpTol = 1e-6;

}  // namespace

VerificationReport verify_theorem1(MapKind kind, int n, int d, int trials, std::uint64_t seed,
                                   const Theorem1Options& options) {
  const auto start = Clock::now();
  if (n < 1 || n > 3) throw Error(ErrorCode::OutOfDomain, "theorem1 suite needs 1 <= n <= 3");
  if (d < 2 || d > 3) throw Error(ErrorCode::OutOfDomain, "theorem1 suite needs d in {2, 3}");
  const std::int64_t da = ipow(d, n);
  if (options.source == StateSource::MaxEntangled && da * da > kInstanceDimCap) {
    throw Error(ErrorCode::DimTooLarge, "maximally entangled instance exceeds the dimension cap");
  }
  VerificationReport rep;
  rep.suite = "theorem1";
  rep.tolerance = kEntropyTol;
  rep.config = json{{"kind", map_kind_id(kind)},
                    {"n", n},
                    {"d", d},
                    {"trials", trials},
                    {"seed", seed},
                    {"state", options.source == StateSource::Random ? "random" : "phi"}}
                   .dump();
  const std::vector<MapCase> cases = map_cases(kind, n, d);
  const std::vector<Monomial> monomials = weyl_monomials(d, n);
  const std::vector<int> acting = range(n);

  // Closed-form coefficient tables against extraction from the maps themselves.
  if (da <= 9) {
    for (const auto& mc : cases) {
      const LambdaTable generic = lambda_coefficients(mc.map, d, n);
      const LambdaTable closed = mc.table.to_full();
      double err = 0.0;
      for (std::size_t i = 0; i < closed.values.size(); ++i) {
        err = std::max(err, std::abs(closed.values[i] - generic.values[i]));
      }
      rep.add(make_record(-1, seed, "lambda_closed_form", kv({{"k", mc.k}}), CheckKind::Equality, err, 0.0,
                          kLinearTol));
    }
  }

  auto body = [&](std::int64_t t) {
    std::vector<TrialRecord> recs;
    const std::uint64_t ts = trial_seed(seed, "theorem1/" + map_kind_id(kind), t);
    Rng rng(ts);
    DensityOperator rho;
    if (options.source == StateSource::MaxEntangled) {
      rho = max_entangled_joint(n, d);
    } else {
      rho = random_joint_state(n, d, pick_env_dim(rng, da), rng);
    }
    const std::int64_t de = rho.dims.back();
    const Matrix rho_e = partial_trace(rho.matrix, rho.dims, {n});
    const Matrix x = mat_pow_support(rho_e, -0.25);
    const Matrix rt = tensor(Matrix::Identity(da, da), x) * rho.matrix * tensor(Matrix::Identity(da, da), x);
    const double q0 = trace_square(rt);
    const double h2 = -std::log2(q0);

    std::vector<double> q(monomials.size());
    double q_sum = 0.0, q_min = 0.0, q_excess = -1.0;
    for (std::size_t s = 0; s < monomials.size(); ++s) {
      q[s] = weyl_overlap(rt, monomials[s], da, de);
      q_sum += q[s];
      q_min = std::min(q_min, q[s]);
      q_excess = std::max(q_excess, q[s] - q[0]);
    }
    const std::string base = kv({{"n", n}, {"d", d}, {"de", static_cast<double>(de)}});
    recs.push_back(make_record(t, ts, "total_constraint", base, CheckKind::Equality, q_sum, static_cast<double>(da),
                               kLinearTol * da));
    recs.push_back(make_record(t, ts, "q0_is_collision_mass", base, CheckKind::Equality, q[0], q0, kLinearTol * q0));
    recs.push_back(make_record(t, ts, "individual_nonnegative", base, CheckKind::Lower, q_min, 0.0, kLinearTol * q0));
    recs.push_back(make_record(t, ts, "individual_at_most_q0", base, CheckKind::Upper, q_excess, 0.0, kLinearTol * q0));
    if (da <= 9) {
      const Matrix hat = rho_hat(rt, da, de);
      double err = 0.0;
      for (std::size_t s = 0; s < monomials.size(); ++s) {
        const PauliString ps = PauliString::from_index(d, n, static_cast<std::int64_t>(s));
        err = std::max(err, std::abs((hat * phi_s(ps)).trace().real() - q[s]));
      }
      recs.push_back(make_record(t, ts, "rho_hat_overlaps", base, CheckKind::Equality, err, 0.0, kLinearTol * q0));
    }

    for (const auto& mc : cases) {
      const LabeledBlocks lb = apply_blocks(mc.map, rho.matrix, rho.dims, acting);
      const double value = block_mass(lb, de, x);
      double predicted = 0.0;
      for (std::size_t s = 0; s < q.size(); ++s) predicted += mc.table.at(static_cast<std::int64_t>(s)) * q[s];
      const std::string p = kv({{"n", n}, {"d", d}, {"k", mc.k}, {"de", static_cast<double>(de)}, {"h2", h2}});
      recs.push_back(make_record(t, ts, "value_identity", p, CheckKind::Equality, value, predicted,
                                 kLinearTol * std::max(1.0, predicted)));
      for (int l0 = 0; l0 <= n + 1; ++l0) {
        const double bound = theorem1_bound_threshold(mc.table, l0, h2);
        recs.push_back(make_record(t, ts, "general_bound", p + " l0=" + std::to_string(l0), CheckKind::Upper, value,
                                   bound, kEntropyTol));
      }
    }
    return recs;
  };
  for (auto& r : run_trials(trials, options.jobs, body)) rep.add(std::move(r));
  rep.trials = trials;
  rep.runtime_seconds = seconds_since(start);
  return rep;
}

double sampled_collision_mass(const DensityOperator& rho, int n, int k) {
  const auto subs = subsets(n, k);
  double total = 0.0;
  const std::vector<int> env = rho.dims.size() > static_cast<std::size_t>(n) ? std::vector<int>{n} : std::vector<int>{};
  for (const auto& s : subs) total += h2_cond(rho, Bipartition{s, env}).collision_mass;
  return total / static_cast<double>(subs.size());
}

VerificationReport verify_sampling(int n, int k, int d, int trials, std::uint64_t seed, bool classical,
                                   const SamplingOptions& options) {
  const auto start = Clock::now();
  if (n < 1 || n > 5) throw Error(ErrorCode::OutOfDomain, "sampling suite needs 1 <= n <= 5");
  if (k < 1 || k > n) throw Error(ErrorCode::OutOfDomain, "sampling suite needs 1 <= k <= n");
  const std::int64_t da = ipow(d, n);
  if (da > kInstanceDimCap) throw Error(ErrorCode::DimTooLarge, "sampling instance exceeds the dimension cap");
  VerificationReport rep;
  rep.suite = "sampling";
  rep.tolerance = kEntropyTol;
  rep.config =
      json{{"n", n}, {"k", k}, {"d", d}, {"trials", trials}, {"seed", seed}, {"classical", classical}}.dump();
  const KrausMap map = classical ? cq_sampling_map(n, k, d) : sampling_map(n, k, d);
  const double subsets_count = static_cast<double>(binomial(n, k));
  const std::vector<int> acting = range(n);

  auto body = [&](std::int64_t t) {
    std::vector<TrialRecord> recs;
    const std::uint64_t ts = trial_seed(seed, classical ? "sampling/cq" : "sampling/qq", t);
    Rng rng(ts);
    const std::int64_t de = pick_env_dim(rng, da);
    const DensityOperator rho = classical ? random_cq_joint(n, d, de, rng) : random_joint_state(n, d, de, rng);
    const double h2 = h2_cond(rho, Bipartition{acting, {n}}).value / n;
    const double avg = sampled_collision_mass(rho, n, k);
    const BoundValue bound = classical ? sampling_bound_cq(n, k, d, h2) : sampling_bound_qq(n, k, d, h2);
    const std::string p = kv({{"n", n}, {"k", k}, {"d", d}, {"de", static_cast<double>(de)}, {"h2", h2}});
    recs.push_back(make_record(t, ts, classical ? "cq_sampling_bound" : "sampling_bound", p, CheckKind::Upper, avg,
                               bound.value, kEntropyTol));

    const Matrix x = mat_pow_support(partial_trace(rho.matrix, rho.dims, {n}), -0.25);
    const double via_map = subsets_count * block_mass(apply_blocks(map, rho.matrix, rho.dims, acting), de, x);
    recs.push_back(make_record(t, ts, "map_identity", p, CheckKind::Equality, via_map, avg,
                               1e-9 * std::max(1.0, avg)));
    return recs;
  };
  for (auto& r : run_trials(trials, options.jobs, body)) rep.add(std::move(r));
  rep.trials = trials;
  rep.runtime_seconds = seconds_since(start);
  return rep;
}

VerificationReport verify_uncertainty(MapKind kind, int n, int d, int trials, std::uint64_t seed,
                                      const UncertaintyOptions& options) {
  const auto start = Clock::now();
  if (kind != MapKind::Bb84 && kind != MapKind::Mub) {
    throw Error(ErrorCode::InvalidArgument, "uncertainty suite takes bb84 or mub");
  }
  if (n < 1 || n > 3) throw Error(ErrorCode::OutOfDomain, "uncertainty suite needs 1 <= n <= 3");
  const MapCase mc = map_cases(kind, n, d).front();
  const std::int64_t da = ipow(d, n);
  if (options.source == StateSource::MaxEntangled && da * da > kInstanceDimCap) {
    throw Error(ErrorCode::DimTooLarge, "maximally entangled instance exceeds the dimension cap");
  }
  VerificationReport rep;
  rep.suite = "uncertainty";
  rep.tolerance = kEntropyTol;
  rep.config = json{{"kind", map_kind_id(kind)},
                    {"n", n},
                    {"d", d},
                    {"trials", trials},
                    {"seed", seed},
                    {"state", options.source == StateSource::Random ? "random" : "phi"}}
                   .dump();
  const std::vector<int> acting = range(n);
  const double ld = std::log2(d);
  auto gamma = [&](double h) {
    h = std::clamp(h, -ld, ld);
    return kind == MapKind::Bb84 ? gamma_bb84(h) : gamma_mub(d, h);
  };

  auto body = [&](std::int64_t t) {
    std::vector<TrialRecord> recs;
    const std::uint64_t ts = trial_seed(seed, "uncertainty/" + map_kind_id(kind), t);
    Rng rng(ts);
    const DensityOperator rho = options.source == StateSource::MaxEntangled
                                    ? max_entangled_joint(n, d)
                                    : random_joint_state(n, d, pick_env_dim(rng, da), rng);
    const std::int64_t de = rho.dims.back();
    const double h2 = h2_cond(rho.matrix, da, de).value / n;
    const double hmin = hmin_cond(rho.matrix, da, de).first.value / n;

    // ρ_{X^n E Θ^n} is block diagonal in Θ^n; condition-cl splits both entropies over θ.
    LabeledBlocks lb = apply_blocks(mc.map, rho.matrix, rho.dims, acting);
    double mu = 0.0;
    for (const auto& b : lb.blocks) mu += b.trace().real();
    const std::int64_t dx = total_dim(lb.dims) / de;
    double h2_mass = 0.0, pg = 0.0;
    for (auto& b : lb.blocks) {
      b /= mu;
      h2_mass += h2_cond(b, dx, de).collision_mass;
      pg += min_trace_sdp(b, dx, de).optimal_value;
    }
    const double h2x = -std::log2(h2_mass);
    const double hminx = -std::log2(pg);
    const std::string p = kv({{"n", n}, {"d", d}, {"de", static_cast<double>(de)}, {"h2", h2}, {"hmin", hmin}});
    recs.push_back(make_record(t, ts, "h2_uncertainty", p, CheckKind::Lower, h2x, n * gamma(h2) - 1.0, kEntropyTol));
    recs.push_back(
        make_record(t, ts, "hmin_uncertainty_h2", p, CheckKind::Lower, hminx, 0.5 * (n * gamma(h2) - 1.0), kSdpTol));
    recs.push_back(make_record(t, ts, "hmin_uncertainty_hmin", p, CheckKind::Lower, hminx,
                               0.5 * (n * gamma(hmin) - 1.0), kSdpTol));
    recs.push_back(make_record(t, ts, "condition_cl_floor", p, CheckKind::Lower, h2x,
                               -std::log2(static_cast<double>(de)), kEntropyTol));
    recs.push_back(make_record(t, ts, "cq_hmin_below_h2", p, CheckKind::Upper, hminx, h2x, kSdpTol));
    recs.push_back(make_record(t, ts, "cq_h2_below_twice_hmin", p, CheckKind::Upper, h2x, 2.0 * hminx, kSdpTol));
    return recs;
  };
  for (auto& r : run_trials(trials, options.jobs, body)) rep.add(std::move(r));
  rep.trials = trials;
  rep.runtime_seconds = seconds_since(start);
  return rep;
}

namespace {

using boost::multiprecision::cpp_int;

cpp_int binom_exact(int n, int k) {
  if (k < 0 || n < 0 || k > n) return 0;
  cpp_int r = 1;
  for (int i = 1; i <= k; ++i) {
    r *= n - k + i;
    r /= i;
  }
  return r;
}

cpp_int pow_exact(cpp_int b, int e) {
  cpp_int r = 1;
  for (int i = 0; i < e; ++i) r *= b;
  return r;
}

// Record for lhs ≤ rhs decided exactly; slack is the relative gap.
TrialRecord exact_upper(std::string check, std::string params, const cpp_int& lhs, const cpp_int& rhs) {
  const long double l = lhs.convert_to<long double>();
  const long double r = rhs.convert_to<long double>();
  const long double gap = cpp_int(rhs - lhs).convert_to<long double>();
  TrialRecord rec = make_record(-1, 0, std::move(check), std::move(params), CheckKind::Upper,
                                static_cast<double>(l), static_cast<double>(r), 0.0);
  rec.slack = static_cast<double>(r > 0 ? gap / r : gap);
  rec.passed = lhs <= rhs;
  return rec;
}

cpp_int weighted_prefix_sum(int m, int l0, int base) {
  cpp_int s = 0;
  for (int l = 0; l <= l0; ++l) s += binom_exact(m, l) * pow_exact(base, l);
  return s;
}

std::vector<Matrix> random_kraus(int din, int dout, std::uint64_t seed) {
  Rng rng(seed);
  const int denv = (din + dout - 1) / dout + static_cast<int>(rng.below(2));
  const Matrix v = random_unitary(dout * denv, rng.next_u64()).leftCols(din);
  std::vector<Matrix> ops;
  for (int j = 0; j < denv; ++j) {
    Matrix k(dout, din);
    for (int o = 0; o < dout; ++o) k.row(o) = v.row(o * denv + j);
    ops.push_back(k);
  }
  return ops;
}

Matrix apply_kraus(const std::vector<Matrix>& ops, const Matrix& x) {
  Matrix out = Matrix::Zero(ops.front().rows(), ops.front().rows());
  for (const auto& k : ops) out += k * x * k.adjoint();
  return out;
}

VerificationReport sandwich_checks(const LemmaConfig& cfg) {
  VerificationReport rep;
  auto body = [&](std::int64_t t) {
    std::vector<TrialRecord> recs;
    const std::uint64_t ts = trial_seed(cfg.seed, "lemmas/sandwich", t);
    Rng rng(ts);
    const int da = 2 + static_cast<int>(rng.below(2));
    const int db = 1 + static_cast<int>(rng.below(4));
    const auto rho = random_state({da, db}, 1 + static_cast<int>(rng.below(da * db)), rng.next_u64());
    const double h2 = h2_cond(rho.matrix, da, db).value;
    const double hmin = hmin_cond(rho.matrix, da, db).first.value;
    const std::string p = kv({{"da", da}, {"db", db}});
    recs.push_back(make_record(t, ts, "sandwich_hmin_below_h2", p, CheckKind::Upper, hmin, h2, kSdpTol));
    recs.push_back(
        make_record(t, ts, "sandwich_h2_upper", p, CheckKind::Upper, h2, 2 * hmin + std::log2(da), kSdpTol));

    // cq form on a random ensemble.
    const int dx = 2 + static_cast<int>(rng.below(3));
    const int de = 1 + static_cast<int>(rng.below(4));
    std::vector<double> probs(dx);
    double tot = 0.0;
    for (auto& v : probs) tot += (v = rng.uniform() + 1e-3);
    for (auto& v : probs) v /= tot;
    std::vector<DensityOperator> cond;
    for (int x = 0; x < dx; ++x) cond.push_back(random_state({de}, 1 + static_cast<int>(rng.below(de)), rng.next_u64()));
    const DensityOperator cq = cq_state(probs, cond);
    const double ch2 = h2_cond(cq.matrix, dx, de).value;
    const double chmin = -std::log2(pguess(cq));
    const std::string pc = kv({{"dx", dx}, {"de", de}});
    recs.push_back(make_record(t, ts, "cq_hmin_below_h2", pc, CheckKind::Upper, chmin, ch2, kSdpTol));
    recs.push_back(make_record(t, ts, "cq_h2_below_twice_hmin", pc, CheckKind::Upper, ch2, 2 * chmin, kSdpTol));
    return recs;
  };
  for (auto& r : run_trials(cfg.sandwich_states, cfg.jobs, body)) rep.add(std::move(r));
  rep.trials += cfg.sandwich_states;

  // Equality case.
  const auto phi = max_entangled(2, 1, true);
  const double h2 = h2_cond(phi.matrix, 2, 2).value;
  const double hmin = hmin_cond(phi.matrix, 2, 2).first.value;
  rep.add(make_record(-1, 0, "sandwich_phi_h2", "", CheckKind::Equality, h2, -1.0, kEntropyTol));
  rep.add(make_record(-1, 0, "sandwich_phi_hmin", "", CheckKind::Equality, hmin, -1.0, kSdpTol));
  rep.add(make_record(-1, 0, "sandwich_phi_tight", "", CheckKind::Equality, 2 * hmin + 1.0, h2, kSdpTol));
  return rep;
}

VerificationReport condition_cl_checks(const LemmaConfig& cfg) {
  VerificationReport rep;
  for (int t = 0; t < cfg.condition_states; ++t) {
    const std::uint64_t ts = trial_seed(cfg.seed, "lemmas/condition_cl", t);
    Rng rng(ts);
    const int da = 2, dq = 1 + static_cast<int>(rng.below(3));
    const int dc = t == 0 ? 1 : 1 + static_cast<int>(rng.below(3));
    Matrix full = Matrix::Zero(da * dq * dc, da * dq * dc);
    double mix = 0.0, tot = 0.0;
    std::vector<double> p(dc);
    for (auto& v : p) tot += (v = rng.uniform() + 1e-3);
    for (int c = 0; c < dc; ++c) {
      p[c] /= tot;
      const auto r = random_state({da, dq}, 1 + static_cast<int>(rng.below(da * dq)), rng.next_u64());
      mix += p[c] * h2_cond(r.matrix, da, dq).collision_mass;
      Matrix pc = Matrix::Zero(dc, dc);
      pc(c, c) = p[c];
      full += tensor(r.matrix, pc);
    }
    const double h = h2_cond(full, da, dq * dc).value;
    const std::string params = kv({{"dq", dq}, {"dc", dc}});
    rep.add(make_record(t, ts, "condition_cl", params, CheckKind::Equality, h, -std::log2(mix), kLinearTol));
    rep.add(make_record(t, ts, "condition_cl_floor", params, CheckKind::Lower, h, -std::log2(dq), kLinearTol));
  }
  rep.trials += cfg.condition_states;
  return rep;
}

VerificationReport d2_checks(const LemmaConfig& cfg) {
  VerificationReport rep;
  for (int pair = 0; pair < cfg.d2_pairs; ++pair) {
    Rng rng(trial_seed(cfg.seed, "lemmas/d2_pair", pair));
    const int din = 2 + static_cast<int>(rng.below(3));
    const auto x = random_state({din}, 1 + static_cast<int>(rng.below(din)), rng.next_u64());
    const auto y = random_state({din}, din, rng.next_u64());
    const double before = d2_div(x.matrix, y.matrix);
    // ρ_AB with a full-rank marginal, for the conditional form.
    const auto rab = random_state({2, din}, 2 * din, rng.next_u64());
    const double h_before = h2_cond(rab.matrix, 2, din).value;
    for (int ch = 0; ch < cfg.d2_channels; ++ch) {
      const std::uint64_t ts = trial_seed(cfg.seed, "lemmas/d2_channel", pair * 100000 + ch);
      Rng crng(ts);
      const int dout = 2 + static_cast<int>(crng.below(3));
      const auto ops = random_kraus(din, dout, crng.next_u64());
      const double after = d2_div(apply_kraus(ops, x.matrix), apply_kraus(ops, y.matrix));
      const std::string params = kv({{"din", din}, {"dout", dout}});
      rep.add(make_record(pair, ts, "d2_monotone", params, CheckKind::Upper, after, before, kEntropyTol));
      std::vector<Matrix> local;
      for (const auto& k : ops) local.push_back(tensor(Matrix::Identity(2, 2), k));
      const double h_after = h2_cond(apply_kraus(local, rab.matrix), 2, dout).value;
      rep.add(make_record(pair, ts, "h2_data_processing", params, CheckKind::Lower, h_after, h_before, kEntropyTol));
    }
  }
  rep.trials += static_cast<std::int64_t>(cfg.d2_pairs) * cfg.d2_channels;
  return rep;
}

VerificationReport h2again_checks(const LemmaConfig& cfg) {
  VerificationReport rep;
  for (int t = 0; t < cfg.h2again_states; ++t) {
    const std::uint64_t ts = trial_seed(cfg.seed, "lemmas/h2again", t);
    Rng rng(ts);
    const auto rho = random_state({2, 2}, 1 + static_cast<int>(rng.below(4)), rng.next_u64());
    const double h2 = h2_cond(rho.matrix, 2, 2).value;
    const double f = pretty_good_fidelity(rho.matrix, 2, 2).fidelity;
    rep.add(make_record(t, ts, "h2_pretty_good", "", CheckKind::Equality, h2, -std::log2(2.0 * f * f), kEntropyTol));
  }
  rep.trials += cfg.h2again_states;
  return rep;
}

VerificationReport swap_transpose_checks(const LemmaConfig& cfg) {
  VerificationReport rep;
  for (int t = 0; t < cfg.swap_instances; ++t) {
    const std::uint64_t ts = trial_seed(cfg.seed, "lemmas/swap", t);
    Rng rng(ts);
    const int da = 2 + static_cast<int>(rng.below(3));
    const int dc = 2 + static_cast<int>(rng.below(3));
    auto gaussian = [&](int r, int c) {
      Matrix m(r, c);
      for (int j = 0; j < c; ++j) {
        for (int i = 0; i < r; ++i) {
          const double re = rng.normal();
          m(i, j) = cplx(re, rng.normal());
        }
      }
      return m;
    };
    const Matrix x = gaussian(da, da), y = gaussian(da, da);
    const Vector phi = max_entangled_vector(da, 1, false);
    const cplx lhs = (x * y).trace();
    const cplx rhs = phi.dot(tensor(x, Matrix(y.transpose())) * phi);
    const double scale = std::max(1.0, std::abs(lhs));
    rep.add(make_record(t, ts, "swap_trick", kv({{"da", da}}), CheckKind::Equality, std::abs(lhs - rhs), 0.0,
                        kLinearTol * scale));
    const Matrix z = gaussian(dc, da);
    const Vector left = tensor(z, Matrix::Identity(da, da)) * phi;
    const Vector right = tensor(Matrix::Identity(dc, dc), Matrix(z.transpose())) * max_entangled_vector(dc, 1, false);
    rep.add(make_record(t, ts, "transpose_trick", kv({{"da", da}, {"dc", dc}}), CheckKind::Equality,
                        (left - right).cwiseAbs().maxCoeff(), 0.0, kLinearTol));
  }
  rep.trials += cfg.swap_instances;
  return rep;
}

}  // namespace

VerificationReport verify_binomial_sum(int max_n) {
  VerificationReport rep;
  rep.suite = "binomial_sum";
  rep.tolerance = 0.0;
  for (int d : {2, 3}) {
    const int dd = d * d;
    for (int n = dd + 1; n <= max_n; ++n) {
      for (int l0 = 0; l0 * dd <= (dd - 1) * n; ++l0) {
        const cpp_int head = cpp_int(n) * n * binom_exact(n, l0) * pow_exact(dd - 1, l0);
        const cpp_int ratio_num = std::max(cpp_int((n - l0 - 1) * dd), cpp_int(n));
        for (int k = 1; k <= n; ++k) {
          // LHS·(n d²)^k ≤ n² C(n,ℓ0)(d²−1)^{ℓ0} max((n−ℓ0−1)d², n)^k.
          const cpp_int lhs = weighted_prefix_sum(n - k, l0, dd - 1) * pow_exact(cpp_int(n) * dd, k);
          const cpp_int rhs = head * pow_exact(ratio_num, k);
          rep.add(exact_upper("binomial_sum", kv({{"d", d}, {"n", n}, {"k", k}, {"l0", l0}}), lhs, rhs));
          ++rep.trials;
        }
        int k0 = 1;
        for (int k = 1; k <= n; ++k) {
          if (l0 * dd <= (dd - 1) * (n - k + 1)) k0 = k;
        }
        for (int k = 1; k <= k0; ++k) {
          const cpp_int lhs = weighted_prefix_sum(n - k, l0, dd - 1);
          const cpp_int rhs = cpp_int(n) * binom_exact(n - k, l0) * pow_exact(dd - 1, l0);
          rep.add(exact_upper("claim_k0_small_k", kv({{"d", d}, {"n", n}, {"k", k}, {"l0", l0}}), lhs, rhs));
        }
        const cpp_int full = pow_exact(dd, n - k0);
        rep.add(exact_upper("claim_k0_full_sum", kv({{"d", d}, {"n", n}, {"k0", k0}, {"l0", l0}}),
                            full, cpp_int(n) * binom_exact(n - k0, l0) * pow_exact(dd - 1, l0)));
        rep.add(exact_upper("claim_k0_identity", kv({{"d", d}, {"n", n}, {"k0", k0}}),
                            weighted_prefix_sum(n - k0, n - k0, dd - 1), full));
      }
    }
  }
  return rep;
}

VerificationReport verify_sum_binomial(int max_n) {
  VerificationReport rep;
  rep.suite = "sum_binomial";
  rep.tolerance = 1e-12;
  for (int a : {1, 3, 8}) {
    for (int n = 1; n <= max_n; ++n) {
      for (int l = 0; l * (a + 1) <= a * n; ++l) {
        long double lhs = 0.0L;
        for (int k = 0; k <= l; ++k) lhs += binom_exact(n, k).convert_to<long double>() * std::pow((long double)a, k);
        const long double x = static_cast<long double>(l) / n;
        const long double h = (l == 0) ? 0.0L : -x * std::log2(x) - (1 - x) * std::log2(1 - x);
        const long double rhs = std::exp2(n * h) * std::pow((long double)a, l);
        TrialRecord r = make_record(-1, 0, "sum_binomial", kv({{"a", a}, {"n", n}, {"l", l}}), CheckKind::Upper,
                                    static_cast<double>(lhs), static_cast<double>(rhs), 0.0);
        r.slack = static_cast<double>((rhs - lhs) / rhs);
        r.tolerance = 1e-12;
        r.passed = r.slack >= -r.tolerance;
        rep.add(std::move(r));
        ++rep.trials;
      }
    }
  }
  return rep;
}

VerificationReport verify_estimate_gamma(int grid) {
  VerificationReport rep;
  rep.suite = "estimate_gamma";
  rep.tolerance = 0.0;
  for (int i = 1; i <= grid; ++i) {
    const double x = static_cast<double>(i) / (3.0 * grid);
    const double bound = x / (10.0 * std::log2(1.0 / x));
    rep.add(make_record(-1, 0, "estimate_gamma", kv({{"x", x}}), CheckKind::Lower, gamma_bb84(-1.0 + x), bound, 0.0));
    ++rep.trials;
  }
  return rep;
}

VerificationReport verify_lemmas(const LemmaConfig& config) {
  const auto start = Clock::now();
  VerificationReport rep;
  rep.suite = "lemmas";
  rep.tolerance = kEntropyTol;
  rep.config = json{{"seed", config.seed},
                    {"sandwich_states", config.sandwich_states},
                    {"condition_states", config.condition_states},
                    {"d2_pairs", config.d2_pairs},
                    {"d2_channels", config.d2_channels},
                    {"h2again_states", config.h2again_states},
                    {"gamma_grid", config.gamma_grid},
                    {"binomial_max_n", config.binomial_max_n},
                    {"sum_binomial_max_n", config.sum_binomial_max_n},
                    {"swap_instances", config.swap_instances}}
                   .dump();
  rep.merge(sandwich_checks(config));
  rep.merge(condition_cl_checks(config));
  rep.merge(d2_checks(config));
  rep.merge(h2again_checks(config));
  rep.merge(swap_transpose_checks(config));
  rep.merge(verify_estimate_gamma(config.gamma_grid));
  rep.merge(verify_binomial_sum(config.binomial_max_n));
  rep.merge(verify_sum_binomial(config.sum_binomial_max_n));
  rep.runtime_seconds = seconds_since(start);
  return rep;
}

double substring_collision_probability(int n, int alphabet, int w, int k) {
  if (w < 0 || w > n || k < 0 || k > n) throw Error(ErrorCode::OutOfDomain, "need 0 <= w, k <= n");
  // All strings of weight exactly w.
  std::vector<std::vector<int>> strings;
  std::vector<int> cur(n, 0);
  const std::int64_t total = ipow(alphabet, n);
  for (std::int64_t idx = 0; idx < total; ++idx) {
    std::int64_t v = idx;
    int weight = 0;
    for (int i = n - 1; i >= 0; --i) {
      cur[i] = static_cast<int>(v % alphabet);
      v /= alphabet;
      weight += cur[i] != 0;
    }
    if (weight == w) strings.push_back(cur);
  }
  const double count = static_cast<double>(strings.size());
  const auto subs = subsets(n, k);
  double acc = 0.0;
  std::vector<double> hist(static_cast<std::size_t>(ipow(alphabet, k)));
  for (const auto& s : subs) {
    std::fill(hist.begin(), hist.end(), 0.0);
    for (const auto& str : strings) {
      std::int64_t key = 0;
      for (int i : s) key = key * alphabet + str[i];
      hist[key] += 1.0;
    }
    double coll = 0.0;
    for (double h : hist) coll += h * h;
    acc += coll / (count * count);
  }
  return acc / static_cast<double>(subs.size());
}

double avoidance_bound(int n, int w, int k) {
  double prod = 1.0;
  for (int j = 0; j < k; ++j) prod *= std::max(0.0, static_cast<double>(n - 2 * w - j)) / (n - j);
  return prod;
}

VerificationReport verify_upper_bounds(int n, int d, int w, int k) {
  const auto start = Clock::now();
  if (n < 1 || n > 5) throw Error(ErrorCode::OutOfDomain, "upper suite needs 1 <= n <= 5");
  if (w < 0 || w > n || k < 1 || k > n) throw Error(ErrorCode::OutOfDomain, "need 0 <= w <= n and 1 <= k <= n");
  VerificationReport rep;
  rep.suite = "upper";
  rep.tolerance = kLinearTol;
  rep.config = json{{"n", n}, {"d", d}, {"w", w}, {"k", k}}.dump();
  const std::string p = kv({{"n", n}, {"d", d}, {"w", w}, {"k", k}});
  const double avoid = avoidance_bound(n, w, k);
  const double dk = static_cast<double>(ipow(d, k));

  // Fully quantum witness: EPR pairs with a uniformly random error of weight w.
  const double qq_count = static_cast<double>(binomial(n, w)) * std::pow(d * d - 1.0, w);
  const double qq_h2 = -std::log2(static_cast<double>(ipow(d, n)) / qq_count);
  const BellDiagonalState bell = corrupted_epr_bell(n, d, w);
  rep.add(make_record(0, 0, "corrupted_epr_h2_closed_form", p, CheckKind::Equality, bell.h2(), qq_h2, kLinearTol));
  const double qq_mass = dk * substring_collision_probability(n, d * d, w, k);
  if (ipow(d, 2 * n) <= kInstanceDimCap) {
    DensityOperator rho = corrupted_epr(n, d, w);
    rho.dims = site_dims(n, d, ipow(d, n));
    rep.add(make_record(0, 0, "corrupted_epr_h2_dense", p, CheckKind::Equality,
                        h2_cond(rho, Bipartition{range(n), {n}}).value, qq_h2, kLinearTol));
    rep.add(make_record(0, 0, "corrupted_epr_sample_dense", p, CheckKind::Equality, sampled_collision_mass(rho, n, k),
                        qq_mass, kLinearTol * std::max(1.0, qq_mass)));
  }
  rep.add(make_record(0, 0, "corrupted_epr_avoidance", p, CheckKind::Lower, qq_mass, dk * avoid, kLinearTol));
  if (n > d * d) {
    rep.add(make_record(0, 0, "corrupted_epr_sampling_bound", p, CheckKind::Upper, qq_mass,
                        sampling_bound_qq(n, k, d, qq_h2 / n).value, kEntropyTol));
  }

  // Classical witness: uniform over strings of weight w.
  const double cq_count = static_cast<double>(binomial(n, w)) * std::pow(d - 1.0, w);
  const double cq_h2 = std::log2(cq_count);
  const DensityOperator fw = fixed_weight_classical(n, d, w);
  rep.add(make_record(1, 0, "fixed_weight_h2_closed_form", p, CheckKind::Equality,
                      h2_cond(fw, Bipartition{range(n), {}}).value, cq_h2, kLinearTol));
  const double cq_mass = substring_collision_probability(n, d, w, k);
  rep.add(make_record(1, 0, "fixed_weight_sample_dense", p, CheckKind::Equality, sampled_collision_mass(fw, n, k),
                      cq_mass, kLinearTol));
  rep.add(make_record(1, 0, "fixed_weight_avoidance", p, CheckKind::Lower, cq_mass, avoid, kLinearTol));
  if (n > d) {
    rep.add(make_record(1, 0, "fixed_weight_sampling_bound", p, CheckKind::Upper, cq_mass,
                        sampling_bound_cq(n, k, d, cq_h2 / n).value, kEntropyTol));
  }
  rep.trials = 2;
  rep.runtime_seconds = seconds_since(start);
  return rep;
}

}  // namespace entsampler
