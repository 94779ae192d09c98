#include "entsampler/wsesim.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ostream>

#include "entsampler/entropy.hpp"
#include "entsampler/error.hpp"
#include "entsampler/matcore.hpp"
#include "entsampler/qstates.hpp"
#include "entsampler/rates.hpp"
#include "entsampler/rng.hpp"
#include "json.hpp"

namespace entsampler {

namespace {

// Rows are ⟨e_m| of the basis.
Matrix basis_rows(MeasureBasis b) {
  Matrix v(2, 2);
  const double h = 1.0 / std::sqrt(2.0);
  switch (b) {
    case MeasureBasis::Z:
      v << 1, 0, 0, 1;
      break;
    case MeasureBasis::X:
      v << h, h, h, -h;
      break;
    case MeasureBasis::Breidbart: {
      const double c = std::cos(M_PI / 8), s = std::sin(M_PI / 8);
      v << c, s, -s, c;
      break;
    }
  }
  return v;
}

Matrix hadamard_power(int theta) { return basis_rows(theta ? MeasureBasis::X : MeasureBasis::Z); }

int sample_outcome(double p0, Rng& rng) { return rng.uniform() < p0 ? 0 : 1; }

void finish(WseTranscript& t) {
  for (int i = 0; i < t.n; ++i) {
    if (t.theta[i] == t.theta_prime[i]) {
      t.index_set.push_back(i);
      t.x_i.push_back(t.x[i]);
    }
  }
}

WseTranscript start(int n, std::uint64_t seed) {
  if (n < 1) throw Error(ErrorCode::OutOfDomain, "protocol needs n >= 1");
  WseTranscript t;
  t.n = n;
  t.seed = seed;
  return t;
}

}  // namespace

WseTranscript run_honest(int n, std::uint64_t seed) {
  WseTranscript t = start(n, seed);
  Rng rng = Rng(seed).split("wse/honest");
  for (int i = 0; i < n; ++i) {
    const int x = static_cast<int>(rng.below(2));
    const int th = static_cast<int>(rng.below(2));
    const int thp = static_cast<int>(rng.below(2));
    // State H^θ|x⟩ is row x of H^θ (real symmetric); Bob projects on rows of H^θ'.
    const Matrix prepared = hadamard_power(th).row(x).transpose();
    const cplx amp0 = (hadamard_power(thp).row(0) * prepared)(0, 0);
    t.x.push_back(x);
    t.theta.push_back(th);
    t.theta_prime.push_back(thp);
    t.bob_bits.push_back(sample_outcome(std::norm(amp0), rng));
  }
  finish(t);
  return t;
}

WseTranscript run_honest_purified(int n, std::uint64_t seed) {
  WseTranscript t = start(n, seed);
  Rng rng = Rng(seed).split("wse/purified");
  const Vector epr = max_entangled_vector(2, 1, true);
  for (int i = 0; i < n; ++i) {
    const int th = static_cast<int>(rng.below(2));
    const int thp = static_cast<int>(rng.below(2));
    // Joint outcome distribution of Alice's and Bob's measurements on one pair.
    const Vector amps = tensor(hadamard_power(th), hadamard_power(thp)) * epr;
    const double u = rng.uniform();
    double acc = 0.0;
    int outcome = 3;
    for (int k = 0; k < 4; ++k) {
      acc += std::norm(amps(k));
      if (u < acc) {
        outcome = k;
        break;
      }
    }
    t.x.push_back(outcome / 2);
    t.bob_bits.push_back(outcome % 2);
    t.theta.push_back(th);
    t.theta_prime.push_back(thp);
  }
  finish(t);
  return t;
}

std::string transcript_json(const WseTranscript& t) {
  nlohmann::json j{{"n", t.n},
                   {"seed", t.seed},
                   {"x", t.x},
                   {"theta", t.theta},
                   {"theta_prime", t.theta_prime},
                   {"bob_bits", t.bob_bits},
                   {"index_set", t.index_set},
                   {"x_I", t.x_i}};
  return j.dump();
}

void write_transcripts_jsonl(std::ostream& out, const std::vector<WseTranscript>& ts) {
  for (const auto& t : ts) out << transcript_json(t) << '\n';
}

AttackStrategy parse_attack_strategy(const std::string& id) {
  if (id == "store-first-q") return AttackStrategy::StoreFirstQ;
  if (id == "measure-rest-fixed") return AttackStrategy::MeasureRestFixed;
  if (id == "measure-rest-random") return AttackStrategy::MeasureRestRandom;
  throw Error(ErrorCode::InvalidArgument, "unknown attack strategy '" + id + "'");
}

std::string attack_strategy_id(AttackStrategy s) {
  switch (s) {
    case AttackStrategy::StoreFirstQ: return "store-first-q";
    case AttackStrategy::MeasureRestFixed: return "measure-rest-fixed";
    case AttackStrategy::MeasureRestRandom: return "measure-rest-random";
  }
  return "";
}

MeasureBasis parse_measure_basis(const std::string& id) {
  if (id == "Z") return MeasureBasis::Z;
  if (id == "X") return MeasureBasis::X;
  if (id == "Breidbart") return MeasureBasis::Breidbart;
  throw Error(ErrorCode::InvalidArgument, "unknown measurement basis '" + id + "'");
}

std::string measure_basis_id(MeasureBasis b) {
  switch (b) {
    case MeasureBasis::Z: return "Z";
    case MeasureBasis::X: return "X";
    case MeasureBasis::Breidbart: return "Breidbart";
  }
  return "";
}

AttackValue attack_value(int n, const AttackSpec& attack, double sdp_tol) {
  if (n < 1 || n > 4) throw Error(ErrorCode::DimTooLarge, "attack evaluation needs 1 <= n <= 4");
  const int q = attack.q;
  if (q < 0 || q > n) throw Error(ErrorCode::OutOfDomain, "need 0 <= q <= n");
  const int rest = n - q;
  const std::int64_t dn = std::int64_t{1} << n, dq = std::int64_t{1} << q, dr = std::int64_t{1} << rest;

  // |ψ⟩ on A^n B^n as a dn × dn coefficient matrix; (U ⊗ W)|ψ⟩ ↔ U Ψ W^T.
  const Vector psi = max_entangled_vector(2, n, true);
  const Matrix coeff = Eigen::Map<const Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
      psi.data(), dn, dn);

  // Measurement settings for the unstored qubits: list of (probability, rows of V^{⊗rest}).
  std::vector<std::pair<double, Matrix>> settings;
  auto product_rows = [&](const std::vector<MeasureBasis>& bases) {
    std::vector<Matrix> f;
    for (auto b : bases) f.push_back(basis_rows(b));
    return f.empty() ? Matrix::Identity(1, 1).eval() : tensor(f);
  };
  switch (attack.strategy) {
    case AttackStrategy::StoreFirstQ:
    case AttackStrategy::MeasureRestFixed:
      settings.emplace_back(1.0, product_rows(std::vector<MeasureBasis>(
                                     rest, attack.strategy == AttackStrategy::StoreFirstQ ? MeasureBasis::Z
                                                                                         : attack.basis)));
      break;
    case AttackStrategy::MeasureRestRandom:
      for (std::int64_t beta = 0; beta < dr; ++beta) {
        std::vector<MeasureBasis> bases;
        for (int i = rest - 1; i >= 0; --i) bases.push_back((beta >> i) & 1 ? MeasureBasis::X : MeasureBasis::Z);
        settings.emplace_back(1.0 / static_cast<double>(dr), product_rows(bases));
      }
      break;
  }
  // Discarding the unstored qubits is a measurement whose outcome is forgotten.
  const bool keep_outcomes = attack.strategy != AttackStrategy::StoreFirstQ;

  double pg = 0.0;
  for (std::int64_t theta = 0; theta < dn; ++theta) {
    std::vector<Matrix> fa;
    for (int i = n - 1; i >= 0; --i) fa.push_back(hadamard_power(static_cast<int>((theta >> i) & 1)));
    const Matrix u = tensor(fa);
    const Matrix alice = u * coeff;
    for (const auto& [prob, rows] : settings) {
      Matrix forgotten = Matrix::Zero(dn * dq, dn * dq);
      for (std::int64_t m = 0; m < dr; ++m) {
        const Matrix w = tensor(Matrix::Identity(dq, dq), Matrix(rows.row(m)));  // dq × dn
        const Matrix phi = alice * w.transpose();                                 // dn × dq
        Matrix block = Matrix::Zero(dn * dq, dn * dq);
        for (std::int64_t x = 0; x < dn; ++x) {
          block.block(x * dq, x * dq, dq, dq) = phi.row(x).transpose() * phi.row(x).conjugate();
        }
        block *= prob / static_cast<double>(dn);
        if (keep_outcomes) {
          pg += min_trace_sdp(block, dn, dq, sdp_tol).optimal_value;
        } else {
          forgotten += block;
        }
      }
      if (!keep_outcomes) pg += min_trace_sdp(forgotten, dn, dq, sdp_tol).optimal_value;
    }
  }
  AttackValue v;
  v.pguess = std::min(1.0, pg);
  v.hmin = -std::log2(pg);
  v.bound = 0.5 * (n * gamma_bb84(-static_cast<double>(q) / n) - 1.0);
  return v;
}

VerificationReport check_bqsm_bound(int n, int q, const std::vector<AttackStrategy>& strategies, double tolerance) {
  const auto t0 = std::chrono::steady_clock::now();
  VerificationReport rep;
  rep.suite = "wse";
  rep.tolerance = tolerance;
  nlohmann::json names = nlohmann::json::array();
  for (auto s : strategies) names.push_back(attack_strategy_id(s));
  rep.config = nlohmann::json{{"n", n}, {"q", q}, {"strategies", names}}.dump();
  std::int64_t idx = 0;
  for (auto s : strategies) {
    std::vector<MeasureBasis> bases{MeasureBasis::Z};
    if (s == AttackStrategy::MeasureRestFixed) bases = {MeasureBasis::Z, MeasureBasis::X, MeasureBasis::Breidbart};
    for (auto b : bases) {
      const AttackValue v = attack_value(n, {q, s, b});
      std::string params = "n=" + std::to_string(n) + " q=" + std::to_string(q) + " strategy=" + attack_strategy_id(s);
      if (s == AttackStrategy::MeasureRestFixed) params += " basis=" + measure_basis_id(b);
      rep.add(make_record(idx++, 0, "bqsm_bound", params, CheckKind::Lower, v.hmin, v.bound, tolerance));
    }
  }
  rep.trials = idx;
  rep.runtime_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return rep;
}

}  // namespace entsampler
