#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "entsampler/verify.hpp"

namespace entsampler {

struct WseTranscript {
  int n = 0;
  std::uint64_t seed = 0;
  std::vector<int> x;            // Alice's bits
  std::vector<int> theta;        // Alice's bases, 1 = Hadamard
  std::vector<int> theta_prime;  // Bob's bases
  std::vector<int> bob_bits;     // Bob's outcomes
  std::vector<int> index_set;    // {i : θ_i = θ'_i}
  std::vector<int> x_i;          // x restricted to the index set
};

// Alice sends H^θ|x⟩; Bob measures each qubit in basis θ'.
WseTranscript run_honest(int n, std::uint64_t seed);
// Alice prepares EPR pairs, sends halves, and measures her halves in θ.
WseTranscript run_honest_purified(int n, std::uint64_t seed);

std::string transcript_json(const WseTranscript& t);
void write_transcripts_jsonl(std::ostream& out, const std::vector<WseTranscript>& ts);

enum class AttackStrategy { StoreFirstQ, MeasureRestFixed, MeasureRestRandom };
enum class MeasureBasis { Z, X, Breidbart };

struct AttackSpec {
  int q = 0;  // qubits kept in quantum memory
  AttackStrategy strategy = AttackStrategy::StoreFirstQ;
  MeasureBasis basis = MeasureBasis::Z;  // for MeasureRestFixed
};

AttackStrategy parse_attack_strategy(const std::string& id);
std::string attack_strategy_id(AttackStrategy s);
MeasureBasis parse_measure_basis(const std::string& id);
std::string measure_basis_id(MeasureBasis b);

struct AttackValue {
  double pguess = 0.0;
  double hmin = 0.0;   // H_min(X^n | B M Θ^n)
  double bound = 0.0;  // ½(n·γ(−q/n) − 1)
};

// Exact evaluation on the purified protocol: the adversary keeps the first q
// of its halves, handles the rest per the strategy, then learns Θ^n.
AttackValue attack_value(int n, const AttackSpec& attack, double sdp_tol = 1e-7);

// Every strategy (all three bases for the fixed one) against the bound.
VerificationReport check_bqsm_bound(int n, int q, const std::vector<AttackStrategy>& strategies,
                                    double tolerance = 1e-6);

}  // namespace entsampler
