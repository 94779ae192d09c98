#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <string_view>
#include <vector>

#include "entsampler/qstates.hpp"

namespace entsampler {

enum class CheckKind {
  Upper,     // value ≤ bound
  Lower,     // value ≥ bound
  Equality,  // |value − bound| ≤ tolerance
};

struct TrialRecord {
  std::int64_t trial = 0;  // -1 for configuration-level checks
  std::uint64_t seed = 0;
  std::string check;
  std::string params;
  CheckKind kind = CheckKind::Upper;
  double value = 0.0;
  double bound = 0.0;
  double slack = 0.0;  // bound − value, value − bound, or −|value − bound|
  double tolerance = 0.0;
  bool passed = true;
};

TrialRecord make_record(std::int64_t trial, std::uint64_t seed, std::string check, std::string params,
                        CheckKind kind, double value, double bound, double tolerance);

struct VerificationReport {
  std::string suite;
  std::string config;  // JSON text of the configuration that produced the report
  double tolerance = 1e-8;
  std::int64_t trials = 0;
  std::int64_t failures = 0;
  // Minimum slack over inequality records; +∞ when there are none.
  double worst_slack = std::numeric_limits<double>::infinity();
  double worst_equality_error = 0.0;
  double runtime_seconds = 0.0;
  std::vector<TrialRecord> records;

  void add(TrialRecord r);
  void merge(const VerificationReport& other);
  bool passed() const { return failures == 0; }
};

std::string to_string(CheckKind kind);

// Seed of one trial, derived from the suite seed and a label.
std::uint64_t trial_seed(std::uint64_t seed, std::string_view label, std::int64_t trial);

// Runs body(trial) for trial in [0, count) on up to `jobs` threads and
// concatenates the records in trial order.
std::vector<TrialRecord> run_trials(std::int64_t count, int jobs,
                                    const std::function<std::vector<TrialRecord>(std::int64_t)>& body);

enum class MapKind { Sampling, CqSampling, Bb84, Mub };

MapKind parse_map_kind(const std::string& id);
std::string map_kind_id(MapKind kind);

enum class StateSource { Random, MaxEntangled };

struct Theorem1Options {
  StateSource source = StateSource::Random;
  int jobs = 1;
};

// For each trial state and every sampling size k (sampling maps), checks the
// general bound at every weight threshold, the identity value = Σ λ_s q_s, and
// the constraints Σ q_s = d^n, 0 ≤ q_s ≤ q_0 = 2^{−H₂(A^n|E)}.
VerificationReport verify_theorem1(MapKind kind, int n, int d, int trials, std::uint64_t seed,
                                   const Theorem1Options& options = {});

struct SamplingOptions {
  int jobs = 1;
};

VerificationReport verify_sampling(int n, int k, int d, int trials, std::uint64_t seed, bool classical,
                                   const SamplingOptions& options = {});

// Subset average of 2^{−H₂(A_S|E)} for a state on (A_1..A_n) or (A_1..A_n, E).
double sampled_collision_mass(const DensityOperator& rho, int n, int k);

struct UncertaintyOptions {
  StateSource source = StateSource::Random;
  int jobs = 1;
};

VerificationReport verify_uncertainty(MapKind kind, int n, int d, int trials, std::uint64_t seed,
                                      const UncertaintyOptions& options = {});

struct LemmaConfig {
  std::uint64_t seed = 1;
  int sandwich_states = 500;
  int condition_states = 100;
  int d2_pairs = 10;
  int d2_channels = 50;
  int h2again_states = 100;
  int gamma_grid = 1000;
  int binomial_max_n = 16;
  int sum_binomial_max_n = 16;
  int swap_instances = 50;
  int jobs = 1;
};

VerificationReport verify_lemmas(const LemmaConfig& config = {});

// Individual lemma groups, aggregated by verify_lemmas.
VerificationReport verify_binomial_sum(int max_n);
VerificationReport verify_sum_binomial(int max_n);
VerificationReport verify_estimate_gamma(int grid);

// Exact E_S Pr[σ_S = σ'_S] for σ, σ' independent and uniform over strings of
// weight w in [alphabet]^n.
double substring_collision_probability(int n, int alphabet, int w, int k);

// The proofs' product (n−2w)/n ⋯ (n−2w−k+1)/(n−k+1), with nonpositive factors as 0.
double avoidance_bound(int n, int w, int k);

VerificationReport verify_upper_bounds(int n, int d, int w, int k);

}  // namespace entsampler
