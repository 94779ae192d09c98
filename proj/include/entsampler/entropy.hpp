#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "entsampler/matcore.hpp"
#include "entsampler/qmaps.hpp"
#include "entsampler/qstates.hpp"

namespace entsampler {

enum class Conditioning { RhoConditioned, SigmaConditioned, Unconditioned };

struct EntropyResult {
  double value = 0.0;           // bits
  double collision_mass = 0.0;  // 2^{-value}
  Conditioning conditioning = Conditioning::RhoConditioned;
};

// Subsystem indices of the two sides; subsystems in neither are traced out.
struct Bipartition {
  std::vector<int> a;
  std::vector<int> b;
};

// Operator reordered to (A, B) with the remaining subsystems traced out.
struct BipartiteOperator {
  Matrix m;
  std::int64_t da = 1;
  std::int64_t db = 1;
};

BipartiteOperator bipartite(const DensityOperator& rho, const Bipartition& split);

// tr_A of an operator ordered (A, B).
Matrix trace_out_a(const Matrix& m, std::int64_t da, std::int64_t db);

// tr[((I ⊗ X) m (I ⊗ X))²] for m ordered (A, B) and X on B.
double sandwiched_collision_mass(const Matrix& m, std::int64_t da, std::int64_t db, const Matrix& x);

EntropyResult h2_cond(const Matrix& rho_ab, std::int64_t da, std::int64_t db);
EntropyResult h2_cond(const DensityOperator& rho, const Bipartition& split);

// Unnormalized: scaling ρ by μ multiplies the collision mass by μ².
EntropyResult h2_cond_sigma(const Matrix& rho_ab, std::int64_t da, std::int64_t db, const Matrix& sigma_b);

struct SdpSolution {
  Matrix optimal_sigma;
  double optimal_value = 0.0;  // tr σ, an upper bound on the optimum
  double dual_value = 0.0;     // tr(ρX) for a feasible X, a lower bound
  double duality_gap = 0.0;
  int iterations = 0;
  Matrix dual_operator;        // X ⪰ 0 with tr_A X = I
};

inline constexpr double kSdpTolerance = 1e-7;

// Dimension cap |A||B| for the SDP; ENTSAMPLER_MAX_DIM overrides 256.
std::int64_t max_sdp_dim();

// min tr σ subject to I_A ⊗ σ ⪰ ρ_AB. Accepts sub-normalized ρ.
SdpSolution min_trace_sdp(const Matrix& rho_ab, std::int64_t da, std::int64_t db, double tol = kSdpTolerance);

std::pair<EntropyResult, SdpSolution> hmin_cond(const Matrix& rho_ab, std::int64_t da, std::int64_t db,
                                                double tol = kSdpTolerance);
std::pair<EntropyResult, SdpSolution> hmin_cond(const DensityOperator& rho, const Bipartition& split,
                                                double tol = kSdpTolerance);

// Guessing probability of the first (classical) subsystem given the rest.
double pguess(const DensityOperator& cq, double tol = kSdpTolerance);

struct PrettyGoodRecovery {
  double fidelity = 0.0;
  KrausMap recovery;  // B -> A'
};

PrettyGoodRecovery pretty_good_fidelity(const Matrix& rho_ab, std::int64_t da, std::int64_t db);
PrettyGoodRecovery pretty_good_fidelity(const DensityOperator& rho, const Bipartition& split);

// D₂(X‖Y) = log tr[(Y^{-1/4} X Y^{-1/4})²].
double d2_div(const Matrix& x, const Matrix& y);

}  // namespace entsampler
