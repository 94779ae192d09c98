#include "entsampler/entropy.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <string>

#include "entsampler/error.hpp"

namespace entsampler {

BipartiteOperator bipartite(const DensityOperator& rho, const Bipartition& split) {
  std::vector<int> keep = split.a;
  keep.insert(keep.end(), split.b.begin(), split.b.end());
  BipartiteOperator out;
  out.m = partial_trace(rho.matrix, rho.dims, keep);
  for (int i : split.a) out.da *= rho.dims.at(i);
  for (int i : split.b) out.db *= rho.dims.at(i);
  return out;
}

namespace {

void check_bipartite(const Matrix& m, std::int64_t da, std::int64_t db) {
  if (da < 1 || db < 1 || m.rows() != da * db || m.cols() != da * db) {
    throw Error(ErrorCode::DimMismatch, "operator size does not equal |A||B|");
  }
}

// supp(x) ⊆ supp(y) for PSD x, y.
void check_support(const Matrix& x, const Matrix& y) {
  const std::int64_t n = y.rows();
  const Matrix p = support_projector(y);
  const Matrix q = Matrix::Identity(n, n) - p;
  const double leak = (q * x * q).trace().real();
  const double scale = std::max(x.trace().real(), 1e-300);
  if (leak > 1e-9 * scale) {
    throw Error(ErrorCode::SupportMismatch, "support not contained in conditioning support (leak " +
                                                std::to_string(leak) + ")");
  }
}

EntropyResult from_mass(double mass, Conditioning c) {
  return {-log2_safe(mass), mass, c};
}

}  // namespace

Matrix trace_out_a(const Matrix& m, std::int64_t da, std::int64_t db) {
  check_bipartite(m, da, db);
  Matrix out = Matrix::Zero(db, db);
  for (std::int64_t a = 0; a < da; ++a) out += m.block(a * db, a * db, db, db);
  return out;
}

double sandwiched_collision_mass(const Matrix& m, std::int64_t da, std::int64_t db, const Matrix& x) {
  check_bipartite(m, da, db);
  if (db == 1) return m.squaredNorm() * std::pow(std::abs(x(0, 0)), 4);
  double mass = 0.0;
  Matrix tmp(db, db);
  for (std::int64_t a = 0; a < da; ++a) {
    for (std::int64_t c = 0; c < da; ++c) {
      tmp.noalias() = x * m.block(a * db, c * db, db, db) * x;
      mass += tmp.squaredNorm();
    }
  }
  return mass;
}

EntropyResult h2_cond(const Matrix& rho_ab, std::int64_t da, std::int64_t db) {
  const Matrix rho_b = trace_out_a(rho_ab, da, db);
  const Matrix x = mat_pow_support(rho_b, -0.25);
  return from_mass(sandwiched_collision_mass(rho_ab, da, db, x), Conditioning::RhoConditioned);
}

EntropyResult h2_cond(const DensityOperator& rho, const Bipartition& split) {
  const BipartiteOperator bo = bipartite(rho, split);
  EntropyResult r = h2_cond(bo.m, bo.da, bo.db);
  if (split.b.empty()) r.conditioning = Conditioning::Unconditioned;
  return r;
}

EntropyResult h2_cond_sigma(const Matrix& rho_ab, std::int64_t da, std::int64_t db, const Matrix& sigma_b) {
  if (sigma_b.rows() != db || sigma_b.cols() != db) throw Error(ErrorCode::DimMismatch, "sigma is not on B");
  const Matrix rho_b = trace_out_a(rho_ab, da, db);
  check_support(rho_b, sigma_b);
  const Matrix x = mat_pow_support(sigma_b, -0.25);
  return from_mass(sandwiched_collision_mass(rho_ab, da, db, x), Conditioning::SigmaConditioned);
}

std::int64_t max_sdp_dim() {
  if (const char* env = std::getenv("ENTSAMPLER_MAX_DIM")) {
    char* end = nullptr;
    const long long v = std::strtoll(env, &end, 10);
    if (end != env && v > 0) return v;
  }
  return 256;
}

namespace {

struct BarrierPoint {
  bool feasible = false;
  Matrix w;            // S^{-1}
  double log_det = 0.0;
};

BarrierPoint barrier_at(const Matrix& rho, const Matrix& sigma, std::int64_t da, std::int64_t db) {
  const std::int64_t n = da * db;
  Matrix s = -rho;
  for (std::int64_t a = 0; a < da; ++a) s.block(a * db, a * db, db, db) += sigma;
  Eigen::LLT<Matrix> llt(s);
  BarrierPoint p;
  if (llt.info() != Eigen::Success) return p;
  const auto& l = llt.matrixLLT();
  for (std::int64_t i = 0; i < n; ++i) {
    const double lii = l(i, i).real();
    if (!(lii > 0.0)) return p;
    p.log_det += 2.0 * std::log(lii);
  }
  p.w = llt.solve(Matrix::Identity(n, n));
  p.w = (p.w + p.w.adjoint()) * 0.5;
  p.feasible = true;
  return p;
}

bool is_block_diagonal(const Matrix& rho, std::int64_t da, std::int64_t db) {
  const double scale = std::max(1e-300, rho.cwiseAbs().maxCoeff());
  for (std::int64_t a = 0; a < da; ++a) {
    for (std::int64_t c = 0; c < da; ++c) {
      if (a != c && rho.block(a * db, c * db, db, db).cwiseAbs().maxCoeff() > 1e-14 * scale) return false;
    }
  }
  return true;
}

}  // namespace

SdpSolution min_trace_sdp(const Matrix& rho_in, std::int64_t da, std::int64_t db, double tol) {
  check_bipartite(rho_in, da, db);
  const std::int64_t n = da * db;
  if (n > max_sdp_dim()) {
    throw Error(ErrorCode::DimTooLarge, "SDP dimension " + std::to_string(n) + " exceeds cap " +
                                            std::to_string(max_sdp_dim()));
  }
  const Matrix rho = hermitize(rho_in, 1e-10);
  const EigenDecomposition eig = eig_hermitian(rho);
  const double lmax = eig.values(0);
  if (eig.values(n - 1) < -1e-10 * std::max(1.0, lmax)) {
    throw Error(ErrorCode::NegativeEigenvalue, "SDP input is not PSD");
  }
  SdpSolution sol;
  if (lmax <= 0.0) {
    sol.optimal_sigma = Matrix::Zero(db, db);
    sol.dual_operator = Matrix::Zero(n, n);
    for (std::int64_t a = 0; a < da; ++a) sol.dual_operator.block(a * db, a * db, db, db).setIdentity();
    sol.dual_operator /= static_cast<double>(da);
    return sol;
  }
  if (db == 1) {
    // σ is a scalar: the optimum is λ_max, certified by the top eigenvector.
    sol.optimal_sigma = Matrix::Constant(1, 1, lmax);
    sol.optimal_value = lmax;
    const Vector v = eig.vectors.col(0);
    sol.dual_operator = v * v.adjoint();
    sol.dual_value = (rho * sol.dual_operator).trace().real();
    sol.duality_gap = sol.optimal_value - sol.dual_value;
    return sol;
  }

  const bool block_diag = is_block_diagonal(rho, da, db);
  const std::int64_t m = db * db;
  Matrix sigma = Matrix::Identity(db, db) * (2.0 * lmax);
  double mu = lmax / static_cast<double>(da);
  BarrierPoint pt = barrier_at(rho, sigma, da, db);
  if (!pt.feasible) throw Error(ErrorCode::NoConvergence, "initial point infeasible");

  // Every iterate σ is primal feasible and every rescaled X dual feasible, so
  // the best of each seen so far brackets the optimum.
  double best_primal = std::numeric_limits<double>::infinity();
  double best_dual = -std::numeric_limits<double>::infinity();
  int iterations = 0;
  for (int outer = 0; outer < 200; ++outer) {
    for (int inner = 0; inner < 100; ++inner) {
      ++iterations;
      const Matrix& w = pt.w;
      Matrix t = Matrix::Zero(db, db);
      for (std::int64_t a = 0; a < da; ++a) t += w.block(a * db, a * db, db, db);
      const Matrix g = Matrix::Identity(db, db) - mu * t;

      // Hessian of -μ log det(I⊗σ - ρ) in vec(σ): μ Σ_{a,c} W_ca^T ⊗ W_ac.
      Matrix h = Matrix::Zero(m, m);
      for (std::int64_t a = 0; a < da; ++a) {
        for (std::int64_t c = 0; c < da; ++c) {
          if (block_diag && a != c) continue;
          const Matrix wac = w.block(a * db, c * db, db, db);
          const Matrix wca_t = w.block(c * db, a * db, db, db).transpose();
          for (std::int64_t i = 0; i < db; ++i) {
            for (std::int64_t j = 0; j < db; ++j) {
              const cplx f = wca_t(i, j);
              if (f != cplx(0.0)) h.block(i * db, j * db, db, db) += f * wac;
            }
          }
        }
      }
      h *= mu;
      h = (h + h.adjoint()) * 0.5;
      const Eigen::Map<const Vector> gv(g.data(), m);
      Eigen::LDLT<Matrix> ldlt(h);
      Vector dv = ldlt.solve(-gv);
      Matrix delta = Eigen::Map<Matrix>(dv.data(), db, db);
      delta = (delta + delta.adjoint()) * 0.5;
      // Squared Newton decrement of the self-concordant tr σ/μ − log det(I⊗σ − ρ).
      const double lambda2 = -(g * delta).trace().real() / mu;
      if (!(lambda2 > 1e-14)) break;

      // Damped Newton: the step 1/(1+λ) stays feasible and decreases the
      // barrier without comparing function values that roundoff can swamp.
      const double lambda = std::sqrt(lambda2);
      double step = lambda > 0.25 ? 1.0 / (1.0 + lambda) : 1.0;
      bool moved = false;
      for (int halvings = 0; halvings < 60 && !moved; ++halvings, step *= 0.5) {
        const Matrix cand = sigma + step * delta;
        BarrierPoint cp = barrier_at(rho, cand, da, db);
        if (cp.feasible) {
          sigma = cand;
          pt = std::move(cp);
          moved = true;
        }
      }
      if (!moved || lambda2 < 1e-10) break;
    }

    // Dual certificate: rescale X = μ S^{-1} so that tr_A X = I exactly.
    Matrix x = mu * pt.w;
    const Matrix y = trace_out_a(x, da, db);
    const Matrix yis = mat_pow_support(y, -0.5, 0.0);
    for (std::int64_t a = 0; a < da; ++a) {
      for (std::int64_t c = 0; c < da; ++c) {
        x.block(a * db, c * db, db, db) = yis * x.block(a * db, c * db, db, db) * yis;
      }
    }
    const double primal = sigma.trace().real();
    const double dual = (rho * x).trace().real();
    if (primal < best_primal) {
      best_primal = primal;
      sol.optimal_sigma = sigma;
      sol.optimal_value = primal;
    }
    if (dual > best_dual) {
      best_dual = dual;
      sol.dual_value = dual;
      sol.dual_operator = x;
    }
    sol.duality_gap = best_primal - best_dual;
    sol.iterations = iterations;
    if (sol.duality_gap <= tol) return sol;
    mu *= 0.25;
  }
  throw Error(ErrorCode::NoConvergence, "SDP gap " + std::to_string(sol.duality_gap) + " above tolerance");
}

std::pair<EntropyResult, SdpSolution> hmin_cond(const Matrix& rho_ab, std::int64_t da, std::int64_t db,
                                                double tol) {
  SdpSolution sol = min_trace_sdp(rho_ab, da, db, tol);
  EntropyResult r = from_mass(sol.optimal_value, Conditioning::RhoConditioned);
  return {r, std::move(sol)};
}

std::pair<EntropyResult, SdpSolution> hmin_cond(const DensityOperator& rho, const Bipartition& split,
                                                double tol) {
  const BipartiteOperator bo = bipartite(rho, split);
  auto out = hmin_cond(bo.m, bo.da, bo.db, tol);
  if (split.b.empty()) out.first.conditioning = Conditioning::Unconditioned;
  return out;
}

double pguess(const DensityOperator& cq, double tol) {
  if (cq.dims.empty()) throw Error(ErrorCode::DimMismatch, "empty state");
  const std::int64_t dx = cq.dims.front();
  const std::int64_t de = cq.dim() / dx;
  const double scale = std::max(1.0, cq.matrix.cwiseAbs().maxCoeff());
  for (std::int64_t a = 0; a < dx; ++a) {
    for (std::int64_t c = 0; c < dx; ++c) {
      if (a != c && cq.matrix.block(a * de, c * de, de, de).cwiseAbs().maxCoeff() > 1e-10 * scale) {
        throw Error(ErrorCode::NotClassical, "first subsystem has off-diagonal blocks");
      }
    }
  }
  return min_trace_sdp(cq.matrix, dx, de, tol).optimal_value;
}

PrettyGoodRecovery pretty_good_fidelity(const Matrix& rho_ab, std::int64_t da, std::int64_t db) {
  check_bipartite(rho_ab, da, db);
  const Matrix rho_b = trace_out_a(rho_ab, da, db);
  const Matrix rb_is = mat_pow_support(rho_b, -0.5);
  const EigenDecomposition e = eig_hermitian(rho_ab, 1e-10);
  const double cut = kSupportCutoff * std::max(0.0, e.values(0));
  // ρ_AB = Σ v_i v_i†; recovery Kraus operators K_i = conj(V_i) ρ_B^{-1/2}
  // with V_i[a, b] = v_i[a·|B| + b].
  std::vector<Matrix> kraus;
  for (Eigen::Index i = 0; i < e.values.size(); ++i) {
    if (e.values(i) <= cut) break;
    const Vector v = e.vectors.col(i) * std::sqrt(e.values(i));
    Matrix vc(da, db);
    for (std::int64_t a = 0; a < da; ++a) {
      for (std::int64_t b = 0; b < db; ++b) vc(a, b) = std::conj(v(a * db + b));
    }
    kraus.push_back(vc * rb_is);
  }
  PrettyGoodRecovery out;
  out.recovery = KrausMap::plain({static_cast<int>(db)}, {static_cast<int>(da)}, std::move(kraus));
  const Dims dims{static_cast<int>(da), static_cast<int>(db)};
  const Matrix recovered = apply(out.recovery, DensityOperator{rho_ab, dims, true}, {1}).matrix;
  const Vector phi = max_entangled_vector(static_cast<int>(da), 1, true);
  const double overlap = (phi.adjoint() * recovered * phi)(0, 0).real();
  out.fidelity = std::sqrt(std::max(0.0, overlap));
  return out;
}

PrettyGoodRecovery pretty_good_fidelity(const DensityOperator& rho, const Bipartition& split) {
  const BipartiteOperator bo = bipartite(rho, split);
  return pretty_good_fidelity(bo.m, bo.da, bo.db);
}

double d2_div(const Matrix& x, const Matrix& y) {
  if (x.rows() != y.rows() || x.cols() != y.cols()) throw Error(ErrorCode::DimMismatch, "D2 arguments differ");
  check_support(x, y);
  const Matrix yq = mat_pow_support(y, -0.25);
  return log2_safe((yq * x * yq).squaredNorm());
}

}  // namespace entsampler
