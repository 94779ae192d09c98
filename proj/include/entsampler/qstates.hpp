#pragma once

#include <cstdint>
#include <vector>

#include "entsampler/matcore.hpp"

namespace entsampler {

struct DensityOperator {
  Matrix matrix;
  Dims dims;
  bool normalized = true;

  double trace() const { return matrix.trace().real(); }
  std::int64_t dim() const { return matrix.rows(); }
};

// Checks PSD within tol·λ_max, the dims product, and the trace when normalized.
void validate(const DensityOperator& rho, double tol = 1e-10);

// Symbols s_i in [d²] on n sites. Weight counts nonzero symbols.
struct PauliString {
  int d = 2;
  std::vector<int> symbols;

  int n() const { return static_cast<int>(symbols.size()); }
  int weight() const;
  // Sites whose symbol is not diagonal (s_i >= d).
  int offdiagonal_weight() const;
  // Mixed-radix index, first symbol most significant.
  std::int64_t index() const;
  static PauliString from_index(int d, int n, std::int64_t index);
};

std::int64_t pauli_count(int d, int n);

// |Φ⟩ = Σ_a |a⟩|a⟩ over n pairs, ordered A^n then Ā^n.
Vector max_entangled_vector(int d, int n, bool normalized);
DensityOperator max_entangled(int d, int n, bool normalized);

// Weyl operator W_s = X^a Z^b with s = a·d + b.
Matrix weyl(int d, int s);
Matrix weyl(const PauliString& s);

// (W_s ⊗ I)Φ(W_s ⊗ I)† on A^n Ā^n, unnormalized.
Matrix phi_s(const PauliString& s);

// Qubit display order: convention index (0,1,2,3) for I,Z,X,XZ corresponds to
// Bell labels (0,3,1,2), with label 2 the singlet.
int bell_label_from_index(int s);
int bell_index_from_label(int label);

bool is_prime(int d);

struct MubFamily {
  int d = 2;
  // Row x of U_θ is ⟨e_{θ,x}|, so U_θ maps basis θ onto the standard basis.
  std::vector<Matrix> unitaries;
};

MubFamily mub_bases(int d);

// Residual ‖Σ_{θ,x} P_{θ,x}⊗P_{θ,x} − (I + F)‖_max of the two-design identity.
double two_design_residual(const MubFamily& family);

// Gaussian purification of the given rank, normalized.
DensityOperator random_state(const Dims& dims, int rank, std::uint64_t seed);

// Haar-like random unitary (QR of a complex Gaussian matrix).
Matrix random_unitary(int dim, std::uint64_t seed);

// Mixture of Bell-diagonal operators Σ_s p_s Φ_s/d^n, stored by coefficient.
// Needed where the dense operator on A^n B^n is too large to materialize.
struct BellDiagonalState {
  int d = 2;
  int n = 1;
  std::vector<double> probs;  // indexed by PauliString::index()

  DensityOperator to_density() const;
  // H₂(A^n|B^n): ρ_B = I/d^n and the Φ_s/d^n are orthogonal projectors.
  double h2() const;
};

BellDiagonalState corrupted_epr_bell(int n, int d, int w);
DensityOperator corrupted_epr(int n, int d, int w);

DensityOperator fixed_weight_classical(int n, int d, int w);

// Σ_x p(x)|x⟩⟨x| ⊗ ρ_E(x), with the classical register first.
DensityOperator cq_state(const std::vector<double>& probs,
                         const std::vector<DensityOperator>& conditionals);

std::int64_t binomial(int n, int k);

}  // namespace entsampler
