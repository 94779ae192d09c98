#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "entsampler/matcore.hpp"
#include "entsampler/qstates.hpp"

namespace entsampler {

// One local Kraus family with an optional classical label:
//   M(X) = Σ_c (Σ_i K_{c,i} X K_{c,i}†) ⊗ |c⟩⟨c|.
// A family without labels has label_dims empty and a single branch.
struct KrausFamily {
  Dims in_dims;
  Dims out_dims;
  Dims label_dims;
  std::vector<std::vector<Matrix>> branches;

  std::int64_t in_dim() const { return total_dim(in_dims); }
  std::int64_t out_dim() const { return total_dim(out_dims); }
  std::int64_t label_count() const { return total_dim(label_dims); }
};

// Completely positive map stored as a tensor product of local families, the
// i-th acting on the i-th consecutive slice of the input subsystems. The
// output lists every factor's quantum part first, then every label.
class KrausMap {
 public:
  KrausMap() = default;
  explicit KrausMap(KrausFamily family);

  static KrausMap plain(Dims in_dims, Dims out_dims, std::vector<Matrix> kraus);
  static KrausMap product(std::vector<KrausFamily> factors);

  const std::vector<KrausFamily>& factors() const { return factors_; }
  Dims in_dims() const;
  Dims out_dims() const;
  Dims label_dims() const;
  std::int64_t in_dim() const { return total_dim(in_dims()); }
  std::int64_t out_dim() const { return total_dim(out_dims()); }
  std::int64_t label_count() const { return total_dim(label_dims()); }

  // Single family equivalent to the product, combined label row-major.
  KrausFamily flattened() const;
  // Explicit Kraus operators K ⊗ |c⟩ onto (out, label).
  std::vector<Matrix> kraus_ops() const;
  // μ when Σ K†K = μ·I within tol.
  std::optional<double> trace_scale(double tol = 1e-9) const;

 private:
  std::vector<KrausFamily> factors_;
};

KrausMap adjoint(const KrausMap& map);
// f ∘ g.
KrausMap compose(const KrausMap& f, const KrausMap& g);
KrausMap tensor(const KrausMap& a, const KrausMap& b);
KrausMap tensor_power(const KrausMap& map, int n);

struct LabeledBlocks {
  Dims dims;                  // dims of every block
  Dims label_dims;
  std::vector<Matrix> blocks;  // one per label value, row-major
  int label_position = 0;     // where the label registers go in the assembled output
};

// Applies the map to the listed subsystems of x (identity elsewhere). The
// map's quantum output takes the place of the first acted-on subsystem.
LabeledBlocks apply_blocks(const KrausMap& map, const Matrix& x, const Dims& dims,
                           const std::vector<int>& acting_on);

// Same, with the labels assembled into the output as classical registers.
DensityOperator apply(const KrausMap& map, const DensityOperator& x, const std::vector<int>& acting_on);
// Map applied to an operator on exactly its input space.
Matrix apply_to(const KrausMap& map, const Matrix& x);

// Coefficients of ((M†∘M) ⊗ id)(Φ) = Σ_s λ_s Φ_s.
struct LambdaTable {
  enum class Mode { Full, BySupportWeight, ByOffdiagonalWeight };

  int d = 2;
  int n = 1;
  Mode mode = Mode::Full;
  std::vector<double> values;  // by PauliString::index(), or by weight
  double residual = 0.0;       // ‖((M†M)⊗id)(Φ) − Σ λ_s Φ_s‖_F

  double at(const PauliString& s) const;
  double at(std::int64_t index) const;
  LambdaTable to_full() const;
};

// Fails with NotDiagonalInPhiBasis if the map violates the hypothesis.
LambdaTable lambda_coefficients(const KrausMap& map, int d, int n, double tol = 1e-8);

KrausMap sampling_map(int n, int k, int d);
KrausMap cq_sampling_map(int n, int k, int d);
KrausMap bb84_map(int n);
KrausMap mub_map(int n, int d);

LambdaTable sampling_lambda_table(int n, int k, int d);
// Indexed by the number of sites whose symbol is off-diagonal.
LambdaTable cq_sampling_lambda_table(int n, int k, int d);
LambdaTable bb84_lambda_table(int n);
LambdaTable mub_lambda_table(int n, int d);

// Subsets of size k of [n], lexicographic; the label order of the sampling maps.
std::vector<std::vector<int>> subsets(int n, int k);

// Σ_{s∈S+} λ_s·2^{-h2} + (max_{s∈S-} λ_s)·d^n, by enumeration.
double theorem1_bound(const LambdaTable& table, const std::function<bool(const PauliString&)>& in_plus,
                      double h2);
// Partition S+ = {s : |s| < l0}; uses multiplicity counting for by-weight tables.
double theorem1_bound_threshold(const LambdaTable& table, int l0, double h2);

}  // namespace entsampler
