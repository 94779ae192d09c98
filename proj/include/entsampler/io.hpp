#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "entsampler/entropy.hpp"
#include "entsampler/qstates.hpp"
#include "entsampler/verify.hpp"
#include "json.hpp"

namespace entsampler {

struct NamedSubsystem {
  std::string name;
  Dims dims;
};

// JSON state file: {"subsystems": [{"name", "dims"}], "matrix": [[re, im], ...]
// row-major, "normalized": bool}. Above dimension 256 the matrix may live in a
// sibling binary file named by "matrix_file" (little-endian re, im doubles).
struct StateFile {
  std::vector<NamedSubsystem> subsystems;
  DensityOperator rho;
};

inline constexpr std::int64_t kInlineMatrixDim = 256;

StateFile parse_state_json(const std::string& text, const std::string& base_dir = ".");
StateFile read_state_file(const std::string& path);
// Validates the operator; throws ParseError for structural problems and the
// matching numeric code for violated state invariants.
std::string state_to_json(const StateFile& state);
void write_state_file(const std::string& path, const StateFile& state);

// "A,B|E": names on each side of the bar, mapped to flattened subsystem indices.
Bipartition parse_split(const StateFile& state, const std::string& text);

nlohmann::json report_to_json(const VerificationReport& report);

}  // namespace entsampler
