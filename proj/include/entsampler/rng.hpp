#pragma once

#include <cstdint>
#include <string_view>

namespace entsampler {

// Counter-based generator: the n-th draw is a pure function of (key, n), and
// split() derives an independent child stream from a stream id. Every random
// object in the library is produced from one of these, never from global state.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) noexcept;

  Rng split(std::uint64_t stream) const noexcept;
  Rng split(std::string_view label) const noexcept;

  std::uint64_t next_u64() noexcept;
  // Uniform in [0, 1).
  double uniform() noexcept;
  // Uniform integer in [0, bound).
  std::uint64_t below(std::uint64_t bound) noexcept;
  double normal() noexcept;

  std::uint64_t key() const noexcept { return key_; }

 private:
  Rng(std::uint64_t key, int) noexcept : key_(key) {}

  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

std::uint64_t mix64(std::uint64_t x) noexcept;

}  // namespace entsampler
