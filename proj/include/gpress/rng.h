#pragma once

#include <cstdint>
#include <random>
#include <span>

namespace gpress {

/// One step of the splitmix64 generator. Advances `state` and returns the mixed output.
std::uint64_t splitmix64(std::uint64_t &state);

/// Counter-mode seed expansion: a distinct, reproducible seed for every (stream, index) pair.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream, std::uint64_t index);

/// Seeded random source used by every stochastic operation.
///
/// Wraps std::mt19937_64 (whose output sequence is fully specified by the standard) and
/// implements its own distributions, so sampled values do not depend on the standard
/// library's distribution implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform();

  /// Uniform on {0, ..., bound - 1}; bound must be positive.
  std::uint64_t uniform_below(std::uint64_t bound);

  /// Standard normal via Box-Muller.
  double normal();

  /// Index i with probability weights[i] / sum(weights), by inverse CDF.
  std::size_t sample_index(std::span<const double> weights);

 private:
  std::mt19937_64 engine_;
};

}  // namespace gpress
