#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string_view>
#include <utility>

namespace citeimpact {

/// Identifier of the pseudo-random algorithm stack, written into run manifests.
/// Bump the suffix whenever any draw below changes, since that changes splits.
inline constexpr std::string_view kPrngAlgorithm =
    "mt19937_64+lemire-bounded+fisher-yates/v1";

/// Seeded generator whose every derived draw is platform independent.
///
/// std::mt19937_64 itself is fully specified by the standard, but the standard
/// distributions and std::shuffle are not, so all derived quantities are
/// computed here.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  /// Uniform integer in [0, bound). bound must be positive.
  std::uint64_t bounded(std::uint64_t bound);

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform();

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Standard normal via Box-Muller.
  double normal();

  template <typename T>
  void shuffle(std::span<T> values) {
    for (std::size_t i = values.size(); i > 1; --i) {
      const auto j = static_cast<std::size_t>(bounded(i));
      std::swap(values[i - 1], values[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
  bool has_spare_normal_ = false;
  double spare_normal_ = 0.0;
};

/// Derives an independent stream seed from a base seed and a salt.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t salt);

}  // namespace citeimpact
