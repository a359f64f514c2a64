#pragma once

#include <array>
#include <cstdint>

namespace bcosad {

/// Seeded xoshiro256** generator.
///
/// The 256-bit state is filled from the 64-bit seed with four successive
/// splitmix64 outputs. uniform() takes the top 53 bits of the next output,
/// normal() uses the Box-Muller transform and caches the second variate.
/// All of this is fixed so that streams can be reproduced from other
/// languages given the same seed.
class Rng {
  public:
    explicit Rng(std::uint64_t seed);

    std::uint64_t seed() const noexcept { return seed_; }

    std::uint64_t next_u64() noexcept;
    /// Uniform on [0, 1).
    double uniform() noexcept;
    /// Uniform on [lo, hi).
    double uniform(double lo, double hi) noexcept;
    /// Uniform integer on [0, n). n must be positive.
    std::uint64_t uniform_index(std::uint64_t n) noexcept;
    /// Standard normal variate.
    double normal() noexcept;

    /// Independent generator for worker `stream`, derived from this seed only.
    Rng child(std::uint64_t stream) const noexcept;

  private:
    std::uint64_t seed_;
    std::array<std::uint64_t, 4> state_{};
    double cached_normal_ = 0.0;
    bool has_cached_normal_ = false;
};

std::uint64_t splitmix64(std::uint64_t& x) noexcept;

}  // namespace bcosad
