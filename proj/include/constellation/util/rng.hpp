#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace constellation {

std::uint64_t splitmix64(std::uint64_t x) noexcept;

// Seed for an independent stream named `purpose`, derived from a run seed.
std::uint64_t derive_seed(std::uint64_t seed, std::string_view purpose) noexcept;

// mt19937_64 with distribution code that does not depend on the standard
// library's (implementation-defined) distributions.
class Rng {
  public:
    explicit Rng(std::uint64_t seed = 0) : eng_(seed) {}

    std::uint64_t next() { return eng_(); }
    // [0, 1)
    double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    // [lo, hi]
    std::int64_t range(std::int64_t lo, std::int64_t hi) {
        auto span = static_cast<std::uint64_t>(hi - lo) + 1;
        return lo + static_cast<std::int64_t>(eng_() % span);
    }
    bool chance(double p) { return uniform() < p; }

  private:
    std::mt19937_64 eng_;
};

}  // namespace constellation
