#pragma once

// Deterministic random draws.
//
// std::uniform_real_distribution and std::shuffle are implementation-defined,
// so every draw here is built directly from raw engine bits. Two generator
// styles are provided:
//   - SplitMix64: sequential stream, used for init/shuffling/negative sampling.
//   - sample_stream(): counter-based stream keyed on (seed, index), used where
//     work is distributed across threads and each item must see the same bits
//     regardless of schedule (Monte-Carlo sampling).

#include <cstdint>
#include <vector>

namespace boxel {

inline std::uint64_t splitmix64_next(std::uint64_t& state) {
  state += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() { return splitmix64_next(state_); }

  // Uniform in [0, 1), 53-bit resolution.
  double unit() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Uniform in [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * unit(); }

  // Uniform in (0, hi].
  double positive(double hi) { return hi * (1.0 - unit()); }

  // Uniform integer in [0, bound); bound >= 1. Rejection sampling keeps the
  // draw exactly uniform and platform-independent.
  std::uint64_t below(std::uint64_t bound) {
    const std::uint64_t limit = ~0ULL - (~0ULL % bound);
    std::uint64_t v;
    do {
      v = next_u64();
    } while (v >= limit);
    return v % bound;
  }

 private:
  std::uint64_t state_;
};

// Independent stream for item `index` of a run keyed by `seed`. The first
// next_u64() of two distinct indices are decorrelated by the splitmix64
// finalizer even though the keys are consecutive.
inline SplitMix64 sample_stream(std::uint64_t seed, std::uint64_t index) {
  std::uint64_t k = seed;
  std::uint64_t mixed = splitmix64_next(k) ^ (index * 0xd1342543de82ef95ULL + 0x2545f4914f6cdd1dULL);
  return SplitMix64(mixed);
}

// In-place Fisher-Yates with an explicit generator (std::shuffle is not
// reproducible across standard libraries).
template <typename T>
void deterministic_shuffle(std::vector<T>& v, SplitMix64& rng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    std::size_t j = static_cast<std::size_t>(rng.below(i));
    std::swap(v[i - 1], v[j]);
  }
}

}  // namespace boxel
