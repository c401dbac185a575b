#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace qrc {

/// SplitMix64 finalizer. Bijective on 64-bit words.
[[nodiscard]] constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Order-sensitive hash of a list of words, used to derive per-task seeds
/// that do not depend on execution order.
[[nodiscard]] constexpr std::uint64_t mix_seed(std::initializer_list<std::uint64_t> words) noexcept
{
    std::uint64_t h = 0x243f6a8885a308d3ULL;
    for (auto w : words)
        h = splitmix64(h ^ splitmix64(w));
    return h;
}

/// 64-bit engine with a portable [0,1) double: the top 53 bits of each draw.
class Rng
{
  public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  private:
    std::mt19937_64 engine_;
};

} // namespace qrc
