#pragma once

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <random>
#include <vector>

namespace corrnet {

/// Published description of the generator and stream derivation, recorded
/// next to simulation output.
inline constexpr const char* kRngAlgorithm =
    "mt19937_64 seeded by std::seed_seq{seed & 0xffffffff, seed >> 32, tag...}; "
    "bounded integers by rejection on the top bits";

/// mt19937_64 with integer and real draws defined here rather than by the
/// standard library distributions, so results match across toolchains.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : Rng(seed, {}) {}
    /// Independent stream identified by (seed, tags).
    Rng(std::uint64_t seed, std::initializer_list<std::uint64_t> tags);

    std::uint64_t next() { return engine_(); }
    /// Uniform on [0, n); n must be positive.
    std::size_t below(std::size_t n);
    /// Uniform on [0, 1) with 53 random bits.
    double uniform();

private:
    std::mt19937_64 engine_;
};

/// k distinct values from [0, n), uniformly, in draw order (partial Fisher-Yates).
std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t k, Rng& rng);

} // namespace corrnet
