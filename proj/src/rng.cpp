#include "corrnet/rng.hpp"

#include "corrnet/error.hpp"

#include <bit>
#include <numeric>

namespace corrnet {

Rng::Rng(std::uint64_t seed, std::initializer_list<std::uint64_t> tags)
{
    std::vector<std::uint32_t> words{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)};
    for (auto t : tags) {
        words.push_back(static_cast<std::uint32_t>(t));
        words.push_back(static_cast<std::uint32_t>(t >> 32));
    }
    std::seed_seq seq(words.begin(), words.end());
    engine_.seed(seq);
}

std::size_t Rng::below(std::size_t n)
{
    if (n == 0)
        throw ValidationError("cannot draw from an empty range");
    if (n == 1)
        return 0;
    const auto bound = static_cast<std::uint64_t>(n - 1);
    const int shift = std::countl_zero(bound);
    while (true) {
        const std::uint64_t v = engine_() >> shift;
        if (v <= bound)
            return static_cast<std::size_t>(v);
    }
}

double Rng::uniform()
{
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t k, Rng& rng)
{
    if (k > n)
        throw ValidationError("cannot draw " + std::to_string(k) + " distinct items from " + std::to_string(n));
    std::vector<std::size_t> pool(n);
    std::iota(pool.begin(), pool.end(), std::size_t{0});
    for (std::size_t i = 0; i < k; ++i)
        std::swap(pool[i], pool[i + rng.below(n - i)]);
    pool.resize(k);
    return pool;
}

} // namespace corrnet
