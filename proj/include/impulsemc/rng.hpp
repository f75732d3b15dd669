#pragma once
// Counter-based random number generation.
//
// Every random quantity in the library is a pure function of
// (seed, stream, draw index), so path i is reproducible regardless of how
// many threads simulate other paths, and stages can be rerun in isolation.
// The generator is Philox4x32-10 (Salmon et al., "Parallel random numbers:
// as easy as 1, 2, 3", SC'11); the normal transform is the Wichura AS241
// inverse CDF, accurate to ~1e-15, so no rejection loop disturbs the
// counter bookkeeping.

#include <cstdint>
#include <cmath>
#include <array>

namespace imc::rng {

// SplitMix64 step; used to derive stage seeds from the master seed.
inline std::uint64_t split_seed(std::uint64_t seed, std::uint64_t stage) {
    std::uint64_t z = seed + stage * 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

// Stage tags for split_seed. The pipeline derives one sub-seed per stage so
// each stage is independently reproducible from the master seed.
enum Stage : std::uint64_t {
    kSolverPaths   = 1,
    kBacktestPaths = 2,
    kBaselines     = 3,
};

namespace detail {

constexpr std::uint32_t kPhiloxM0 = 0xD2511F53u;
constexpr std::uint32_t kPhiloxM1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0    = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1    = 0xBB67AE85u;

inline void philox_round(std::array<std::uint32_t, 4>& c, std::uint32_t k0, std::uint32_t k1) {
    const std::uint64_t p0 = static_cast<std::uint64_t>(kPhiloxM0) * c[0];
    const std::uint64_t p1 = static_cast<std::uint64_t>(kPhiloxM1) * c[2];
    c = {static_cast<std::uint32_t>(p1 >> 32) ^ c[1] ^ k0,
         static_cast<std::uint32_t>(p1),
         static_cast<std::uint32_t>(p0 >> 32) ^ c[3] ^ k1,
         static_cast<std::uint32_t>(p0)};
}

}  // namespace detail

// One 128-bit Philox4x32-10 block: counter = (block, stream), key = seed.
inline std::array<std::uint32_t, 4> philox_block(std::uint64_t seed, std::uint64_t stream,
                                                 std::uint64_t block) {
    std::array<std::uint32_t, 4> c = {
        static_cast<std::uint32_t>(block), static_cast<std::uint32_t>(block >> 32),
        static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
    std::uint32_t k0 = static_cast<std::uint32_t>(seed);
    std::uint32_t k1 = static_cast<std::uint32_t>(seed >> 32);
    for (int round = 0; round < 10; ++round) {
        detail::philox_round(c, k0, k1);
        k0 += detail::kWeyl0;
        k1 += detail::kWeyl1;
    }
    return c;
}

// Uniform double in the open interval (0,1); draw index d selects the half
// of block d/2. (x >> 11) + 0.5 spans [0.5, 2^53 - 0.5], so 0 and 1 are
// never returned and log/inverse-CDF transforms are safe.
inline double uniform01(std::uint64_t seed, std::uint64_t stream, std::uint64_t draw) {
    const auto c = philox_block(seed, stream, draw >> 1);
    const int half = static_cast<int>(draw & 1) * 2;
    const std::uint64_t bits =
        (static_cast<std::uint64_t>(c[half]) << 32) | c[half + 1];
    return (static_cast<double>(bits >> 11) + 0.5) * 0x1p-53;
}

// Inverse standard normal CDF, Wichura's algorithm AS241 (PPND16).
double inverse_normal_cdf(double p);

inline double standard_normal(std::uint64_t seed, std::uint64_t stream, std::uint64_t draw) {
    return inverse_normal_cdf(uniform01(seed, stream, draw));
}

}  // namespace imc::rng
