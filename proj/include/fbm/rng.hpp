#pragma once

#include <cstdint>
#include <random>

namespace fbm {

using Rng = std::mt19937_64;

/// Generator for one fixed-size block of a seeded stream. The stream for
/// (seed, block) is independent of how blocks are scheduled across workers.
inline Rng block_rng(std::uint64_t seed, std::uint64_t block) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(block), static_cast<std::uint32_t>(block >> 32),
                      0x66626d5fu};
    return Rng(seq);
}

} // namespace fbm
