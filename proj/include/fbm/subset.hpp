#pragma once

#include <bit>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace fbm {

/// Bit set over component indices 0..n-1 (bit i set = component i present).
using Mask = std::uint64_t;

inline constexpr int kMaxComponents = 64;

constexpr Mask full_mask(int n) {
    return n >= 64 ? ~Mask{0} : ((Mask{1} << n) - 1);
}

constexpr bool contains(Mask m, int i) { return (m >> i) & 1u; }

constexpr int cardinality(Mask m) { return std::popcount(m); }

/// Calls fn(i) for every set bit, ascending.
template <class Fn>
constexpr void for_each_member(Mask m, Fn &&fn) {
    while (m) {
        fn(std::countr_zero(m));
        m &= m - 1;
    }
}

inline std::vector<int> members(Mask m) {
    std::vector<int> out;
    out.reserve(cardinality(m));
    for_each_member(m, [&](int i) { out.push_back(i); });
    return out;
}

/// The set A of working components out of N = {0..n-1}.
struct Configuration {
    int n = 0;
    Mask working = 0;

    Configuration() = default;
    Configuration(int n_, Mask working_) : n(n_), working(working_) {
        if (n_ < 1 || n_ > kMaxComponents)
            throw std::invalid_argument("Configuration: component count must be in [1, 64]");
        if ((working_ & ~full_mask(n_)) != 0)
            throw std::invalid_argument("Configuration: working set is not a subset of {0..n-1}");
    }

    static Configuration all(int n) { return {n, full_mask(n)}; }

    Mask failed() const { return full_mask(n) & ~working; }
    int size() const { return cardinality(working); }
    bool empty() const { return working == 0; }
    bool has(int i) const { return contains(working, i); }
};

} // namespace fbm
