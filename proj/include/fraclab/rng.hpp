#pragma once

#include <algorithm>
#include <cstdint>
#include <random>
#include <vector>

namespace fraclab {

// Deterministic RNG wrapper. All randomized code paths draw from this class
// only, so a fixed seed reproduces byte-identical outputs on every platform;
// distribution helpers avoid std::uniform_*_distribution, whose output is
// implementation-defined.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    // Uniform integer in [0, n) via Lemire's multiply-shift rejection.
    std::uint64_t bounded(std::uint64_t n) {
        if (n == 0) return 0;
        while (true) {
            std::uint64_t x = engine_();
            __uint128_t m = static_cast<__uint128_t>(x) * n;
            auto lo = static_cast<std::uint64_t>(m);
            if (lo >= n || lo >= (0ULL - n) % n) return static_cast<std::uint64_t>(m >> 64);
        }
    }

    // Uniform double in [0, 1) using the top 53 bits.
    double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    // k distinct indices from [0, n), ascending (partial Fisher-Yates).
    std::vector<int> sample_indices(int n, int k) {
        if (k >= n) {
            std::vector<int> all(static_cast<std::size_t>(n));
            for (int i = 0; i < n; ++i) all[static_cast<std::size_t>(i)] = i;
            return all;
        }
        std::vector<int> pool(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) pool[static_cast<std::size_t>(i)] = i;
        for (int i = 0; i < k; ++i) {
            auto j = static_cast<std::size_t>(i + static_cast<int>(bounded(static_cast<std::uint64_t>(n - i))));
            std::swap(pool[static_cast<std::size_t>(i)], pool[j]);
        }
        std::vector<int> out(pool.begin(), pool.begin() + k);
        std::sort(out.begin(), out.end());
        return out;
    }

private:
    std::mt19937_64 engine_;
};

}  // namespace fraclab
