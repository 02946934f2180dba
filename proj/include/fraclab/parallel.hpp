#pragma once

#include <cstdint>
#include <cstdlib>
#include <exception>
#include <string>
#include <thread>
#include <vector>

namespace fraclab {

// Worker count resolution: FRACLAB_JOBS > explicit request > hardware.
inline int resolve_jobs(int requested) {
    if (const char* env = std::getenv("FRACLAB_JOBS")) {
        char* end = nullptr;
        long v = std::strtol(env, &end, 10);
        if (end != env && v > 0 && v < 4096) return static_cast<int>(v);
    }
    if (requested > 0) return requested;
    unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? static_cast<int>(hw) : 1;
}

// Runs body(lo, hi, block_index) over contiguous blocks of [0, n).
// Block boundaries depend only on (n, jobs): callers that need reproducible
// results must use order-independent reductions (max/min with total
// tie-breaks, integer sums), never floating-point accumulation order.
template <typename Body>
void parallel_blocks(std::int64_t n, int jobs, Body body) {
    if (n <= 0) return;
    int workers = resolve_jobs(jobs);
    if (static_cast<std::int64_t>(workers) > n) workers = static_cast<int>(n);
    if (workers <= 1) {
        body(std::int64_t{0}, n, 0);
        return;
    }
    std::vector<std::thread> threads;
    threads.reserve(static_cast<std::size_t>(workers - 1));
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(workers));
    std::int64_t base = n / workers;
    std::int64_t rem = n % workers;
    std::int64_t lo = 0;
    for (int b = 0; b < workers; ++b) {
        std::int64_t hi = lo + base + (b < rem ? 1 : 0);
        auto run = [&body, &errors, lo, hi, b]() {
            try {
                body(lo, hi, b);
            } catch (...) {
                errors[static_cast<std::size_t>(b)] = std::current_exception();
            }
        };
        if (b + 1 == workers) {
            run();
        } else {
            threads.emplace_back(run);
        }
        lo = hi;
    }
    for (auto& t : threads) t.join();
    for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
}

template <typename Fn>
void parallel_for(std::int64_t n, int jobs, Fn fn) {
    parallel_blocks(n, jobs, [&fn](std::int64_t lo, std::int64_t hi, int) {
        for (std::int64_t i = lo; i < hi; ++i) fn(i);
    });
}

}  // namespace fraclab
