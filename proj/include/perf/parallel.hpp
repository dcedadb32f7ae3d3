#pragma once

#include <algorithm>
#include <cstddef>
#include <thread>
#include <vector>

namespace perf {

/// Number of worker threads used by data-parallel loops (default: hardware concurrency).
void set_worker_count(int n);
int worker_count();

/*
 * Runs fn(i) for i in [0, n). Work is split into contiguous chunks; fn must only
 * write state owned by index i, so results never depend on the worker count.
 */
template <typename Fn>
void parallel_for(std::size_t n, Fn &&fn) {
    auto const workers = static_cast<std::size_t>(std::max(1, worker_count()));
    if (workers == 1 || n < 2) {
        for (std::size_t i = 0; i < n; ++i) {
            fn(i);
        }
        return;
    }
    auto const nthreads = std::min(workers, n);
    std::vector<std::jthread> pool;
    pool.reserve(nthreads);
    for (std::size_t w = 0; w < nthreads; ++w) {
        auto const lo = n * w / nthreads;
        auto const hi = n * (w + 1) / nthreads;
        pool.emplace_back([lo, hi, &fn] {
            for (std::size_t i = lo; i < hi; ++i) {
                fn(i);
            }
        });
    }
}

} // namespace perf
