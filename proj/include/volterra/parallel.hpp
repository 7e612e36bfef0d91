#pragma once

#include <algorithm>
#include <thread>
#include <vector>

namespace volterra {

/// Run fn(begin, end) over contiguous chunks of [0, n).  Callers must write to
/// disjoint state per index so the result is independent of scheduling.
template <typename Fn>
void parallel_for(std::ptrdiff_t n, int threads, Fn&& fn) {
    if (n <= 0) return;
    threads = std::max(1, threads);
    const std::ptrdiff_t max_chunks = (n + 63) / 64;
    threads = static_cast<int>(std::min<std::ptrdiff_t>(threads, max_chunks));
    if (threads == 1) {
        fn(std::ptrdiff_t{0}, n);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(threads);
    const std::ptrdiff_t chunk = (n + threads - 1) / threads;
    for (int k = 0; k < threads; ++k) {
        const std::ptrdiff_t lo = k * chunk;
        const std::ptrdiff_t hi = std::min<std::ptrdiff_t>(n, lo + chunk);
        if (lo >= hi) break;
        pool.emplace_back([lo, hi, &fn] { fn(lo, hi); });
    }
    for (auto& t : pool) t.join();
}

}  // namespace volterra
