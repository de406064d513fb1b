#pragma once

#include <atomic>
#include <functional>
#include <thread>
#include <vector>

namespace lagr {

// Runs fn(0..n-1) across `workers` threads (0 = hardware concurrency).
// Each index is processed exactly once; fn must not throw (callers catch and
// record per-item failures themselves), and results must be written to
// per-index slots so the outcome is independent of scheduling.
inline void parallel_for(int n, int workers, const std::function<void(int)>& fn) {
    if (workers <= 0) workers = static_cast<int>(std::thread::hardware_concurrency());
    if (workers < 1) workers = 1;
    if (workers == 1 || n <= 1) {
        for (int i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<int> next{0};
    const int threads = std::min(workers, n);
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (int t = 0; t < threads; ++t) {
        pool.emplace_back([&]() {
            for (;;) {
                const int i = next.fetch_add(1, std::memory_order_relaxed);
                if (i >= n) return;
                fn(i);
            }
        });
    }
    for (std::thread& t : pool) t.join();
}

}  // namespace lagr
