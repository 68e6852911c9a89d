#pragma once

#include <atomic>
#include <cstdlib>
#include <thread>
#include <vector>

namespace linkforge {

// Worker cap: LINKFORGE_THREADS if set, else hardware concurrency.
inline int worker_count() {
    static const int n = [] {
        if (const char* env = std::getenv("LINKFORGE_THREADS")) {
            const int v = std::atoi(env);
            if (v >= 1) return v;
        }
        const unsigned hc = std::thread::hardware_concurrency();
        return hc ? static_cast<int>(hc) : 1;
    }();
    return n;
}

namespace detail {
inline thread_local bool in_parallel_region = false;
}

// Runs fn(i) for i in [0, n). Callers store results into index-addressed slots
// and reduce afterwards in index order, so the outcome does not depend on
// scheduling. Nested calls degrade to serial.
template <typename F>
void parallel_for(int n, F&& fn) {
    const int workers = worker_count();
    if (n <= 1 || workers <= 1 || detail::in_parallel_region) {
        for (int i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<int> next{0};
    auto body = [&] {
        detail::in_parallel_region = true;
        for (;;) {
            const int i = next.fetch_add(1);
            if (i >= n) break;
            fn(i);
        }
        detail::in_parallel_region = false;
    };
    std::vector<std::thread> pool;
    const int spawn = std::min(workers, n) - 1;
    pool.reserve(spawn);
    for (int t = 0; t < spawn; ++t) pool.emplace_back(body);
    body();
    for (auto& th : pool) th.join();
}

}  // namespace linkforge
