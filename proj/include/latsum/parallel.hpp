#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <cstdlib>
#include <thread>
#include <vector>

namespace latsum {

namespace detail {
inline std::atomic<int>& thread_cap() {
    static std::atomic<int> cap{0}; // 0 = not yet resolved
    return cap;
}
} // namespace detail

// Worker cap for parallel regions. Resolution order: set_max_threads() if
// called, else LATSUM_THREADS, else hardware concurrency. Always >= 1.
inline int max_threads() {
    int cap = detail::thread_cap().load(std::memory_order_relaxed);
    if (cap > 0) return cap;
    if (const char* env = std::getenv("LATSUM_THREADS")) {
        int v = std::atoi(env);
        if (v >= 1) {
            detail::thread_cap().store(v, std::memory_order_relaxed);
            return v;
        }
    }
    int hw = static_cast<int>(std::thread::hardware_concurrency());
    if (hw < 1) hw = 1;
    detail::thread_cap().store(hw, std::memory_order_relaxed);
    return hw;
}

inline void set_max_threads(int n) {
    detail::thread_cap().store(n >= 1 ? n : 1, std::memory_order_relaxed);
}

// Runs body(i) for i in [0, n). Each index is executed exactly once, on an
// unspecified thread; bodies must write only to disjoint slots, which keeps
// results independent of the thread count. Serial when the cap is 1.
template <class F>
void parallel_for(std::int64_t n, F&& body) {
    if (n <= 0) return;
    const int threads = static_cast<int>(std::min<std::int64_t>(max_threads(), n));
    if (threads <= 1) {
        for (std::int64_t i = 0; i < n; ++i) body(i);
        return;
    }
    std::atomic<std::int64_t> next{0};
    auto worker = [&] {
        for (;;) {
            std::int64_t i = next.fetch_add(1, std::memory_order_relaxed);
            if (i >= n) break;
            body(i);
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(threads) - 1);
    for (int t = 1; t < threads; ++t) pool.emplace_back(worker);
    worker();
    for (auto& th : pool) th.join();
}

} // namespace latsum
