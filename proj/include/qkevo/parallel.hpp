#pragma once

#include <algorithm>
#include <cstddef>
#include <thread>
#include <vector>

namespace qkevo {

inline unsigned hardware_threads() {
    const unsigned n = std::thread::hardware_concurrency();
    return n == 0 ? 1 : n;
}

namespace detail {
inline bool& inside_parallel_worker() {
    thread_local bool inside = false;
    return inside;
}
}  // namespace detail

/// Run body(i) for i in [0, n) on up to max_threads threads (0 = all cores).
/// Each index is visited exactly once; the body must only write state owned
/// by its own index so results do not depend on scheduling. Nested calls run
/// serially on the calling worker.
template <typename Body>
void parallel_for(std::size_t n, Body&& body, unsigned max_threads = 0) {
    unsigned threads = max_threads == 0 ? hardware_threads() : max_threads;
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, n));
    if (threads <= 1 || detail::inside_parallel_worker()) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }
    const std::size_t chunk = (n + threads - 1) / threads;
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (unsigned t = 0; t < threads; ++t) {
        const std::size_t begin = static_cast<std::size_t>(t) * chunk;
        const std::size_t end = std::min(n, begin + chunk);
        if (begin >= end) break;
        pool.emplace_back([&body, begin, end] {
            detail::inside_parallel_worker() = true;
            for (std::size_t i = begin; i < end; ++i) body(i);
        });
    }
    for (auto& th : pool) th.join();
}

}  // namespace qkevo
