#pragma once

#include <cstddef>
#include <thread>
#include <vector>

namespace sightline {

/// Resolves a thread-count request: 0 means "use hardware concurrency".
inline int resolve_threads(int requested) {
    if (requested > 0) return requested;
    const unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? static_cast<int>(hw) : 1;
}

/// Runs fn(begin, end) over disjoint chunks of [0, n). Results must not
/// depend on the partition: chunks may only touch their own output range.
template <typename Fn>
void parallel_for(std::size_t n, int threads, Fn&& fn) {
    const int t = resolve_threads(threads);
    if (n == 0) return;
    if (t <= 1 || n == 1) {
        fn(std::size_t{0}, n);
        return;
    }
    const std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(t), n);
    const std::size_t chunk = (n + workers - 1) / workers;
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        const std::size_t begin = w * chunk;
        const std::size_t end = std::min(n, begin + chunk);
        if (begin >= end) break;
        pool.emplace_back([&fn, begin, end] { fn(begin, end); });
    }
    for (auto& th : pool) th.join();
}

}  // namespace sightline
