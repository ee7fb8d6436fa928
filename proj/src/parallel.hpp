#ifndef QSCAT_SRC_PARALLEL_HPP
#define QSCAT_SRC_PARALLEL_HPP

#include <algorithm>
#include <cstddef>
#include <thread>
#include <vector>

namespace qscat::detail {

// Index-partitioned parallel map; results are written by index so the output
// does not depend on the thread count.
template <typename Fn>
void parallel_for(std::size_t n, int threads, Fn&& fn) {
    if (threads <= 1 || n <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    const int t = std::min<std::size_t>(threads, n);
    std::vector<std::thread> pool;
    pool.reserve(t);
    for (int w = 0; w < t; ++w) {
        pool.emplace_back([&, w] {
            for (std::size_t i = w; i < n; i += t) fn(i);
        });
    }
    for (auto& th : pool) th.join();
}

} // namespace qscat::detail

#endif
