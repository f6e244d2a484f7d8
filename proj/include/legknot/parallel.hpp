#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace legknot {

inline int default_threads() { return std::max(1u, std::thread::hardware_concurrency()); }

// Runs fn(i) for i in [0, n) on contiguous blocks. Each index is written by one
// thread only, so results do not depend on the thread count.
template <class Fn>
void parallel_for(std::size_t n, int threads, Fn&& fn) {
    std::size_t T = std::min<std::size_t>(std::max(1, threads), std::max<std::size_t>(n, 1));
    if (T <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::exception_ptr first;
    std::mutex m;
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < T; ++w) {
        std::size_t lo = n * w / T, hi = n * (w + 1) / T;
        pool.emplace_back([&, lo, hi] {
            try {
                for (std::size_t i = lo; i < hi; ++i) fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> g(m);
                if (!first) first = std::current_exception();
            }
        });
    }
    for (auto& th : pool) th.join();
    if (first) std::rethrow_exception(first);
}

} // namespace legknot
