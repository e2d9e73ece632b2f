#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace uqcal {

inline unsigned default_workers() {
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : hw;
}

// Runs fn(i) for i in [0, n) split into contiguous blocks across `workers`
// threads. Each index is visited exactly once, so writes into index i of a
// results vector are race-free and the outcome is worker-count independent.
template <typename Fn>
void parallel_for(std::size_t n, unsigned workers, Fn&& fn) {
    if (n == 0)
        return;
    if (workers <= 1 || n == 1) {
        for (std::size_t i = 0; i < n; ++i)
            fn(i);
        return;
    }
    const unsigned k = static_cast<unsigned>(std::min<std::size_t>(workers, n));
    std::vector<std::thread> threads;
    threads.reserve(k);
    std::vector<std::exception_ptr> errors(k);
    const std::size_t chunk = (n + k - 1) / k;
    for (unsigned t = 0; t < k; ++t) {
        const std::size_t begin = static_cast<std::size_t>(t) * chunk;
        const std::size_t end = std::min(n, begin + chunk);
        threads.emplace_back([&, t, begin, end] {
            try {
                for (std::size_t i = begin; i < end; ++i)
                    fn(i);
            } catch (...) {
                errors[t] = std::current_exception();
            }
        });
    }
    for (auto& th : threads)
        th.join();
    for (auto& e : errors)
        if (e)
            std::rethrow_exception(e);
}

} // namespace uqcal
