#pragma once

#include <algorithm>
#include <exception>
#include <thread>
#include <vector>

namespace wildsieve {

/// Runs fn(i) for i in [0, n) on up to `threads` workers with a static
/// strided split. Callers write only to per-index slots, so results do not
/// depend on the worker count. The first exception (by worker) is rethrown.
template <typename Fn>
void parallel_for(int n, int threads, Fn&& fn) {
    const int workers = std::clamp(threads, 1, std::max(1, n));
    if (workers == 1) {
        for (int i = 0; i < n; ++i) fn(i);
        return;
    }
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(workers));
    for (int t = 0; t < workers; ++t) {
        pool.emplace_back([&, t] {
            try {
                for (int i = t; i < n; i += workers) fn(i);
            } catch (...) {
                errors[static_cast<std::size_t>(t)] = std::current_exception();
            }
        });
    }
    for (auto& th : pool) th.join();
    for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
}

}  // namespace wildsieve
