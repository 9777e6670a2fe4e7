#pragma once

#include <exception>
#include <thread>
#include <vector>

namespace phi4lab {

// Run fn(i) for i in [0, n) across hardware threads. Callers write results
// into slots indexed by i, so the reduction order (and therefore every
// emitted file) is deterministic regardless of scheduling. Exceptions are
// captured and rethrown on the calling thread.
template <class F>
void parallel_for(int n, F&& fn) {
    unsigned hw = std::thread::hardware_concurrency();
    int workers = static_cast<int>(hw == 0 ? 1 : hw);
    if (workers <= 1 || n <= 1) {
        for (int i = 0; i < n; ++i) fn(i);
        return;
    }
    if (workers > n) workers = n;
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(workers);
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            try {
                for (int i = w; i < n; i += workers) fn(i);
            } catch (...) {
                errors[w] = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

}  // namespace phi4lab
