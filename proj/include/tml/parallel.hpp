#pragma once

#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace tml {

// Thread count: explicit k > 0, else TMLAB_THREADS, else hardware concurrency.
int resolve_threads(int requested = 0);

// Runs f(i) for i in [0, n) over contiguous chunks. The first exception thrown by any
// worker is rethrown on the calling thread.
template <class F>
void parallel_for(std::size_t n, int threads, F&& f) {
    std::size_t k = static_cast<std::size_t>(resolve_threads(threads));
    if (k > n) k = n;
    if (k <= 1) {
        for (std::size_t i = 0; i < n; ++i) f(i);
        return;
    }
    std::exception_ptr err;
    std::mutex mu;
    std::vector<std::thread> pool;
    pool.reserve(k);
    for (std::size_t t = 0; t < k; ++t) {
        std::size_t lo = n * t / k, hi = n * (t + 1) / k;
        pool.emplace_back([&, lo, hi] {
            try {
                for (std::size_t i = lo; i < hi; ++i) f(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(mu);
                if (!err) err = std::current_exception();
            }
        });
    }
    for (auto& th : pool) th.join();
    if (err) std::rethrow_exception(err);
}

}  // namespace tml
