// Deterministic data-parallel helper: results are per-index, reductions are
// done by the caller in index order, so output is independent of thread count.
#ifndef ROP_THREADING_HPP
#define ROP_THREADING_HPP

#include <cstdlib>
#include <thread>
#include <vector>

namespace rop {

inline int default_threads() {
    if (const char* env = std::getenv("ROP_THREADS")) {
        const int n = std::atoi(env);
        if (n >= 1) return n;
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

// Runs fn(i) for i in [0, n). fn must only write state owned by index i.
template <class Fn>
void parallel_for(std::size_t n, int threads, Fn&& fn) {
    if (threads <= 0) threads = default_threads();
    if (threads == 1 || n <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    const std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(threads), n);
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            // Contiguous static partition; indices never overlap across workers.
            const std::size_t lo = n * w / workers;
            const std::size_t hi = n * (w + 1) / workers;
            for (std::size_t i = lo; i < hi; ++i) fn(i);
        });
    }
    for (auto& t : pool) t.join();
}

}  // namespace rop

#endif  // ROP_THREADING_HPP
