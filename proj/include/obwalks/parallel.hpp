#pragma once

#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace obwalks {

inline unsigned hardware_threads() {
    unsigned n = std::thread::hardware_concurrency();
    return n ? n : 1;
}

// Static partition of [0, n) over k threads. fn(i) must write only state owned
// by index i; reductions happen after the join, sequentially, so results do
// not depend on k. First worker exception is rethrown on the caller.
template <class Fn>
void parallel_for(std::size_t n, unsigned threads, Fn&& fn) {
    if (n == 0) return;
    std::size_t k = threads ? threads : 1;
    if (k > n) k = n;
    if (k == 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errs(k);
    std::size_t chunk = n / k, rem = n % k, begin = 0;
    pool.reserve(k);
    for (std::size_t w = 0; w < k; ++w) {
        std::size_t len = chunk + (w < rem ? 1 : 0);
        std::size_t b = begin, e = begin + len;
        begin = e;
        pool.emplace_back([&fn, &errs, w, b, e] {
            try {
                for (std::size_t i = b; i < e; ++i) fn(i);
            } catch (...) {
                errs[w] = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    for (auto& ep : errs)
        if (ep) std::rethrow_exception(ep);
}

} // namespace obwalks
