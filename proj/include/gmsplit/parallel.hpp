#pragma once

#include <atomic>
#include <cstddef>
#include <future>
#include <vector>

namespace gmsplit {

// fn(i) for i in [0, n) on up to `jobs` threads. Work units must be
// independent; results should land in pre-sized slots indexed by i so the
// outcome does not depend on scheduling.
template <typename Fn>
void parallel_for(std::size_t n, std::size_t jobs, Fn&& fn) {
    if (jobs <= 1 || n <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        while (true) {
            const std::size_t i = next.fetch_add(1);
            if (i >= n) break;
            fn(i);
        }
    };
    std::vector<std::future<void>> futures;
    const std::size_t n_threads = jobs < n ? jobs : n;
    futures.reserve(n_threads);
    for (std::size_t t = 0; t < n_threads; ++t) {
        futures.push_back(std::async(std::launch::async, worker));
    }
    for (auto& f : futures) f.get();
}

}  // namespace gmsplit
