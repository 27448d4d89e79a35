#pragma once

#include <algorithm>
#include <cstdint>
#include <exception>
#include <thread>
#include <vector>

namespace persistlab {

/// Split [0, total) into `workers` contiguous blocks and run
/// `body(worker, begin, end)` for each on its own thread. The caller reduces
/// whatever the bodies write into their per-worker slots, so results never
/// depend on scheduling. The first exception thrown by a worker is rethrown.
template <typename Body>
void parallel_blocks(std::uint64_t total, unsigned workers, Body&& body)
{
    workers = std::max(1u, workers);
    if (workers == 1 || total < 2) {
        body(0u, std::uint64_t{0}, total);
        return;
    }
    std::vector<std::thread> threads;
    std::vector<std::exception_ptr> errors(workers);
    const std::uint64_t chunk = total / workers, extra = total % workers;
    std::uint64_t begin = 0;
    for (unsigned w = 0; w < workers; ++w) {
        const std::uint64_t end = begin + chunk + (w < extra ? 1 : 0);
        threads.emplace_back([&, w, begin, end] {
            try {
                body(w, begin, end);
            } catch (...) {
                errors[w] = std::current_exception();
            }
        });
        begin = end;
    }
    for (auto& t : threads) t.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

inline unsigned default_workers()
{
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1u : hw;
}

} // namespace persistlab
