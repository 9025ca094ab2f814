#pragma once

#include <atomic>
#include <cstddef>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace metlearn {

/// Runs fn(i) for i in [0, n) across hardware threads. Each index must be
/// independent; callers write results into per-index slots so the outcome
/// does not depend on scheduling.
inline void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn) {
    const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    if (n <= 1 || hw == 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> workers;
    const unsigned count = static_cast<unsigned>(std::min<std::size_t>(hw, n));
    workers.reserve(count);
    std::exception_ptr error;
    std::mutex error_mu;
    for (unsigned t = 0; t < count; ++t) {
        workers.emplace_back([&] {
            for (;;) {
                const std::size_t i = next.fetch_add(1);
                if (i >= n) return;
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(error_mu);
                    if (!error) error = std::current_exception();
                }
            }
        });
    }
    for (auto& w : workers) w.join();
    if (error) std::rethrow_exception(error);
}

}  // namespace metlearn
