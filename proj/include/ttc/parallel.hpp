#pragma once

#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <utility>
#include <vector>

namespace ttc {

// ─── Deterministic parallel loop ────────────────────────────────────────────
//
// Runs fn(i) for every i in [0, n). Work items are claimed from an atomic
// counter, so the schedule varies between runs — but callers only pass
// functions whose result for index i depends on nothing but i (each item
// writes its own output slot and draws from its own RngStream). Under that
// contract the program output is identical for any worker count.
//
// The first exception thrown by any item is rethrown on the calling thread
// after all workers join.
template <typename Fn>
void parallel_for(std::size_t n, int workers, Fn&& fn) {
    if (n == 0) {
        return;
    }
    if (workers < 1) {
        workers = 1;
    }
    if (static_cast<std::size_t>(workers) > n) {
        workers = static_cast<int>(n);
    }
    if (workers == 1) {
        for (std::size_t i = 0; i < n; ++i) {
            fn(i);
        }
        return;
    }

    std::atomic<std::size_t> next{0};
    std::atomic<bool> failed{false};
    std::exception_ptr first_error;
    std::mutex error_mutex;

    auto worker = [&]() {
        for (;;) {
            const std::size_t i = next.fetch_add(1, std::memory_order_relaxed);
            if (i >= n || failed.load(std::memory_order_relaxed)) {
                return;
            }
            try {
                fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!first_error) {
                    first_error = std::current_exception();
                }
                failed.store(true, std::memory_order_relaxed);
                return;
            }
        }
    };

    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back(worker);
    }
    for (auto& t : pool) {
        t.join();
    }
    if (first_error) {
        std::rethrow_exception(first_error);
    }
}

} // namespace ttc
