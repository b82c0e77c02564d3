#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <functional>
#include <thread>
#include <vector>

namespace criss {

// Process-wide worker cap. 0 means "use hardware concurrency".
inline std::atomic<unsigned>& thread_limit() {
    static std::atomic<unsigned> limit{0};
    return limit;
}

inline void set_thread_limit(unsigned n) { thread_limit().store(n); }

inline unsigned effective_threads() {
    unsigned limit = thread_limit().load();
    if (limit == 0) limit = std::max(1u, std::thread::hardware_concurrency());
    return limit;
}

// Static range split across at most effective_threads() workers. Each worker
// owns a contiguous [begin, end) slice and must write only its own outputs;
// results are then independent of scheduling, so thread count never changes
// what gets computed.
inline void parallel_for(std::size_t n,
                         const std::function<void(std::size_t, std::size_t)>& body) {
    if (n == 0) return;
    const std::size_t workers =
        std::min<std::size_t>(effective_threads(), n);
    if (workers <= 1) {
        body(0, n);
        return;
    }
    const std::size_t base = n / workers;
    const std::size_t extra = n % workers;
    std::vector<std::thread> threads;
    threads.reserve(workers);
    std::exception_ptr first_error;
    std::atomic<bool> has_error{false};
    std::size_t begin = 0;
    for (std::size_t w = 0; w < workers; ++w) {
        const std::size_t len = base + (w < extra ? 1 : 0);
        const std::size_t end = begin + len;
        threads.emplace_back([&, begin, end] {
            try {
                body(begin, end);
            } catch (...) {
                if (!has_error.exchange(true)) first_error = std::current_exception();
            }
        });
        begin = end;
    }
    for (auto& t : threads) t.join();
    if (first_error) std::rethrow_exception(first_error);
}

}  // namespace criss
