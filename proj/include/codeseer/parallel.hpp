#ifndef CODESEER_PARALLEL_HPP
#define CODESEER_PARALLEL_HPP

#include <algorithm>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace codeseer {

inline std::size_t resolve_threads(std::size_t requested) {
    if (requested > 0) return requested;
    return std::max<std::size_t>(1, std::thread::hardware_concurrency());
}

/// Runs fn(shard, begin, end) over `threads` contiguous shards of [0, n).
/// Shard boundaries depend only on n and threads, so per-shard results can be
/// reduced in shard order deterministically.
template <class Fn>
void parallel_shards(std::size_t n, std::size_t threads, Fn&& fn) {
    threads = std::max<std::size_t>(1, std::min(threads, n));
    if (threads <= 1) {
        if (n > 0) fn(std::size_t{0}, std::size_t{0}, n);
        return;
    }
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(threads);
    pool.reserve(threads);
    for (std::size_t s = 0; s < threads; ++s) {
        const std::size_t begin = n * s / threads;
        const std::size_t end = n * (s + 1) / threads;
        pool.emplace_back([&, s, begin, end] {
            try {
                fn(s, begin, end);
            } catch (...) {
                errors[s] = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
}

template <class Fn>
void parallel_for(std::size_t n, std::size_t threads, Fn&& fn) {
    parallel_shards(n, threads, [&](std::size_t, std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) fn(i);
    });
}

}  // namespace codeseer

#endif  // CODESEER_PARALLEL_HPP
