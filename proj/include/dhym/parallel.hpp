#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <mutex>
#include <random>
#include <thread>
#include <vector>

namespace dhym {

/// Worker count: the DHYM_THREADS environment variable if set and positive, otherwise the hardware count.
std::size_t thread_count();

/// Deterministic generator for one work chunk; independent of how chunks map to threads.
std::mt19937_64 chunk_rng(std::uint64_t seed, std::uint64_t chunk);

/// Runs fn(chunk) for chunk in [0, chunks) on up to thread_count() workers.
/// The first exception thrown by any chunk is rethrown after all workers finish.
template <class Fn>
void parallel_chunks(std::size_t chunks, Fn&& fn) {
    const std::size_t workers = std::min(thread_count(), chunks);
    if (workers <= 1) {
        for (std::size_t c = 0; c < chunks; ++c) fn(c);
        return;
    }
    std::exception_ptr error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            for (std::size_t c = w; c < chunks; c += workers) {
                try {
                    fn(c);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(error_mutex);
                    if (!error) error = std::current_exception();
                    return;
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

}  // namespace dhym
