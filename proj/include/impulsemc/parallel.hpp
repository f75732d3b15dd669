#pragma once
// Deterministic block-parallel execution. Work is cut into fixed-size blocks
// whose boundaries do not depend on the thread count, so any per-block
// results can be merged in block order and the total is thread-count
// invariant. Blocks are handed out through an atomic cursor.

#include <atomic>
#include <cstddef>
#include <thread>
#include <vector>

namespace imc {

// Fixed block size for all path-parallel loops; a multiple of the SIMD width.
inline constexpr std::size_t kBlockSize = 8192;

inline std::size_t block_count(std::size_t n, std::size_t block = kBlockSize) {
    return (n + block - 1) / block;
}

inline unsigned resolve_threads(unsigned requested) {
    if (requested != 0) return requested;
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : hw;
}

// fn(block_index, begin, end) with [begin, end) a block of [0, n).
template <typename Fn>
void parallel_blocks(std::size_t n, unsigned threads, Fn&& fn,
                     std::size_t block = kBlockSize) {
    const std::size_t nblocks = block_count(n, block);
    if (nblocks == 0) return;
    threads = resolve_threads(threads);
    if (threads <= 1 || nblocks == 1) {
        for (std::size_t b = 0; b < nblocks; ++b)
            fn(b, b * block, std::min(n, (b + 1) * block));
        return;
    }
    std::atomic<std::size_t> cursor{0};
    auto worker = [&] {
        for (;;) {
            const std::size_t b = cursor.fetch_add(1, std::memory_order_relaxed);
            if (b >= nblocks) return;
            fn(b, b * block, std::min(n, (b + 1) * block));
        }
    };
    std::vector<std::thread> pool;
    const unsigned spawn = static_cast<unsigned>(
        std::min<std::size_t>(threads, nblocks) - 1);
    pool.reserve(spawn);
    for (unsigned i = 0; i < spawn; ++i) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
}

}  // namespace imc
