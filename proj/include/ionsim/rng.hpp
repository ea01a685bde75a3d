#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <thread>
#include <vector>

namespace ionsim::rng {

// splitmix64 (Steele, Lea, Flood 2014); used to derive stream seeds.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d4a06cb9a1d1a5ULL;
  return x ^ (x >> 31);
}

// Seed for stream `index` derived from a single global seed. Streams are
// indexed, not counted off a shared generator, so the mapping does not
// depend on evaluation order or thread count.
inline std::uint64_t derive_seed(std::uint64_t global_seed, std::uint64_t index) {
  return splitmix64(global_seed ^ splitmix64(index));
}

inline std::mt19937_64 make_engine(std::uint64_t global_seed, std::uint64_t index) {
  return std::mt19937_64(derive_seed(global_seed, index));
}

// Fixed shot-block size for parallel Monte Carlo. Each block gets its own
// derived seed, so results are identical for any worker count.
inline constexpr std::size_t kShotBlock = 4096;

inline std::size_t block_count(std::size_t shots) {
  return (shots + kShotBlock - 1) / kShotBlock;
}

// Runs fn(block_index, shots_in_block, engine) for every shot block,
// distributing blocks over hardware threads. The caller keeps per-block
// accumulators and merges them in block order afterwards.
inline void parallel_shot_blocks(std::size_t shots, std::uint64_t global_seed,
                                 const std::function<void(std::size_t, std::size_t,
                                                          std::mt19937_64&)>& fn) {
  const std::size_t nblocks = block_count(shots);
  std::size_t nthreads = std::thread::hardware_concurrency();
  if (nthreads == 0) nthreads = 1;
  if (nthreads > nblocks) nthreads = nblocks;
  if (nthreads <= 1) {
    for (std::size_t b = 0; b < nblocks; ++b) {
      std::size_t n = (b + 1 == nblocks) ? shots - b * kShotBlock : kShotBlock;
      auto eng = make_engine(global_seed, b);
      fn(b, n, eng);
    }
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(nthreads);
  for (std::size_t t = 0; t < nthreads; ++t) {
    pool.emplace_back([&, t]() {
      for (std::size_t b = t; b < nblocks; b += nthreads) {
        std::size_t n = (b + 1 == nblocks) ? shots - b * kShotBlock : kShotBlock;
        auto eng = make_engine(global_seed, b);
        fn(b, n, eng);
      }
    });
  }
  for (auto& th : pool) th.join();
}

} // namespace ionsim::rng
