#pragma once

#include <cstddef>
#include <functional>

namespace hadwiger {

// Worker count: HADWIGER_WORKERS if set and positive, otherwise
// std::thread::hardware_concurrency().
int worker_count();

// Calls fn(i) for every i in [0, count), spread over worker_count() threads.
// Callers write into per-index slots and reduce in index order, so results do
// not depend on the worker count.
void for_each_index(std::size_t count, const std::function<void(std::size_t)>& fn);

// Standard chunk size for Monte Carlo loops. Chunk c of a run always draws
// from stream.split(c).
inline constexpr std::size_t kChunkSize = 1 << 15;

inline std::size_t chunk_count(std::size_t samples) {
  return (samples + kChunkSize - 1) / kChunkSize;
}

inline std::size_t chunk_length(std::size_t samples, std::size_t chunk) {
  const std::size_t begin = chunk * kChunkSize;
  return samples - begin < kChunkSize ? samples - begin : kChunkSize;
}

}  // namespace hadwiger
