#pragma once

#include <cstdint>

namespace hadwiger {

// Counter-based random stream.
//
// Draw number `counter` of substream `substream` under `seed` is
//
//   key    = mix64(seed ^ mix64(substream * 0x9e3779b97f4a7c15 + 0x632be59bd9b4e019))
//   output = mix64(key + (counter + 1) * 0x9e3779b97f4a7c15)
//
// where mix64 is the SplitMix64 finalizer. Uniform doubles take the top 53
// bits; normals use the Box-Muller transform on two uniforms.
// Everything is integer arithmetic plus std::log/std::sqrt/std::cos, so a
// given (seed, substream, counter) triple reproduces across platforms with a
// conforming libm.
class SampleStream {
 public:
  SampleStream() = default;
  explicit SampleStream(std::uint64_t seed, std::uint64_t substream = 0);

  std::uint64_t seed() const { return seed_; }
  std::uint64_t substream() const { return substream_; }
  std::uint64_t counter() const { return counter_; }

  // Independent child stream. The parent is not advanced.
  SampleStream split(std::uint64_t id) const;

  std::uint64_t next_u64();
  // Uniform on the open interval (0, 1).
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  double normal();
  // Uniform integer in [0, bound).
  std::uint64_t below(std::uint64_t bound);

 private:
  std::uint64_t seed_ = 0;
  std::uint64_t substream_ = 0;
  std::uint64_t key_ = 0;
  std::uint64_t counter_ = 0;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

std::uint64_t mix64(std::uint64_t z);

}  // namespace hadwiger
