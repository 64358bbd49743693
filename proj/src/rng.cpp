#include "hadwiger/rng.hpp"

#include <cmath>
#include <numbers>

namespace hadwiger {

namespace {
constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;
constexpr std::uint64_t kSubstreamSalt = 0x632be59bd9b4e019ULL;
}  // namespace

std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

SampleStream::SampleStream(std::uint64_t seed, std::uint64_t substream)
    : seed_(seed),
      substream_(substream),
      key_(mix64(seed ^ mix64(substream * kGolden + kSubstreamSalt))) {}

SampleStream SampleStream::split(std::uint64_t id) const {
  return SampleStream(seed_, mix64(substream_ * kGolden + id + 1));
}

std::uint64_t SampleStream::next_u64() {
  ++counter_;
  return mix64(key_ + counter_ * kGolden);
}

double SampleStream::uniform() {
  return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
}

double SampleStream::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  const double r = std::sqrt(-2.0 * std::log(uniform()));
  const double phi = 2.0 * std::numbers::pi * uniform();
  spare_ = r * std::sin(phi);
  has_spare_ = true;
  return r * std::cos(phi);
}

std::uint64_t SampleStream::below(std::uint64_t bound) {
  // Lemire's multiply-shift; the bias is below 2^-64 * bound.
  return static_cast<std::uint64_t>(
      (static_cast<unsigned __int128>(next_u64()) * bound) >> 64);
}

}  // namespace hadwiger
