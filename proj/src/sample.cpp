#include "hadwiger/sample.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

#include "hadwiger/measure.hpp"
#include "hadwiger/parallel.hpp"

namespace hadwiger {

namespace {

// The pilot and the sampling streams must not overlap.
constexpr std::uint64_t kPilotSubstream = 0x70696c6f74ULL;

void random_direction(SampleStream& s, Point& d) {
  double norm = 0.0;
  do {
    for (Eigen::Index j = 0; j < d.size(); ++j) d(j) = s.normal();
    norm = d.norm();
  } while (norm == 0.0);
  d /= norm;
}

}  // namespace

std::string to_string(SamplerMethod method) {
  return method == SamplerMethod::Rejection ? "rejection" : "hit-and-run";
}

UniformSampler::UniformSampler(const ConvexBody& body, const SampleStream& pilot,
                               SamplerOptions options)
    : options_(options) {
  set_ = as_constraints(body);
  box_ = sampling_box(body, set_);
  choose_method(pilot);
}

UniformSampler::UniformSampler(ConstraintSet set, Box box, const SampleStream& pilot,
                               SamplerOptions options)
    : set_(std::move(set)), box_(std::move(box)), options_(options) {
  choose_method(pilot);
}

void UniformSampler::choose_method(const SampleStream& pilot) {
  const int n = set_.dim();
  SampleStream s = pilot.split(kPilotSubstream);
  const Point width = box_.hi - box_.lo;
  std::uint64_t hits = 0;
  Point x(n);
  Point first_hit;
  for (std::uint64_t i = 0; i < options_.pilot_draws; ++i) {
    for (int j = 0; j < n; ++j) x(j) = box_.lo(j) + width(j) * s.uniform();
    if (set_.contains(x.data(), 0.0)) {
      if (hits == 0) first_hit = x;
      ++hits;
    }
  }
  acceptance_ = options_.pilot_draws > 0
                    ? static_cast<double>(hits) / static_cast<double>(options_.pilot_draws)
                    : 0.0;
  if (acceptance_ >= options_.acceptance_floor) {
    method_ = SamplerMethod::Rejection;
    return;
  }
  method_ = SamplerMethod::HitAndRun;
  const Point center = box_.center();
  if (set_.contains(center.data(), 0.0) && set_.max_violation(center) < 0.0) {
    start_ = center;
  } else if (hits > 0) {
    start_ = first_hit;
  } else {
    throw std::domain_error(
        "sample_uniform: acceptance below the floor and no interior start point found");
  }
}

void UniformSampler::draw(SampleStream& stream, std::size_t count, double* out) const {
  const int n = set_.dim();
  if (method_ == SamplerMethod::Rejection) {
    const Point width = box_.hi - box_.lo;
    for (std::size_t k = 0; k < count; ++k) {
      double* x = out + k * n;
      do {
        for (int j = 0; j < n; ++j) x[j] = box_.lo(j) + width(j) * stream.uniform();
      } while (!set_.contains(x, 0.0));
    }
    return;
  }
  Point x = start_;
  Point d(n);
  auto step = [&] {
    random_direction(stream, d);
    const auto [lo, hi] = set_.chord(x, d);
    if (!(hi > lo)) return;
    x += (lo + (hi - lo) * stream.uniform()) * d;
  };
  const long n2 = static_cast<long>(n) * n;
  for (long i = 0; i < options_.burn_in_factor * n2; ++i) step();
  const long thin = std::max(1L, options_.thinning_factor * n2);
  for (std::size_t k = 0; k < count; ++k) {
    for (long i = 0; i < thin; ++i) step();
    std::copy(x.data(), x.data() + n, out + k * n);
  }
}

Matrix UniformSampler::sample(const SampleStream& stream, std::size_t count) const {
  Matrix out(dim(), static_cast<Eigen::Index>(count));
  const std::size_t chunks = chunk_count(count);
  for_each_index(chunks, [&](std::size_t c) {
    SampleStream s = stream.split(c);
    draw(s, chunk_length(count, c), out.data() + c * kChunkSize * dim());
  });
  return out;
}

void UniformSampler::for_each_chunk(
    const SampleStream& stream, std::uint64_t count,
    const std::function<void(std::size_t, const Matrix&)>& fn) const {
  const std::size_t chunks = chunk_count(count);
  for_each_index(chunks, [&](std::size_t c) {
    SampleStream s = stream.split(c);
    const std::size_t len = chunk_length(count, c);
    Matrix pts(dim(), static_cast<Eigen::Index>(len));
    draw(s, len, pts.data());
    fn(c, pts);
  });
}

Matrix sample_uniform(const ConvexBody& body, const SampleStream& stream, std::size_t count,
                      SamplerOptions options) {
  const UniformSampler sampler(body, stream, options);
  return sampler.sample(stream, count);
}

Matrix sample_sphere(int n, const SampleStream& stream, std::size_t count) {
  if (n < 1) throw std::invalid_argument("sample_sphere: n must be at least 1");
  Matrix out(n, static_cast<Eigen::Index>(count));
  const std::size_t chunks = chunk_count(count);
  for_each_index(chunks, [&](std::size_t c) {
    SampleStream s = stream.split(c);
    const std::size_t begin = c * kChunkSize;
    Point d(n);
    for (std::size_t k = 0; k < chunk_length(count, c); ++k) {
      random_direction(s, d);
      out.col(static_cast<Eigen::Index>(begin + k)) = d;
    }
  });
  return out;
}

}  // namespace hadwiger
