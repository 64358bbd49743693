#pragma once

#include <cstdint>
#include <functional>
#include <string>

#include "hadwiger/body.hpp"
#include "hadwiger/constraints.hpp"
#include "hadwiger/rng.hpp"

namespace hadwiger {

enum class SamplerMethod { Rejection, HitAndRun };
std::string to_string(SamplerMethod method);

struct SamplerOptions {
  // Rejection from the bounding box is used when the pilot acceptance rate is
  // at least this.
  double acceptance_floor = 1e-3;
  std::uint64_t pilot_draws = 4096;
  // Hit-and-run burn-in is burn_in_factor·n² steps and every retained point
  // is separated by thinning_factor·n² steps.
  int burn_in_factor = 10;
  int thinning_factor = 1;
};

// Uniform sampler over a flattened body. The method is fixed at construction
// from a pilot run; draws are then pure functions of the stream passed in.
class UniformSampler {
 public:
  UniformSampler(const ConvexBody& body, const SampleStream& pilot, SamplerOptions options = {});
  UniformSampler(ConstraintSet set, Box box, const SampleStream& pilot,
                 SamplerOptions options = {});

  int dim() const { return set_.dim(); }
  SamplerMethod method() const { return method_; }
  double pilot_acceptance() const { return acceptance_; }
  const ConstraintSet& constraints() const { return set_; }
  const Box& box() const { return box_; }

  // Writes `count` points into `out` (dim × count, column-major).
  void draw(SampleStream& stream, std::size_t count, double* out) const;

  // `count` points as matrix columns. Chunk c of kChunkSize points comes from
  // stream.split(c), so the result does not depend on the worker count.
  Matrix sample(const SampleStream& stream, std::size_t count) const;

  // Streams the same points as sample() chunk by chunk, in parallel. The
  // callback receives the chunk index and its points and must only write to
  // per-chunk state.
  void for_each_chunk(const SampleStream& stream, std::uint64_t count,
                      const std::function<void(std::size_t, const Matrix&)>& fn) const;

 private:
  void choose_method(const SampleStream& pilot);

  ConstraintSet set_;
  Box box_;
  SamplerOptions options_;
  SamplerMethod method_ = SamplerMethod::Rejection;
  double acceptance_ = 0.0;
  Point start_;
};

Matrix sample_uniform(const ConvexBody& body, const SampleStream& stream, std::size_t count,
                      SamplerOptions options = {});

// Normalized Gaussian vectors, one per column.
Matrix sample_sphere(int n, const SampleStream& stream, std::size_t count);

}  // namespace hadwiger
