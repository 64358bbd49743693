#pragma once

#include <cstdint>

#include "hadwiger/body.hpp"
#include "hadwiger/measure.hpp"
#include "hadwiger/rng.hpp"
#include "hadwiger/sample.hpp"

namespace hadwiger {

struct Moments {
  Point barycenter;
  Matrix covariance;
  // Jackknife standard errors over 20 interleaved groups.
  Point barycenter_se;
  Matrix covariance_se;
  std::uint64_t samples = 0;
};

inline constexpr std::uint64_t kMinMomentSamples = 1000;

Moments estimate_moments(const ConvexBody& body, const SampleStream& stream, std::uint64_t samples,
                         SamplerOptions sampler = {});
Moments estimate_moments(const UniformSampler& sampler, const SampleStream& stream,
                         std::uint64_t samples);

struct IsotropicOptions {
  std::uint64_t samples = 1'000'000;
  std::uint64_t volume_samples = kDefaultVolumeSamples;
  // Residual thresholds relative to L_K² (covariance) and L_K (barycenter).
  double covariance_tolerance = 0.02;
  double barycenter_tolerance = 0.02;
  // Use the exact center of symmetric bodies instead of the sample mean.
  bool exact_symmetric_center = true;
  SamplerOptions sampler;
};

// x ↦ matrix·x + shift maps the input body to an isotropic body of volume 1.
struct IsotropicReport {
  Matrix matrix;
  Point shift;
  ConvexBody body_iso;
  double L_K = 0.0;
  VolumeEstimate input_volume;
  Moments input_moments;
  // Checked on a fresh sample of body_iso.
  double barycenter_residual = 0.0;
  double covariance_residual = 0.0;
  bool residuals_ok = false;
};

IsotropicReport isotropic_position(const ConvexBody& body, const SampleStream& stream,
                                   const IsotropicOptions& options = {});

// K ∩ √(2n)·L_K·B₂ⁿ for an isotropic K; the ball stays an implicit
// membership constraint.
ConvexBody small_diameter_truncation(const IsotropicReport& report);

struct SmallDiameterReport {
  IsotropicReport first;
  ConvexBody truncated;
  VolumeEstimate truncated_volume;
  IsotropicReport second;
  ConvexBody q;
  double L_Q = 0.0;
  // Q ⊆ k·√n·L_Q·B₂ⁿ; radius_bound = k·√n·L_Q.
  double k = 0.0;
  double radius_bound = 0.0;
  // Fitted constant L_K / L_Q.
  double l_ratio = 0.0;
};

SmallDiameterReport reduce_to_small_diameter(const ConvexBody& body, const SampleStream& stream,
                                             const IsotropicOptions& options = {});

}  // namespace hadwiger
