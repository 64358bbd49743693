#pragma once

#include <cstdint>
#include <string>

#include "hadwiger/body.hpp"
#include "hadwiger/constraints.hpp"
#include "hadwiger/rng.hpp"

namespace hadwiger {

enum class VolumeMethod { Exact, MonteCarlo };
std::string to_string(VolumeMethod method);

struct VolumeEstimate {
  double value = 0.0;
  VolumeMethod method = VolumeMethod::Exact;
  std::uint64_t samples = 0;
  double std_error = 0.0;
};

inline constexpr int kMaxExactDim = 6;
inline constexpr std::uint64_t kDefaultVolumeSamples = 1'000'000;

// Vertices (columns) of a polytope body with near-duplicates merged at 1e-9.
// H-forms are enumerated by intersecting all n-subsets of facets.
Matrix polytope_vertices(const ConvexBody& poly);

// Facets of conv(points) by brute force over n-subsets. Rows have unit
// normals. Empty when the points do not span a full-dimensional hull.
HPolytope vertex_hull(const Matrix& points);

// Exact volume of a full-dimensional polytope given its vertices and a
// halfspace description whose facets include every facet of the hull.
double cone_volume(const Matrix& vertices, const HPolytope& rows);

// Deterministic exact volume of a polytope body with dim <= 6.
VolumeEstimate exact_polytope_volume(const ConvexBody& poly);

// Rejection sampling from the bounding box. Chunk c draws from
// stream.split(c), so the result depends only on (stream, samples).
VolumeEstimate mc_volume(const ConvexBody& body, std::uint64_t seed, std::uint64_t samples);
VolumeEstimate mc_volume(const ConstraintSet& set, const Box& box, const SampleStream& stream,
                         std::uint64_t samples);

struct VolumeOptions {
  std::uint64_t seed = 1;
  std::uint64_t samples = kDefaultVolumeSamples;
  bool force_monte_carlo = false;
};

// Closed form for balls and their images, exact enumeration for polytopes
// with dim <= 6, Monte Carlo otherwise.
VolumeEstimate volume(const ConvexBody& body, const VolumeOptions& options = {});

// Flattens a body, converting vertex lists to halfspaces with vertex_hull.
ConstraintSet as_constraints(const ConvexBody& body);

// Box of the flattened body, tightened by exact support values when known.
Box sampling_box(const ConvexBody& body, const ConstraintSet& set);

struct VolumeProduct {
  double value = 0.0;  // (|K| |K°|)^{1/n}
  double std_error = 0.0;
  VolumeMethod method = VolumeMethod::Exact;
  VolumeEstimate body;
  VolumeEstimate polar;
};

VolumeProduct volume_product(const ConvexBody& body, const VolumeOptions& options = {});

// Range of (|K| |K°|)^{1/n} over symmetric bodies: the cube/cross-polytope
// value (4^n/n!)^{1/n} and the ball value |B₂ⁿ|^{2/n}.
struct ProductRange {
  double lower = 0.0;
  double upper = 0.0;
};
ProductRange volume_product_range(int dim);

// max ||x||_2 over the body, or an upper bound for intersections.
double circumradius_bound(const ConvexBody& body);

}  // namespace hadwiger
