#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hadwiger/body.hpp"
#include "hadwiger/position.hpp"
#include "hadwiger/rng.hpp"
#include "hadwiger/subgauss.hpp"
#include "hadwiger/symmetry.hpp"

namespace hadwiger {

struct RogersBound {
  double factor = 0.0;  // n ln n + n ln ln n + 5n
  double value = 0.0;   // factor · volume ratio
  bool n2_adjusted = false;  // ln ln 2 < 0 replaced by 0
};

RogersBound rogers_bound(int n, double volume_ratio);

struct KbCoveringBound {
  int n = 0;
  double delta_kb = 0.0;
  double lambda = 0.0;              // 1 - 1/n
  double homothety_factor = 0.0;    // ((1 + λ)/λ)^n
  RogersBound rogers;               // at volume ratio 1
  double bound = 0.0;               // homothety_factor · rogers.factor / delta_kb
  double simplified_constant = 0.0;  // bound·delta_kb / 2^n
};

KbCoveringBound kb_covering_bound(int n, double delta_kb);

struct CoveringCertificate {
  ConvexBody body;
  double lambda = 0.0;
  std::vector<Point> centers;
  int count = 0;
  double lattice_spacing = 0.0;
  double verified_resolution = 0.0;
  // Gauges are taken about this interior point; inradius is that of a ball
  // about it inside K.
  Point reference;
  double inradius = 0.0;
  // Each grid node is covered with gauge <= 1 - 1e-9 - margin, which makes
  // the cover strict on all of K, not only at the nodes.
  double margin = 0.0;
  std::uint64_t grid_points = 0;
  bool complete = false;
  std::uint64_t uncovered_count = 0;
  std::vector<Point> uncovered;  // first kMaxListedPoints uncovered nodes
};

inline constexpr double kStrictSlack = 1e-9;
inline constexpr std::size_t kMaxListedPoints = 1000;

// Greedy set cover of the grid nodes of K by homothets c + λ·int(K) with c
// on a cell-centred lattice inside (1 + λ)·K. Incomplete covers are returned
// with complete = false and the uncovered nodes listed.
CoveringCertificate greedy_cover(const ConvexBody& body, double lambda, double lattice_spacing,
                                 double grid_resolution);

struct CoverVerification {
  bool ok = false;
  double resolution = 0.0;
  std::uint64_t grid_points = 0;
  std::uint64_t uncovered_count = 0;
  std::vector<Point> uncovered;
};

// Every grid node of K at the given (finer) resolution must satisfy
// gauge((x - c)/λ) < 1 - 1e-9 for some center c.
CoverVerification verify_cover(const CoveringCertificate& certificate, double resolution);

// The same check for an explicit list of centers.
CoverVerification verify_centers(const ConvexBody& body, double lambda,
                                 const std::vector<Point>& centers, double resolution);

struct HadwigerOptions {
  bool reduce_small_diameter = true;
  IsotropicOptions isotropic;
  SymmetryOptions symmetry;
  WitnessOptions witness;
  int direction_trials = 200;
  std::uint64_t direction_samples = 100'000;
};

struct HadwigerReport {
  int n = 0;
  double L_K = 0.0;
  bool residuals_ok = false;
  bool small_diameter = false;
  double truncated_volume = 0.0;
  double L_Q = 0.0;
  double l_ratio = 0.0;  // fitted L_K / L_Q
  double k_radius = 0.0;  // fitted k with Q ⊆ k·√n·L_Q·B₂ⁿ
  double b2 = 0.0;
  DirectionFraction fraction;
  double delta_kb = 0.0;
  double delta_kb_se = 0.0;
  std::string delta_method;
  WitnessReport witness;
  KbCoveringBound bound;
};

// Isotropic position, optional small-diameter reduction, ψ₂ direction
// fraction on the reduced body, Δ_KB, the witness lower bound and the
// covering bound.
HadwigerReport hadwiger_report(const ConvexBody& body, const SampleStream& stream,
                               const HadwigerOptions& options = {});

}  // namespace hadwiger
