#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hadwiger/body.hpp"
#include "hadwiger/measure.hpp"
#include "hadwiger/rng.hpp"

namespace hadwiger {

enum class IntersectionMethod { Exact, MonteCarlo };

// Exact path limit for |K ∩ (x - K)|.
inline constexpr int kMaxExactIntersectionDim = 4;

// |K ∩ (x - K)|. Zero when x/2 is not in K, since the convolution 1_K * 1_K
// is supported on 2K. The exact path needs a polytope of dim <= 4.
VolumeEstimate intersection_volume_at(const ConvexBody& body, const Point& x,
                                      IntersectionMethod method, std::uint64_t seed = 1,
                                      std::uint64_t samples = kDefaultVolumeSamples);

struct ConvolutionCheck {
  double direct = 0.0;       // |K ∩ (x - K)| / |K|
  double direct_se = 0.0;
  double convolution = 0.0;  // P(x - Y ∈ K) for Y uniform in K
  double convolution_se = 0.0;
  double z = 0.0;
};

ConvolutionCheck convolution_identity_check(const ConvexBody& body, const Point& x,
                                            const SampleStream& stream, std::uint64_t samples);

struct SymmetryOptions {
  enum class Method { Auto, Exact2d, MonteCarlo };
  Method method = Method::Auto;
  int restarts = 4;
  // Stop a restart when a full sweep raises g^{1/n} by less than this
  // (relative).
  double tol = 1e-4;
  int max_sweeps = 30;
  // Points of Y shared by every evaluation of one search.
  std::uint64_t search_samples = 100'000;
  // Independent re-estimate at the returned maximizer.
  std::uint64_t samples = kDefaultVolumeSamples;
  // Return (2c, 1) immediately when a symmetry center c is known.
  bool use_symmetry = true;
};

struct SymmetryTraceEntry {
  int restart = 0;
  Point x;
  double value = 0.0;  // objective g(x)/|K| after a line search
};

struct SymmetryResult {
  Point x_star;
  double delta_kb = 0.0;
  double std_error = 0.0;
  std::uint64_t evaluations = 0;
  std::string method;  // "symmetric", "exact-2d" or "mc"
  double search_value = 0.0;  // best objective seen during the search
  std::vector<SymmetryTraceEntry> trace;
};

SymmetryResult delta_kb(const ConvexBody& body, const SymmetryOptions& options,
                        const SampleStream& stream);

struct AvgDensityOptions {
  std::uint64_t pilot = 200'000;
  int candidates = 256;
  int mean_shift_steps = 20;
  // Mean shift stops shrinking at pilot^exponent neighbours.
  double mode_neighbor_exponent = 0.9;
  int bootstrap_replicates = 200;
};

struct AvgDensityReport {
  int N = 1;
  double sup_estimate = 0.0;
  double std_error = 0.0;
  Point mode;
  double bandwidth = 0.0;  // radius of the counting ball at the mode
  std::uint64_t neighbors = 0;  // k the bandwidth was tuned for
  std::uint64_t hits = 0;
  std::uint64_t samples = 0;
};

inline constexpr int kMaxDensityDim = 3;

// Sup of the density of S_N = 2^{-N}·(X_1 + ... + X_{2^N}), X_i uniform in K.
AvgDensityReport avg_density_sup(const ConvexBody& body, int N, const SampleStream& stream,
                                 std::uint64_t samples, const AvgDensityOptions& options = {});

struct DensityGridRow {
  Point x;
  double f_sn = 0.0;     // density of S_N at x
  double f_sn_se = 0.0;
  double f_avg = 0.0;    // density of (X+Y)/2 at x
  double f_avg_se = 0.0;
  double f_sum2 = 0.0;   // 2^n · density of X+Y at 2x
  double f_sum2_se = 0.0;
  double rhs = 0.0;      // f_avg^{2^N - 1}
  bool inequality_ok = false;
  bool rescaling_ok = false;
};

struct DensityComparison {
  int N = 1;
  double bandwidth = 0.0;
  double z = 4.0;
  std::vector<DensityGridRow> rows;
  bool all_ok = false;
};

DensityComparison lemma31_check(const ConvexBody& body, int N, const std::vector<Point>& grid,
                                const SampleStream& stream, std::uint64_t samples);

// 2^{-n}·sup^{1/(2^N - 1)}.
double kb_lower_bound_from_avg(const AvgDensityReport& report, int n);

}  // namespace hadwiger
