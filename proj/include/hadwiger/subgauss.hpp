#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hadwiger/body.hpp"
#include "hadwiger/measure.hpp"
#include "hadwiger/rng.hpp"
#include "hadwiger/stats.hpp"

namespace hadwiger {

inline constexpr std::uint64_t kMinPsiSamples = 10'000;
inline constexpr int kMaxBracketDoublings = 60;

// Empirical mean of exp((|u|/λ)^α) over values already in absolute value.
double psi_mean(std::span<const double> abs_values, double lambda, double alpha);

// Smallest λ with psi_mean(λ) <= 2, by bisection to relative precision
// rel_tol over a bracket grown geometrically from `start` (the L2 norm when
// start <= 0). Throws std::runtime_error when no bracket is found within
// kMaxBracketDoublings doublings, and std::domain_error when every value is 0.
double psi_alpha_of(std::span<const double> abs_values, double alpha, double start = 0.0,
                    double rel_tol = 1e-12);

// Delta-method standard error of psi_alpha_of at its root.
double psi_alpha_stderr(std::span<const double> abs_values, double alpha, double lambda);

struct Psi2Estimate {
  Point direction;  // unit vector
  double alpha = 2.0;
  double lambda_star = 0.0;
  std::uint64_t samples = 0;
  Interval ci;                  // bootstrap percentile interval (95%)
  double mean_at_lambda = 0.0;  // empirical mean of exp((|<X,θ>|/λ*)^α)
};

// ψ_α norm of x ↦ <x, θ/|θ|> under the uniform measure on the body as given
// (no recentring). bootstrap_replicates = 0 collapses the interval to λ*.
Psi2Estimate psi_alpha_norm(const ConvexBody& body, const Point& theta, double alpha,
                            const SampleStream& stream, std::uint64_t samples,
                            int bootstrap_replicates = 100);

// Same estimate on a fixed point cloud (columns).
Psi2Estimate psi_alpha_norm(const Matrix& points, const Point& theta, double alpha,
                            const SampleStream& bootstrap, int bootstrap_replicates = 100);

struct DirectionFraction {
  double b2 = 0.0;
  int trials = 0;
  std::uint64_t passes = 0;
  double fraction = 0.0;
  Interval ci;
  std::optional<double> beta;
  double threshold = 0.0;  // exp(-1/√n), or exp(-1/n^β)
  bool threshold_pass = false;
};

inline constexpr int kMinDirectionTrials = 100;

// Fraction of uniform directions θ with ψ₂(<X,θ>) <= b2, one shared sample of
// the body for all directions.
DirectionFraction direction_fraction(const ConvexBody& body, double b2, int trials,
                                     const SampleStream& stream,
                                     std::optional<double> beta = std::nullopt,
                                     std::uint64_t samples = 100'000);

enum class Marginal { CenteredUniform, Rademacher };
std::string to_string(Marginal marginal);
std::optional<Marginal> parse_marginal(const std::string& name);

// Exact ψ₂ of one summand: U[-1/2, 1/2] or ±1 with probability 1/2.
double marginal_psi2(Marginal marginal);

struct SumRow {
  int N = 1;
  double psi2_sum = 0.0;
  double psi2_sum_se = 0.0;
  double ratio = 0.0;  // ψ₂(X_1 + ... + X_N)² / (N·ψ₂(X_1)²)
  Interval ratio_ci;
};

struct SumCheck {
  Marginal marginal = Marginal::CenteredUniform;
  double psi2_single = 0.0;
  std::uint64_t samples = 0;
  std::vector<SumRow> rows;
  double C_emp = 0.0;  // max ratio over the rows
};

// Row i uses stream.split(N_i).
SumCheck subgaussian_sum_check(Marginal marginal, const std::vector<int>& N_list,
                               const SampleStream& stream, std::uint64_t samples);

struct GluskinSet {
  int n = 0;
  int m = 0;
  bool m_overridden = false;  // default m raised to 2n
  Matrix directions;          // n × m, unit columns
  VolumeEstimate absconv_volume;
  double volume_root = 0.0;  // |absconv|^{1/n}
  std::vector<std::string> warnings;
};

// ⌊n^{3/2}/2⌋, raised to 2n when it does not exceed n.
int gluskin_default_m(int n, bool* overridden = nullptr);

ConvexBody absconv_body(const Matrix& directions);

// Uniform directions. Volumes are exact for n <= 6; above that a Monte Carlo
// estimate with `mc_samples` points is used and a warning recorded.
GluskinSet gluskin_directions(int n, std::optional<int> m, const SampleStream& stream,
                              std::uint64_t mc_samples = 20'000);

// Set built from given directions (normalized). Used by tests to force a
// known configuration.
GluskinSet gluskin_from_directions(const Matrix& directions, const SampleStream& stream,
                                   std::uint64_t mc_samples = 20'000);

// max_i |<x, θ_i>|, the norm whose unit ball is the polar of absconv{θ_i}.
double gluskin_norm(const GluskinSet& set, const Point& x);
double gluskin_norm(const Matrix& directions, const double* x);

struct GluskinScalingRow {
  int n = 0;
  int m = 0;
  int trials = 0;
  double mean_normalized = 0.0;  // mean of |absconv|^{1/n}·n/√(log(m/n))
  double min_normalized = 0.0;
  double stderr_normalized = 0.0;
  double fraction_above = 0.0;  // draws with normalized ratio >= c_emp
  Interval fraction_ci;
};

struct GluskinScaling {
  double c_emp = 0.0;  // half the minimum normalized ratio at the first n
  int calibration_n = 0;
  std::vector<GluskinScalingRow> rows;
};

// n_list[0] is the calibration dimension. Trial t at dimension n uses
// stream.split(n).split(t). m_override replaces the default m for every n.
GluskinScaling gluskin_volume_scaling(const std::vector<int>& n_list, int trials,
                                      const SampleStream& stream,
                                      std::optional<int> m_override = std::nullopt);

// Smallest integer N >= 1 with 2^N > b2²/(C·alpha²).
int select_averaging_depth(double b2, double alpha, double C);

struct WitnessOptions {
  std::optional<double> b2;
  std::optional<double> alpha;
  std::optional<double> C_emp;
  std::optional<int> m;
  std::uint64_t samples = 1'000'000;  // for p_num and p_den each
  std::uint64_t psi_samples = 100'000;
  int b2_directions = 100;
  double b2_quantile = 0.9;
  int resample_budget = 1000;
  std::uint64_t alpha_pilot = 100'000;
  double pilot_quantile = 0.01;
  std::vector<int> calibration_N = {1, 2, 4, 8, 16, 32};
  std::uint64_t calibration_samples = 200'000;
  int max_N = 20;
};

struct WitnessReport {
  int n = 0;
  int m = 0;
  bool m_overridden = false;
  Point center;          // the body is recentred here before anything else
  double volume = 0.0;   // |K|; the quotient is divided by it
  double b2 = 0.0;
  bool b2_fitted = false;
  double alpha = 0.0;
  bool alpha_fitted = false;
  double t = 0.0;
  int N = 1;
  bool N_capped = false;
  double C_emp = 0.0;
  bool C_fitted = false;
  int resamples = 0;  // Gluskin draws until every direction passed
  double acceptance_rate = 0.0;
  bool hypothesis_satisfied = false;
  Matrix directions;
  double absconv_volume = 0.0;
  double absconv_root = 0.0;
  std::uint64_t samples = 0;
  std::uint64_t hits_num = 0;
  std::uint64_t hits_den = 0;
  double p_num = 0.0;
  Interval p_num_ci;
  double p_den = 0.0;
  Interval p_den_ci;
  double density_lb = 0.0;  // p_num / (p_den·|K|)
  Interval density_lb_ci;
  double kb_lb = 0.0;  // 2^{-n}·density_lb^{1/(2^N - 1)}
  Interval kb_lb_ci;
  double fitted_k1 = 0.0;   // b2²·log(2^n·kb_lb)/n
  double tail_bound = 0.0;  // 1 - m·exp(-t²·2^N/(C·b2²))
  std::vector<std::string> notes;
};

WitnessReport witness_pipeline(const ConvexBody& body, const SampleStream& stream,
                               const WitnessOptions& options = {});

}  // namespace hadwiger
