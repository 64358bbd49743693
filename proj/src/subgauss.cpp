#include "hadwiger/subgauss.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "hadwiger/parallel.hpp"
#include "hadwiger/position.hpp"
#include "hadwiger/sample.hpp"

namespace hadwiger {

namespace {

double l2_norm(std::span<const double> u) {
  double s = 0.0;
  for (double v : u) s += v * v;
  return std::sqrt(s / static_cast<double>(u.size()));
}

std::vector<double> abs_projection(const Matrix& points, const Point& unit) {
  std::vector<double> u(static_cast<std::size_t>(points.cols()));
  Eigen::Map<Eigen::VectorXd>(u.data(), points.cols()) =
      (points.transpose() * unit).cwiseAbs();
  return u;
}

double quantile_sorted(const std::vector<double>& sorted, double q) {
  if (sorted.empty()) throw std::invalid_argument("quantile of an empty sample");
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const std::size_t i = static_cast<std::size_t>(std::floor(pos));
  if (i + 1 >= sorted.size()) return sorted.back();
  const double frac = pos - static_cast<double>(i);
  return sorted[i] + frac * (sorted[i + 1] - sorted[i]);
}

Point unit_direction(const Point& theta, const char* where) {
  const double norm = theta.norm();
  if (!(norm > 0.0) || !std::isfinite(norm)) {
    throw std::invalid_argument(std::string(where) + ": direction must be nonzero");
  }
  return theta / norm;
}

double log_sqrt_n(int n) { return std::log(std::sqrt(static_cast<double>(n))); }

// mean of exp((x/λ)²) for x ~ U[-1/2, 1/2] as the series
// Σ a^{2k} / (k!·(2k+1)) with a = 1/(2λ).
double uniform_psi2_mean(double lambda) {
  const double a2 = 1.0 / (4.0 * lambda * lambda);
  double term = 1.0;
  double sum = 1.0;
  for (int k = 1; k < 400; ++k) {
    term *= a2 / k;
    const double add = term / (2.0 * k + 1.0);
    sum += add;
    if (add < 1e-17 * sum) break;
  }
  return sum;
}

}  // namespace

double psi_mean(std::span<const double> abs_values, double lambda, double alpha) {
  double sum = 0.0;
  if (alpha == 2.0) {
    const double inv = 1.0 / (lambda * lambda);
    for (double u : abs_values) sum += std::exp(u * u * inv);
  } else {
    const double inv = 1.0 / lambda;
    for (double u : abs_values) sum += std::exp(std::pow(u * inv, alpha));
  }
  return sum / static_cast<double>(abs_values.size());
}

double psi_alpha_of(std::span<const double> abs_values, double alpha, double start,
                    double rel_tol) {
  if (abs_values.empty()) throw std::invalid_argument("psi_alpha_of: no values");
  if (!(alpha >= 1.0)) throw std::invalid_argument("psi_alpha_of: alpha must be at least 1");
  if (!(start > 0.0)) start = l2_norm(abs_values);
  if (!(start > 0.0)) throw std::domain_error("psi_alpha_of: all values are zero");

  double lo = start;
  double hi = start;
  if (psi_mean(abs_values, start, alpha) > 2.0) {
    int k = 0;
    do {
      lo = hi;
      hi *= 2.0;
      if (++k > kMaxBracketDoublings) {
        throw std::runtime_error("psi_alpha_of: bracket not found (heavy tail for this alpha)");
      }
    } while (psi_mean(abs_values, hi, alpha) > 2.0);
  } else {
    int k = 0;
    do {
      hi = lo;
      lo *= 0.5;
      if (++k > kMaxBracketDoublings) {
        throw std::runtime_error("psi_alpha_of: bracket not found below the start value");
      }
    } while (psi_mean(abs_values, lo, alpha) <= 2.0);
  }
  // Invariant: mean(lo) > 2 >= mean(hi).
  while (hi - lo > rel_tol * hi) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (psi_mean(abs_values, mid, alpha) > 2.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return hi;
}

double psi_alpha_stderr(std::span<const double> abs_values, double alpha, double lambda) {
  const double m = static_cast<double>(abs_values.size());
  double s = 0.0, s2 = 0.0, d = 0.0;
  for (double u : abs_values) {
    const double p = std::pow(u / lambda, alpha);
    const double g = std::exp(p);
    s += g;
    s2 += g * g;
    d += alpha * p * g / lambda;
  }
  const double mean = s / m;
  const double var = std::max(0.0, s2 / m - mean * mean);
  const double slope = d / m;  // |dF/dλ|
  if (!(slope > 0.0)) return 0.0;
  return std::sqrt(var / m) / slope;
}

Psi2Estimate psi_alpha_norm(const Matrix& points, const Point& theta, double alpha,
                            const SampleStream& bootstrap, int bootstrap_replicates) {
  if (!(alpha >= 1.0)) throw std::invalid_argument("psi_alpha_norm: alpha must be at least 1");
  if (theta.size() != points.rows()) {
    throw std::invalid_argument("psi_alpha_norm: direction has the wrong dimension");
  }
  if (static_cast<std::uint64_t>(points.cols()) < kMinPsiSamples) {
    throw std::invalid_argument("psi_alpha_norm: at least 10^4 samples are required");
  }
  Psi2Estimate est;
  est.direction = unit_direction(theta, "psi_alpha_norm");
  est.alpha = alpha;
  est.samples = static_cast<std::uint64_t>(points.cols());
  const std::vector<double> u = abs_projection(points, est.direction);
  est.lambda_star = psi_alpha_of(u, alpha);
  est.mean_at_lambda = psi_mean(u, est.lambda_star, alpha);
  est.ci = {est.lambda_star, est.lambda_star};
  if (bootstrap_replicates <= 0) return est;

  std::vector<double> boot(static_cast<std::size_t>(bootstrap_replicates));
  for_each_index(boot.size(), [&](std::size_t b) {
    SampleStream s = bootstrap.split(b);
    std::vector<double> r(u.size());
    for (double& v : r) v = u[s.below(u.size())];
    boot[b] = psi_alpha_of(r, alpha, est.lambda_star, 1e-8);
  });
  std::sort(boot.begin(), boot.end());
  est.ci = {quantile_sorted(boot, 0.025), quantile_sorted(boot, 0.975)};
  return est;
}

Psi2Estimate psi_alpha_norm(const ConvexBody& body, const Point& theta, double alpha,
                            const SampleStream& stream, std::uint64_t samples,
                            int bootstrap_replicates) {
  if (samples < kMinPsiSamples) {
    throw std::invalid_argument("psi_alpha_norm: at least 10^4 samples are required");
  }
  if (theta.size() != body.dim()) {
    throw std::invalid_argument("psi_alpha_norm: direction has the wrong dimension");
  }
  const UniformSampler sampler(body, stream.split(1));
  const Matrix points = sampler.sample(stream.split(2), samples);
  return psi_alpha_norm(points, theta, alpha, stream.split(3), bootstrap_replicates);
}

DirectionFraction direction_fraction(const ConvexBody& body, double b2, int trials,
                                     const SampleStream& stream, std::optional<double> beta,
                                     std::uint64_t samples) {
  if (trials < kMinDirectionTrials) {
    throw std::invalid_argument("direction_fraction: at least 100 trials are required");
  }
  if (!(b2 > 0.0)) throw std::invalid_argument("direction_fraction: b2 must be positive");
  if (samples < kMinPsiSamples) {
    throw std::invalid_argument("direction_fraction: at least 10^4 samples are required");
  }
  const int n = body.dim();
  const UniformSampler sampler(body, stream.split(1));
  const Matrix points = sampler.sample(stream.split(2), samples);
  const Matrix dirs = sample_sphere(n, stream.split(3), static_cast<std::size_t>(trials));

  std::vector<char> pass(static_cast<std::size_t>(trials), 0);
  for_each_index(pass.size(), [&](std::size_t k) {
    const std::vector<double> u = abs_projection(points, dirs.col(static_cast<Eigen::Index>(k)));
    // ψ₂ <= b2 exactly when the mean at b2 does not exceed 2.
    pass[k] = psi_mean(u, b2, 2.0) <= 2.0 ? 1 : 0;
  });

  DirectionFraction out;
  out.b2 = b2;
  out.trials = trials;
  out.passes = static_cast<std::uint64_t>(std::count(pass.begin(), pass.end(), 1));
  out.fraction = static_cast<double>(out.passes) / trials;
  out.ci = wilson_interval(out.passes, static_cast<std::uint64_t>(trials));
  out.beta = beta;
  out.threshold = beta ? std::exp(-1.0 / std::pow(static_cast<double>(n), *beta))
                       : std::exp(-1.0 / std::sqrt(static_cast<double>(n)));
  out.threshold_pass = out.fraction >= out.threshold;
  return out;
}

std::string to_string(Marginal marginal) {
  return marginal == Marginal::CenteredUniform ? "centered-uniform" : "rademacher";
}

std::optional<Marginal> parse_marginal(const std::string& name) {
  if (name == "centered-uniform" || name == "uniform") return Marginal::CenteredUniform;
  if (name == "rademacher") return Marginal::Rademacher;
  return std::nullopt;
}

double marginal_psi2(Marginal marginal) {
  if (marginal == Marginal::Rademacher) return 1.0 / std::sqrt(std::log(2.0));
  double lo = 0.1, hi = 2.0;
  while (hi - lo > 1e-15 * hi) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    (uniform_psi2_mean(mid) > 2.0 ? lo : hi) = mid;
  }
  return hi;
}

SumCheck subgaussian_sum_check(Marginal marginal, const std::vector<int>& N_list,
                               const SampleStream& stream, std::uint64_t samples) {
  if (N_list.empty()) throw std::invalid_argument("subgaussian_sum_check: empty N list");
  if (samples < kMinPsiSamples) {
    throw std::invalid_argument("subgaussian_sum_check: at least 10^4 samples are required");
  }
  for (int N : N_list) {
    if (N < 1) throw std::invalid_argument("subgaussian_sum_check: N must be at least 1");
  }
  SumCheck out;
  out.marginal = marginal;
  out.samples = samples;
  out.psi2_single = marginal_psi2(marginal);
  const double base = out.psi2_single * out.psi2_single;

  for (int N : N_list) {
    const SampleStream s = stream.split(static_cast<std::uint64_t>(N));
    std::vector<double> u(samples);
    for_each_index(chunk_count(samples), [&](std::size_t c) {
      SampleStream cs = s.split(c);
      const std::size_t begin = c * kChunkSize;
      const std::size_t len = chunk_length(samples, c);
      for (std::size_t k = 0; k < len; ++k) {
        double sum = 0.0;
        for (int i = 0; i < N; ++i) {
          if (marginal == Marginal::CenteredUniform) {
            sum += cs.uniform() - 0.5;
          } else {
            sum += (cs.next_u64() >> 63) ? 1.0 : -1.0;
          }
        }
        u[begin + k] = std::abs(sum);
      }
    });
    SumRow row;
    row.N = N;
    row.psi2_sum = psi_alpha_of(u, 2.0);
    row.psi2_sum_se = psi_alpha_stderr(u, 2.0, row.psi2_sum);
    row.ratio = row.psi2_sum * row.psi2_sum / (N * base);
    const double lo = std::max(0.0, row.psi2_sum - kZ95 * row.psi2_sum_se);
    const double hi = row.psi2_sum + kZ95 * row.psi2_sum_se;
    row.ratio_ci = {lo * lo / (N * base), hi * hi / (N * base)};
    out.C_emp = std::max(out.C_emp, row.ratio);
    out.rows.push_back(row);
  }
  return out;
}

int gluskin_default_m(int n, bool* overridden) {
  if (n < 2) throw std::invalid_argument("gluskin: n must be at least 2");
  const int m = static_cast<int>(std::floor(std::pow(static_cast<double>(n), 1.5) / 2.0));
  const bool raise = m <= n;
  if (overridden) *overridden = raise;
  return raise ? 2 * n : m;
}

ConvexBody absconv_body(const Matrix& directions) {
  Matrix v(directions.rows(), 2 * directions.cols());
  v << directions, -directions;
  return ConvexBody::vpolytope(v);
}

GluskinSet gluskin_from_directions(const Matrix& directions, const SampleStream& stream,
                                   std::uint64_t mc_samples) {
  const int n = static_cast<int>(directions.rows());
  const int m = static_cast<int>(directions.cols());
  if (n < 2) throw std::invalid_argument("gluskin: n must be at least 2");
  if (m < n) throw std::invalid_argument("gluskin: need at least n directions");
  GluskinSet set;
  set.n = n;
  set.m = m;
  set.directions = directions;
  for (int i = 0; i < m; ++i) {
    const double norm = directions.col(i).norm();
    if (!(norm > 0.0)) throw std::invalid_argument("gluskin: zero direction");
    set.directions.col(i) /= norm;
  }
  const ConvexBody body = absconv_body(set.directions);
  if (n <= kMaxExactDim) {
    set.absconv_volume = exact_polytope_volume(body);
  } else {
    set.warnings.push_back("absconv volume by Monte Carlo (n > 6)");
    Box box;
    box.hi = set.directions.cwiseAbs().rowwise().maxCoeff();
    box.lo = -box.hi;
    std::vector<std::uint64_t> hits(chunk_count(mc_samples), 0);
    for_each_index(hits.size(), [&](std::size_t c) {
      SampleStream s = stream.split(c);
      Point x(n);
      for (std::size_t k = 0; k < chunk_length(mc_samples, c); ++k) {
        for (int j = 0; j < n; ++j) x(j) = s.uniform(box.lo(j), box.hi(j));
        if (contains(body, x, 0.0)) ++hits[c];
      }
    });
    const double p = static_cast<double>(std::accumulate(hits.begin(), hits.end(), 0ULL)) /
                     static_cast<double>(mc_samples);
    set.absconv_volume.method = VolumeMethod::MonteCarlo;
    set.absconv_volume.samples = mc_samples;
    set.absconv_volume.value = p * box.volume();
    set.absconv_volume.std_error =
        box.volume() * std::sqrt(p * (1.0 - p) / static_cast<double>(mc_samples));
  }
  set.volume_root = std::pow(set.absconv_volume.value, 1.0 / n);
  return set;
}

GluskinSet gluskin_directions(int n, std::optional<int> m, const SampleStream& stream,
                              std::uint64_t mc_samples) {
  bool overridden = false;
  const int count = m ? *m : gluskin_default_m(n, &overridden);
  if (count < n) throw std::invalid_argument("gluskin: m must be at least n");
  const Matrix dirs = sample_sphere(n, stream.split(1), static_cast<std::size_t>(count));
  GluskinSet set = gluskin_from_directions(dirs, stream.split(2), mc_samples);
  set.m_overridden = overridden;
  return set;
}

double gluskin_norm(const Matrix& directions, const double* x) {
  double best = 0.0;
  const Eigen::Index n = directions.rows();
  for (Eigen::Index i = 0; i < directions.cols(); ++i) {
    const double* t = directions.col(i).data();
    double dot = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) dot += t[j] * x[j];
    best = std::max(best, std::abs(dot));
  }
  return best;
}

double gluskin_norm(const GluskinSet& set, const Point& x) {
  if (x.size() != set.n) throw std::invalid_argument("gluskin_norm: dimension mismatch");
  return gluskin_norm(set.directions, x.data());
}

GluskinScaling gluskin_volume_scaling(const std::vector<int>& n_list, int trials,
                                      const SampleStream& stream, std::optional<int> m_override) {
  if (n_list.empty()) throw std::invalid_argument("gluskin_volume_scaling: empty n list");
  if (trials < 1) throw std::invalid_argument("gluskin_volume_scaling: trials must be positive");
  for (int n : n_list) {
    if (n < 2 || n > kMaxExactDim) {
      throw std::invalid_argument("gluskin_volume_scaling: every n must be in [2, 6]");
    }
  }
  GluskinScaling out;
  out.calibration_n = n_list.front();
  std::vector<std::vector<double>> normalized(n_list.size());
  for (std::size_t idx = 0; idx < n_list.size(); ++idx) {
    const int n = n_list[idx];
    const int m = m_override ? *m_override : gluskin_default_m(n);
    if (m <= n) throw std::invalid_argument("gluskin_volume_scaling: m must exceed n");
    const double scale = n / std::sqrt(std::log(static_cast<double>(m) / n));
    std::vector<double>& vals = normalized[idx];
    vals.assign(static_cast<std::size_t>(trials), 0.0);
    const SampleStream s = stream.split(static_cast<std::uint64_t>(n));
    for_each_index(vals.size(), [&](std::size_t t) {
      vals[t] = gluskin_directions(n, m, s.split(t)).volume_root * scale;
    });
    GluskinScalingRow row;
    row.n = n;
    row.m = m;
    row.trials = trials;
    double sum = 0.0, sum2 = 0.0;
    for (double v : vals) {
      sum += v;
      sum2 += v * v;
    }
    row.mean_normalized = sum / trials;
    row.stderr_normalized =
        trials > 1 ? std::sqrt(std::max(0.0, (sum2 - sum * row.mean_normalized) / (trials - 1)) /
                               trials)
                   : 0.0;
    row.min_normalized = *std::min_element(vals.begin(), vals.end());
    out.rows.push_back(row);
  }
  out.c_emp = 0.5 * out.rows.front().min_normalized;
  for (std::size_t idx = 0; idx < n_list.size(); ++idx) {
    const auto above = static_cast<std::uint64_t>(
        std::count_if(normalized[idx].begin(), normalized[idx].end(),
                      [&](double v) { return v >= out.c_emp; }));
    out.rows[idx].fraction_above = static_cast<double>(above) / trials;
    out.rows[idx].fraction_ci = wilson_interval(above, static_cast<std::uint64_t>(trials));
  }
  return out;
}

int select_averaging_depth(double b2, double alpha, double C) {
  if (!(b2 > 0.0) || !(alpha > 0.0) || !(C > 0.0)) {
    throw std::invalid_argument("select_averaging_depth: b2, alpha and C must be positive");
  }
  const double target = b2 * b2 / (C * alpha * alpha);
  if (!std::isfinite(target)) throw std::domain_error("select_averaging_depth: overflow");
  int N = 1;
  while (!(std::ldexp(1.0, N) > target)) ++N;
  return N;
}

WitnessReport witness_pipeline(const ConvexBody& input, const SampleStream& stream,
                               const WitnessOptions& options) {
  const int n = input.dim();
  if (n < 2) throw std::invalid_argument("witness_pipeline: requires n >= 2");
  if (n > kMaxExactDim) {
    throw std::invalid_argument("witness_pipeline: exact Gluskin volumes need n <= 6");
  }
  if (options.samples < 1000 || options.psi_samples < kMinPsiSamples ||
      options.alpha_pilot < 1000) {
    throw std::invalid_argument("witness_pipeline: sample counts too small");
  }
  if (options.b2 && !(*options.b2 > 0.0)) {
    throw std::invalid_argument("witness_pipeline: b2 must be positive");
  }
  if (options.alpha && !(*options.alpha > 0.0)) {
    throw std::invalid_argument("witness_pipeline: alpha must be positive");
  }
  if (options.C_emp && !(*options.C_emp > 0.0)) {
    throw std::invalid_argument("witness_pipeline: C_emp must be positive");
  }
  if (!(options.b2_quantile > 0.0 && options.b2_quantile < 1.0) ||
      !(options.pilot_quantile > 0.0 && options.pilot_quantile < 1.0)) {
    throw std::invalid_argument("witness_pipeline: quantiles must lie in (0, 1)");
  }
  if (options.resample_budget < 1 || options.b2_directions < 1 || options.max_N < 1) {
    throw std::invalid_argument("witness_pipeline: budgets must be positive");
  }

  WitnessReport r;
  r.n = n;
  r.volume = volume(input, VolumeOptions{stream.split(10).next_u64(), kDefaultVolumeSamples, false})
                 .value;
  if (const auto c = symmetry_center(input)) {
    r.center = *c;
  } else {
    r.center = estimate_moments(input, stream.split(9), options.psi_samples).barycenter;
  }
  const ConvexBody body = affine_image(input, Matrix::Identity(n, n), -r.center);
  const UniformSampler sampler(body, stream.split(1));
  const Matrix pool = sampler.sample(stream.split(2), options.psi_samples);

  auto psi2 = [&](const Point& theta) {
    return psi_alpha_of(abs_projection(pool, theta), 2.0, 0.0, 1e-9);
  };
  auto passes = [&](const Point& theta) {
    return psi_mean(abs_projection(pool, theta), r.b2, 2.0) <= 2.0;
  };

  // (1) b2
  if (options.b2) {
    r.b2 = *options.b2;
  } else {
    const Matrix dirs =
        sample_sphere(n, stream.split(3), static_cast<std::size_t>(options.b2_directions));
    std::vector<double> norms(static_cast<std::size_t>(options.b2_directions));
    for_each_index(norms.size(),
                   [&](std::size_t k) { norms[k] = psi2(dirs.col(static_cast<Eigen::Index>(k))); });
    std::sort(norms.begin(), norms.end());
    r.b2 = quantile_sorted(norms, options.b2_quantile);
    r.b2_fitted = true;
  }

  // (2) Gluskin directions conditioned on ψ₂ <= b2, whole set at a time.
  bool overridden = false;
  r.m = options.m ? *options.m : gluskin_default_m(n, &overridden);
  r.m_overridden = overridden;
  if (r.m < n) throw std::invalid_argument("witness_pipeline: m must be at least n");
  const SampleStream gs = stream.split(4);
  Matrix dirs;
  for (int attempt = 0; attempt < options.resample_budget; ++attempt) {
    Matrix cand = sample_sphere(n, gs.split(static_cast<std::uint64_t>(attempt)),
                                static_cast<std::size_t>(r.m));
    std::vector<char> ok(static_cast<std::size_t>(r.m), 0);
    for_each_index(ok.size(),
                   [&](std::size_t i) { ok[i] = passes(cand.col(static_cast<Eigen::Index>(i))); });
    r.resamples = attempt + 1;
    if (std::all_of(ok.begin(), ok.end(), [](char v) { return v != 0; })) {
      dirs = std::move(cand);
      r.hypothesis_satisfied = true;
      break;
    }
  }
  if (!r.hypothesis_satisfied) {
    r.notes.push_back("resample budget exhausted; directions conditioned one at a time");
    dirs.resize(n, r.m);
    SampleStream s = stream.split(11);
    constexpr int kPerDirectionTries = 100'000;
    for (int i = 0; i < r.m; ++i) {
      int tries = 0;
      while (true) {
        const Point cand = sample_sphere(n, s.split(static_cast<std::uint64_t>(i) << 32 |
                                                     static_cast<std::uint64_t>(tries)),
                                         1)
                               .col(0);
        if (passes(cand)) {
          dirs.col(i) = cand;
          break;
        }
        if (++tries >= kPerDirectionTries) {
          throw std::runtime_error("witness_pipeline: no direction satisfies the b2 bound");
        }
      }
    }
  }
  r.acceptance_rate = r.hypothesis_satisfied ? 1.0 / r.resamples : 0.0;
  r.directions = dirs;
  const GluskinSet gset = gluskin_from_directions(dirs, stream.split(12));
  r.absconv_volume = gset.absconv_volume.value;
  r.absconv_root = gset.volume_root;

  // (3) alpha and t
  const double root_log = std::sqrt(log_sqrt_n(n));
  if (options.alpha) {
    r.alpha = *options.alpha;
  } else {
    const Matrix pilot = sampler.sample(stream.split(5), options.alpha_pilot);
    std::vector<double> norms(static_cast<std::size_t>(pilot.cols()));
    for (Eigen::Index k = 0; k < pilot.cols(); ++k) {
      norms[static_cast<std::size_t>(k)] = gluskin_norm(dirs, pilot.col(k).data());
    }
    std::sort(norms.begin(), norms.end());
    r.alpha = quantile_sorted(norms, options.pilot_quantile) / root_log;
    r.alpha_fitted = true;
  }
  r.t = r.alpha * root_log;

  // (4) C and N
  if (options.C_emp) {
    r.C_emp = *options.C_emp;
  } else {
    r.C_emp = subgaussian_sum_check(Marginal::CenteredUniform, options.calibration_N,
                                    stream.split(6), options.calibration_samples)
                  .C_emp;
    r.C_fitted = true;
  }
  r.N = select_averaging_depth(r.b2, r.alpha, r.C_emp);
  if (r.N > options.max_N) {
    r.notes.push_back("N capped at " + std::to_string(options.max_N));
    r.N = options.max_N;
    r.N_capped = true;
  }
  const std::size_t group = std::size_t{1} << r.N;

  // (5) p_num and p_den
  r.samples = options.samples;
  const std::size_t chunks = chunk_count(options.samples);
  std::vector<std::uint64_t> num(chunks, 0), den(chunks, 0);
  const SampleStream sn = stream.split(7);
  for_each_index(chunks, [&](std::size_t c) {
    SampleStream s = sn.split(c);
    Matrix buf(n, static_cast<Eigen::Index>(group));
    Point avg(n);
    for (std::size_t k = 0; k < chunk_length(options.samples, c); ++k) {
      sampler.draw(s, group, buf.data());
      avg = buf.rowwise().mean();
      if (gluskin_norm(dirs, avg.data()) <= r.t) ++num[c];
    }
  });
  sampler.for_each_chunk(stream.split(8), options.samples, [&](std::size_t c, const Matrix& pts) {
    for (Eigen::Index k = 0; k < pts.cols(); ++k) {
      if (gluskin_norm(dirs, pts.col(k).data()) <= r.t) ++den[c];
    }
  });
  r.hits_num = std::accumulate(num.begin(), num.end(), 0ULL);
  r.hits_den = std::accumulate(den.begin(), den.end(), 0ULL);
  const double M = static_cast<double>(options.samples);
  r.p_num = r.hits_num / M;
  r.p_den = r.hits_den / M;
  r.p_num_ci = wilson_interval(r.hits_num, options.samples);
  r.p_den_ci = wilson_interval(r.hits_den, options.samples);
  if (r.hits_den == 0) throw std::domain_error("witness_pipeline: no sample of X fell in tW");

  // (6)-(8)
  r.density_lb = r.p_num / (r.p_den * r.volume);
  r.density_lb_ci = {r.p_num_ci.low / (r.p_den_ci.high * r.volume),
                     r.p_num_ci.high / (r.p_den_ci.low * r.volume)};
  const double power = 1.0 / (std::ldexp(1.0, r.N) - 1.0);
  const double scale = std::ldexp(1.0, -n);
  r.kb_lb = scale * std::pow(r.density_lb, power);
  r.kb_lb_ci = {scale * std::pow(r.density_lb_ci.low, power),
                scale * std::pow(r.density_lb_ci.high, power)};
  r.fitted_k1 = r.b2 * r.b2 * std::log(std::ldexp(r.kb_lb, n)) / n;
  r.tail_bound =
      1.0 - r.m * std::exp(-r.t * r.t * std::ldexp(1.0, r.N) / (r.C_emp * r.b2 * r.b2));
  return r;
}

}  // namespace hadwiger
