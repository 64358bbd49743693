#include "hadwiger/symmetry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "hadwiger/parallel.hpp"
#include "hadwiger/sample.hpp"
#include "hadwiger/stats.hpp"

namespace hadwiger {

namespace {

constexpr double kInvPhi = 0.6180339887498949;

// Realizations of the average of `reps` uniform points, one per column.
void draw_averages(const UniformSampler& sampler, int reps, SampleStream& stream,
                   std::size_t count, double* out) {
  const int n = sampler.dim();
  std::vector<double> block(static_cast<std::size_t>(n) * reps * count);
  sampler.draw(stream, static_cast<std::size_t>(reps) * count, block.data());
  const double inv = 1.0 / reps;
  for (std::size_t k = 0; k < count; ++k) {
    const double* src = block.data() + k * reps * n;
    double* dst = out + k * n;
    for (int i = 0; i < n; ++i) dst[i] = 0.0;
    for (int r = 0; r < reps; ++r) {
      for (int i = 0; i < n; ++i) dst[i] += src[r * n + i];
    }
    for (int i = 0; i < n; ++i) dst[i] *= inv;
  }
}

Matrix sample_averages(const UniformSampler& sampler, int reps, const SampleStream& stream,
                       std::size_t count) {
  Matrix out(sampler.dim(), static_cast<Eigen::Index>(count));
  for_each_index(chunk_count(count), [&](std::size_t c) {
    SampleStream s = stream.split(c);
    draw_averages(sampler, reps, s, chunk_length(count, c), out.data() + c * kChunkSize * sampler.dim());
  });
  return out;
}

// Streams averages chunk by chunk without keeping them.
void for_each_average_chunk(const UniformSampler& sampler, int reps, const SampleStream& stream,
                            std::uint64_t count,
                            const std::function<void(std::size_t, const Matrix&)>& fn) {
  for_each_index(chunk_count(count), [&](std::size_t c) {
    SampleStream s = stream.split(c);
    const std::size_t len = chunk_length(count, c);
    Matrix pts(sampler.dim(), static_cast<Eigen::Index>(len));
    draw_averages(sampler, reps, s, len, pts.data());
    fn(c, pts);
  });
}

bool lex_less(const Point& a, const Point& b) {
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    if (a(i) != b(i)) return a(i) < b(i);
  }
  return false;
}

// Golden-section maximization of f on [lo, hi]. Returns (t, f(t)) for the
// best point evaluated, including `t0` when it lies in the bracket.
template <class F>
std::pair<double, double> golden_max(F&& f, double lo, double hi, double t0, double f0,
                                     double rel_tol, std::uint64_t& evaluations) {
  double best_t = t0;
  double best_f = f0;
  auto eval = [&](double t) {
    const double v = f(t);
    ++evaluations;
    if (v > best_f) {
      best_f = v;
      best_t = t;
    }
    return v;
  };
  const double width = hi - lo;
  double c = hi - kInvPhi * (hi - lo);
  double d = lo + kInvPhi * (hi - lo);
  double fc = eval(c);
  double fd = eval(d);
  for (int it = 0; it < 200 && hi - lo > rel_tol * width; ++it) {
    if (fc >= fd) {
      hi = d;
      d = c;
      fd = fc;
      c = hi - kInvPhi * (hi - lo);
      fc = eval(c);
    } else {
      lo = c;
      c = d;
      fc = fd;
      d = lo + kInvPhi * (hi - lo);
      fd = eval(d);
    }
  }
  return {best_t, best_f};
}

// Objective P(x - Y ∈ K) over a fixed sample Y, restricted to lines.
class CommonSampleObjective {
 public:
  CommonSampleObjective(const ConstraintSet& set, Matrix y) : set_(set), y_(std::move(y)) {
    ay_ = set_.normals() * y_;
    for (const auto& e : set_.ellipsoids()) ly_.push_back(e.L * y_);
    lo_.reserve(y_.cols());
    hi_.reserve(y_.cols());
  }

  std::uint64_t size() const { return static_cast<std::uint64_t>(y_.cols()); }
  const Matrix& points() const { return y_; }

  double value(const Point& x) const {
    std::uint64_t hits = 0;
    for (Eigen::Index j = 0; j < y_.cols(); ++j) {
      const Point z = x - y_.col(j);
      if (set_.contains(z.data(), 0.0)) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(size());
  }

  // Prepares the per-sample parameter intervals {t : x + t d - Y_j ∈ K}.
  void set_line(const Point& x, const Point& d) {
    lo_.clear();
    hi_.clear();
    const Eigen::VectorXd ax = set_.normals() * x;
    const Eigen::VectorXd ad = set_.normals() * d;
    const Eigen::VectorXd& b = set_.offsets();
    std::vector<Point> lx;
    std::vector<Point> ld;
    for (const auto& e : set_.ellipsoids()) {
      lx.push_back(e.L * (x - e.center));
      ld.push_back(e.L * d);
    }
    const Eigen::Index m = ax.size();
    for (Eigen::Index j = 0; j < y_.cols(); ++j) {
      double lo = -std::numeric_limits<double>::infinity();
      double hi = std::numeric_limits<double>::infinity();
      for (Eigen::Index i = 0; i < m && lo <= hi; ++i) {
        const double slack = b(i) + ay_(i, j) - ax(i);
        if (ad(i) > 0.0) {
          hi = std::min(hi, slack / ad(i));
        } else if (ad(i) < 0.0) {
          lo = std::max(lo, slack / ad(i));
        } else if (slack < 0.0) {
          hi = -std::numeric_limits<double>::infinity();
        }
      }
      for (std::size_t e = 0; e < lx.size() && lo <= hi; ++e) {
        const Point u = lx[e] - ly_[e].col(j);
        const double a = ld[e].squaredNorm();
        const double bq = u.dot(ld[e]);
        const double c = u.squaredNorm() - set_.ellipsoids()[e].radius * set_.ellipsoids()[e].radius;
        const double disc = bq * bq - a * c;
        if (disc < 0.0) {
          hi = -std::numeric_limits<double>::infinity();
          break;
        }
        const double root = std::sqrt(disc);
        lo = std::max(lo, (-bq - root) / a);
        hi = std::min(hi, (-bq + root) / a);
      }
      if (lo <= hi) {
        lo_.push_back(lo);
        hi_.push_back(hi);
      }
    }
    std::sort(lo_.begin(), lo_.end());
    std::sort(hi_.begin(), hi_.end());
  }

  double line_value(double t) const {
    const auto started = std::upper_bound(lo_.begin(), lo_.end(), t) - lo_.begin();
    const auto ended = std::lower_bound(hi_.begin(), hi_.end(), t) - hi_.begin();
    return static_cast<double>(started - ended) / static_cast<double>(size());
  }

  bool line_empty() const { return lo_.empty(); }
  double line_lo() const { return lo_.front(); }
  double line_hi() const { return hi_.back(); }

 private:
  const ConstraintSet& set_;
  Matrix y_;
  Matrix ay_;
  std::vector<Matrix> ly_;
  std::vector<double> lo_;
  std::vector<double> hi_;
};

struct RestartResult {
  Point x;
  double value = 0.0;
  std::uint64_t evaluations = 0;
  std::vector<SymmetryTraceEntry> trace;
};

Point random_unit(SampleStream& s, int n) {
  Point d(n);
  double norm = 0.0;
  do {
    for (int i = 0; i < n; ++i) d(i) = s.normal();
    norm = d.norm();
  } while (norm == 0.0);
  return d / norm;
}

// Successive golden-section line searches over coordinate and random
// directions. `line` prepares direction d at x and returns (lo, hi, f) where
// f(t) evaluates the objective at x + t d.
template <class PrepareLine>
RestartResult coordinate_ascent(int restart, Point x, double fx, int n, const SymmetryOptions& opt,
                                SampleStream dirs, PrepareLine&& prepare) {
  RestartResult r;
  r.x = std::move(x);
  r.value = fx;
  const double power = 1.0 / n;
  for (int sweep = 0; sweep < opt.max_sweeps; ++sweep) {
    const double before = r.value;
    for (int k = 0; k < 2 * n; ++k) {
      Point d = Point::Zero(n);
      if (k < n) d(k) = 1.0;
      else d = random_unit(dirs, n);
      auto line = prepare(r.x, d);
      if (!line.valid) continue;
      const auto [t, v] = golden_max(line.f, line.lo, line.hi, 0.0, r.value, 1e-7, r.evaluations);
      if (v > r.value) {
        r.x += t * d;
        r.value = v;
      }
      r.trace.push_back({restart, r.x, r.value});
    }
    const double gain = std::pow(r.value, power) - std::pow(before, power);
    if (gain <= opt.tol * std::pow(std::max(before, 1e-300), power)) break;
  }
  return r;
}

SymmetryResult pick_best(std::vector<RestartResult>& runs, double tol) {
  double best = 0.0;
  for (const auto& r : runs) best = std::max(best, r.value);
  const RestartResult* pick = nullptr;
  for (const auto& r : runs) {
    if (r.value < best * (1.0 - tol)) continue;
    if (!pick || lex_less(r.x, pick->x)) pick = &r;
  }
  SymmetryResult out;
  out.x_star = pick->x;
  out.search_value = pick->value;
  for (auto& r : runs) {
    out.evaluations += r.evaluations;
    out.trace.insert(out.trace.end(), r.trace.begin(), r.trace.end());
  }
  return out;
}

double ball_volume_radius(int n, double r) { return unit_ball_volume(n) * std::pow(r, n); }

double knn_radius(const Matrix& pts, const Point& q, std::size_t k, std::vector<double>& scratch) {
  scratch.resize(static_cast<std::size_t>(pts.cols()));
  for (Eigen::Index j = 0; j < pts.cols(); ++j) scratch[j] = (pts.col(j) - q).squaredNorm();
  std::nth_element(scratch.begin(), scratch.begin() + static_cast<std::ptrdiff_t>(k - 1), scratch.end());
  return std::sqrt(scratch[k - 1]);
}

}  // namespace

VolumeEstimate intersection_volume_at(const ConvexBody& body, const Point& x,
                                      IntersectionMethod method, std::uint64_t seed,
                                      std::uint64_t samples) {
  if (x.size() != body.dim()) throw std::invalid_argument("intersection_volume_at: dimension mismatch");
  const int n = body.dim();
  VolumeEstimate zero;
  if (method == IntersectionMethod::Exact) {
    if (!body.is_polytope() || n > kMaxExactIntersectionDim) {
      throw std::invalid_argument(
          "intersection_volume_at: exact method needs a polytope of dimension at most 4");
    }
  } else {
    zero.method = VolumeMethod::MonteCarlo;
    zero.samples = samples;
  }
  const ConstraintSet set = as_constraints(body);
  const Point half = 0.5 * x;
  if (!set.contains(half, 0.0)) return zero;
  if (method == IntersectionMethod::Exact) {
    const ConvexBody h = ConvexBody::hpolytope(set.normals(), set.offsets());
    const ConvexBody both = intersect(h, reflect_about(h, x));
    if (both.degenerate()) return zero;
    return exact_polytope_volume(both);
  }
  const Box kb = sampling_box(body, set);
  Box box{kb.lo.cwiseMax(x - kb.hi), kb.hi.cwiseMin(x - kb.lo), false};
  if (((box.hi - box.lo).array() <= 0.0).any()) return zero;
  ConstraintSet both = set;
  ConstraintSet reflected(-set.normals(), set.offsets() - set.normals() * x);
  for (auto e : set.ellipsoids()) {
    // ||L(x - y - c)|| = ||L(y - (x - c))||
    e.center = x - e.center;
    reflected.add_ellipsoid(e);
  }
  both.append(reflected);
  return mc_volume(both, box, SampleStream(seed), samples);
}

ConvolutionCheck convolution_identity_check(const ConvexBody& body, const Point& x,
                                            const SampleStream& stream, std::uint64_t samples) {
  ConvolutionCheck out;
  const bool exact = body.is_polytope() && body.dim() <= kMaxExactIntersectionDim;
  const VolumeEstimate vol = volume(body, VolumeOptions{stream.split(1).next_u64(), samples, false});
  const VolumeEstimate direct =
      intersection_volume_at(body, x, exact ? IntersectionMethod::Exact : IntersectionMethod::MonteCarlo,
                             stream.split(2).next_u64(), samples);
  out.direct = direct.value / vol.value;
  const double rel_vol = vol.value > 0.0 ? vol.std_error / vol.value : 0.0;
  const double rel_dir = direct.value > 0.0 ? direct.std_error / direct.value : 0.0;
  out.direct_se = out.direct * std::sqrt(rel_vol * rel_vol + rel_dir * rel_dir);

  const UniformSampler sampler(body, stream.split(3));
  const ConstraintSet& set = sampler.constraints();
  std::vector<std::uint64_t> hits(chunk_count(samples), 0);
  sampler.for_each_chunk(stream.split(4), samples, [&](std::size_t c, const Matrix& y) {
    std::uint64_t h = 0;
    Point z(body.dim());
    for (Eigen::Index j = 0; j < y.cols(); ++j) {
      z = x - y.col(j);
      if (set.contains(z.data(), 0.0)) ++h;
    }
    hits[c] = h;
  });
  std::uint64_t total = 0;
  for (auto h : hits) total += h;
  out.convolution = static_cast<double>(total) / static_cast<double>(samples);
  out.convolution_se = binomial_stderr(total, samples);
  const double diff = out.direct - out.convolution;
  const double se = std::hypot(out.direct_se, out.convolution_se);
  if (se > 0.0) out.z = diff / se;
  else out.z = std::abs(diff) <= 1e-12 ? 0.0 : std::numeric_limits<double>::infinity();
  return out;
}

SymmetryResult delta_kb(const ConvexBody& body, const SymmetryOptions& options,
                        const SampleStream& stream) {
  const int n = body.dim();
  if (options.restarts < 1) throw std::invalid_argument("delta_kb: restarts must be positive");
  if (options.use_symmetry) {
    if (const auto c = symmetry_center(body)) {
      SymmetryResult out;
      out.x_star = 2.0 * *c;
      out.delta_kb = 1.0;
      out.search_value = 1.0;
      out.method = "symmetric";
      return out;
    }
  }
  using Method = SymmetryOptions::Method;
  Method method = options.method;
  if (method == Method::Auto) method = (n == 2 && body.is_polytope()) ? Method::Exact2d : Method::MonteCarlo;
  if (method == Method::Exact2d && (n != 2 || !body.is_polytope())) {
    throw std::invalid_argument("delta_kb: exact-2d needs a polygon");
  }

  const UniformSampler sampler(body, stream.split(100));
  const ConstraintSet& set = sampler.constraints();
  const ConstraintSet doubled = set.scaled(2.0);
  CommonSampleObjective objective(set, sampler.sample(stream.split(101), options.search_samples));
  const Point mean = objective.points().rowwise().mean();

  std::vector<Point> starts;
  for (int r = 0; r < options.restarts; ++r) {
    if (r == 0) {
      starts.push_back(2.0 * mean);
    } else {
      SampleStream pick = stream.split(200 + r);
      const auto j = static_cast<Eigen::Index>(pick.below(objective.size()));
      starts.push_back(mean + objective.points().col(j));
    }
  }

  std::vector<RestartResult> runs(options.restarts);
  SymmetryResult out;
  if (method == Method::Exact2d) {
    const double vol = exact_polytope_volume(body).value;
    auto g = [&](const Point& x) {
      return intersection_volume_at(body, x, IntersectionMethod::Exact).value / vol;
    };
    for_each_index(static_cast<std::size_t>(options.restarts), [&](std::size_t r) {
      struct Line {
        bool valid;
        double lo, hi;
        std::function<double(double)> f;
      };
      auto prepare = [&](const Point& x, const Point& d) {
        const auto [lo, hi] = doubled.chord(x, d);
        return Line{hi > lo, lo, hi, [&g, x, d](double t) { return g(x + t * d); }};
      };
      runs[r] = coordinate_ascent(static_cast<int>(r), starts[r], g(starts[r]), n, options,
                                  stream.split(300 + r), prepare);
    });
    out = pick_best(runs, options.tol);
    out.delta_kb = out.search_value;
    out.method = "exact-2d";
    return out;
  }

  for_each_index(static_cast<std::size_t>(options.restarts), [&](std::size_t r) {
    CommonSampleObjective local(set, objective.points());
    struct Line {
      bool valid;
      double lo, hi;
      std::function<double(double)> f;
    };
    auto prepare = [&](const Point& x, const Point& d) {
      local.set_line(x, d);
      if (local.line_empty()) return Line{false, 0.0, 0.0, {}};
      const auto [clo, chi] = doubled.chord(x, d);
      const double lo = std::max(clo, local.line_lo());
      const double hi = std::min(chi, local.line_hi());
      return Line{hi > lo, lo, hi, [&local](double t) { return local.line_value(t); }};
    };
    runs[r] = coordinate_ascent(static_cast<int>(r), starts[r], local.value(starts[r]), n, options,
                                stream.split(300 + r), prepare);
  });
  out = pick_best(runs, options.tol);
  out.method = "mc";

  // Independent re-estimate at the maximizer.
  std::vector<std::uint64_t> hits(chunk_count(options.samples), 0);
  sampler.for_each_chunk(stream.split(102), options.samples, [&](std::size_t c, const Matrix& y) {
    std::uint64_t h = 0;
    Point z(n);
    for (Eigen::Index j = 0; j < y.cols(); ++j) {
      z = out.x_star - y.col(j);
      if (set.contains(z.data(), 0.0)) ++h;
    }
    hits[c] = h;
  });
  std::uint64_t total = 0;
  for (auto h : hits) total += h;
  out.delta_kb = static_cast<double>(total) / static_cast<double>(options.samples);
  out.std_error = binomial_stderr(total, options.samples);
  return out;
}

AvgDensityReport avg_density_sup(const ConvexBody& body, int N, const SampleStream& stream,
                                 std::uint64_t samples, const AvgDensityOptions& options) {
  const int n = body.dim();
  if (n > kMaxDensityDim) throw std::invalid_argument("avg_density_sup: dimension above 3");
  if (N < 1 || N > 20) throw std::invalid_argument("avg_density_sup: N must be in [1, 20]");
  if (samples < 1000) throw std::invalid_argument("avg_density_sup: too few samples");
  const int reps = 1 << N;
  const UniformSampler sampler(body, stream.split(1));

  const std::size_t pilot_count = static_cast<std::size_t>(std::min(samples, options.pilot));
  const Matrix pilot = sample_averages(sampler, reps, stream.split(2), pilot_count);
  const auto k_pilot = static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(pilot_count))));
  const std::size_t k_coarse = std::max(k_pilot, pilot_count / 8);
  const std::size_t k_fine = std::min(
      k_coarse, std::max(k_pilot, static_cast<std::size_t>(std::pow(static_cast<double>(pilot_count),
                                                                     options.mode_neighbor_exponent))));
  std::vector<double> scratch;
  auto knn_density = [&](const Point& q, std::size_t k, double* radius) {
    const double r = knn_radius(pilot, q, k, scratch);
    if (radius) *radius = r;
    return static_cast<double>(k) / (static_cast<double>(pilot_count) * ball_volume_radius(n, r));
  };

  // Coarse kNN densities pick a starting candidate; flat-kernel mean shift
  // with a shrinking neighbourhood then walks to the mode.
  Point best = pilot.rowwise().mean();
  double best_f = knn_density(best, k_coarse, nullptr);
  const int candidates = std::min<int>(options.candidates, static_cast<int>(pilot_count));
  for (int i = 0; i < candidates; ++i) {
    const auto j = static_cast<Eigen::Index>(static_cast<std::size_t>(i) * pilot_count / candidates);
    const double f = knn_density(pilot.col(j), k_coarse, nullptr);
    if (f > best_f) {
      best_f = f;
      best = pilot.col(j);
    }
  }
  for (std::size_t k = k_coarse;; k = std::max(k_fine, k / 2)) {
    for (int step = 0; step < options.mean_shift_steps; ++step) {
      double r = 0.0;
      knn_density(best, k, &r);
      Point acc = Point::Zero(n);
      double cnt = 0.0;
      for (Eigen::Index j = 0; j < pilot.cols(); ++j) {
        if ((pilot.col(j) - best).squaredNorm() <= r * r) {
          acc += pilot.col(j);
          cnt += 1.0;
        }
      }
      const Point next = acc / cnt;
      const double move = (next - best).norm();
      best = next;
      if (move <= 1e-3 * r) break;
    }
    if (k == k_fine) break;
  }
  const double pilot_f = knn_density(best, k_pilot, nullptr);

  AvgDensityReport report;
  report.N = N;
  report.mode = best;
  report.samples = samples;
  report.neighbors = static_cast<std::uint64_t>(std::ceil(std::sqrt(static_cast<double>(samples))));
  report.bandwidth = std::pow(static_cast<double>(report.neighbors) /
                                  (static_cast<double>(samples) * unit_ball_volume(n) * pilot_f),
                              1.0 / n);
  const double r2 = report.bandwidth * report.bandwidth;
  const std::size_t chunks = chunk_count(samples);
  std::vector<double> hit_counts(chunks, 0.0);
  std::vector<double> lengths(chunks, 0.0);
  for_each_average_chunk(sampler, reps, stream.split(3), samples, [&](std::size_t c, const Matrix& pts) {
    std::uint64_t h = 0;
    for (Eigen::Index j = 0; j < pts.cols(); ++j) {
      if ((pts.col(j) - best).squaredNorm() <= r2) ++h;
    }
    hit_counts[c] = static_cast<double>(h);
    lengths[c] = static_cast<double>(pts.cols());
  });
  double total = 0.0;
  for (double h : hit_counts) total += h;
  report.hits = static_cast<std::uint64_t>(total);
  const double ball = ball_volume_radius(n, report.bandwidth);
  report.sup_estimate = total / (static_cast<double>(samples) * ball);
  const double poisson_se = std::sqrt(total) / (static_cast<double>(samples) * ball);
  if (chunks >= 10) {
    const double boot = block_bootstrap_stderr(hit_counts, lengths, options.bootstrap_replicates,
                                               stream.split(4));
    report.std_error = std::max(boot / ball, poisson_se);
  } else {
    report.std_error = poisson_se;
  }
  return report;
}

DensityComparison lemma31_check(const ConvexBody& body, int N, const std::vector<Point>& grid,
                                const SampleStream& stream, std::uint64_t samples) {
  const int n = body.dim();
  if (n > 2) throw std::invalid_argument("lemma31_check: dimension above 2");
  if (N < 1 || N > 20) throw std::invalid_argument("lemma31_check: N must be in [1, 20]");
  if (samples < 1000) throw std::invalid_argument("lemma31_check: too few samples");
  for (const auto& x : grid) {
    if (x.size() != n) throw std::invalid_argument("lemma31_check: grid point dimension mismatch");
  }
  const UniformSampler sampler(body, stream.split(1));
  DensityComparison out;
  out.N = N;
  const double m = static_cast<double>(samples);
  // Tuned for about sqrt(M) hits at unit density.
  out.bandwidth = std::pow(std::sqrt(m) / (m * unit_ball_volume(n)), 1.0 / n);
  const double h = out.bandwidth;
  const std::size_t g = grid.size();

  // Counts of realizations within `radius` of each center.
  auto count_near = [&](int reps, double scale, const SampleStream& s, double radius,
                        const std::vector<Point>& centers) {
    std::vector<std::vector<double>> per_chunk(chunk_count(samples), std::vector<double>(g, 0.0));
    for_each_average_chunk(sampler, reps, s, samples, [&](std::size_t c, const Matrix& pts) {
      for (Eigen::Index j = 0; j < pts.cols(); ++j) {
        const Point p = scale * pts.col(j);
        for (std::size_t i = 0; i < g; ++i) {
          if ((p - centers[i]).squaredNorm() <= radius * radius) per_chunk[c][i] += 1.0;
        }
      }
    });
    std::vector<double> totals(g, 0.0);
    for (const auto& row : per_chunk) {
      for (std::size_t i = 0; i < g; ++i) totals[i] += row[i];
    }
    return totals;
  };

  std::vector<Point> doubled;
  for (const auto& x : grid) doubled.push_back(2.0 * x);
  const auto sn = count_near(1 << N, 1.0, stream.split(2), h, grid);
  const auto avg = count_near(2, 1.0, stream.split(3), h, grid);
  // X + Y is twice the pair average; counted in a ball of radius 2h at 2x.
  const auto sum = count_near(2, 2.0, stream.split(4), 2.0 * h, doubled);

  const double ball_h = ball_volume_radius(n, h);
  const double ball_2h = ball_volume_radius(n, 2.0 * h);
  const double scale_n = std::pow(2.0, n);
  const double power = static_cast<double>((1 << N) - 1);
  out.all_ok = true;
  for (std::size_t i = 0; i < g; ++i) {
    DensityGridRow row;
    row.x = grid[i];
    row.f_sn = sn[i] / (m * ball_h);
    row.f_sn_se = std::sqrt(sn[i]) / (m * ball_h);
    row.f_avg = avg[i] / (m * ball_h);
    row.f_avg_se = std::sqrt(avg[i]) / (m * ball_h);
    row.f_sum2 = scale_n * sum[i] / (m * ball_2h);
    row.f_sum2_se = scale_n * std::sqrt(sum[i]) / (m * ball_2h);
    row.rhs = std::pow(row.f_avg, power);
    row.inequality_ok =
        row.f_sn - out.z * row.f_sn_se <= std::pow(row.f_avg + out.z * row.f_avg_se, power);
    row.rescaling_ok = std::abs(row.f_avg - row.f_sum2) <=
                       out.z * std::hypot(row.f_avg_se, row.f_sum2_se);
    out.all_ok = out.all_ok && row.inequality_ok && row.rescaling_ok;
    out.rows.push_back(std::move(row));
  }
  return out;
}

double kb_lower_bound_from_avg(const AvgDensityReport& report, int n) {
  if (report.N < 1) throw std::invalid_argument("kb_lower_bound_from_avg: invalid report");
  const double power = 1.0 / static_cast<double>((1 << report.N) - 1);
  return std::pow(2.0, -n) * std::pow(report.sup_estimate, power);
}

}  // namespace hadwiger
