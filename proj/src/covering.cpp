#include "hadwiger/covering.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <stdexcept>

#include "hadwiger/constraints.hpp"
#include "hadwiger/measure.hpp"
#include "hadwiger/parallel.hpp"

namespace hadwiger {

namespace {

// Node grid over a box: per axis ceil(width/resolution) intervals, both
// endpoints included. Index order is lexicographic with axis 0 slowest.
struct Grid {
  Point lo;
  Point step;
  std::vector<std::int64_t> nodes;  // per axis
  std::int64_t total = 1;

  Grid(const Box& box, double resolution) : lo(box.lo), step(box.lo.size()) {
    const Eigen::Index n = box.lo.size();
    nodes.resize(static_cast<std::size_t>(n));
    for (Eigen::Index j = 0; j < n; ++j) {
      const double width = box.hi(j) - box.lo(j);
      const auto k = std::max<std::int64_t>(1, static_cast<std::int64_t>(std::ceil(width / resolution - 1e-12)));
      step(j) = width / static_cast<double>(k);
      nodes[static_cast<std::size_t>(j)] = k + 1;
      total *= k + 1;
      if (total > (std::int64_t{1} << 31)) {
        throw std::invalid_argument("cover grid: resolution too fine for this dimension");
      }
    }
  }

  Point node(std::int64_t index) const {
    Point x(lo.size());
    for (Eigen::Index j = lo.size() - 1; j >= 0; --j) {
      const std::int64_t k = nodes[static_cast<std::size_t>(j)];
      x(j) = lo(j) + step(j) * static_cast<double>(index % k);
      index /= k;
    }
    return x;
  }

  // Half the cell diagonal: every point of the box is this close to a node.
  double cover_radius() const { return 0.5 * step.norm(); }
};

// Calls fn(index, x) for every node inside [a, b].
template <class Fn>
void for_nodes_in(const Grid& grid, const Point& a, const Point& b, Fn&& fn) {
  const Eigen::Index n = grid.lo.size();
  std::vector<std::int64_t> first(static_cast<std::size_t>(n)), last(static_cast<std::size_t>(n));
  for (Eigen::Index j = 0; j < n; ++j) {
    const std::int64_t k = grid.nodes[static_cast<std::size_t>(j)];
    first[j] = std::max<std::int64_t>(0, static_cast<std::int64_t>(std::ceil((a(j) - grid.lo(j)) / grid.step(j))));
    last[j] = std::min<std::int64_t>(k - 1, static_cast<std::int64_t>(std::floor((b(j) - grid.lo(j)) / grid.step(j))));
    if (first[j] > last[j]) return;
  }
  std::vector<std::int64_t> idx = first;
  Point x(n);
  while (true) {
    std::int64_t flat = 0;
    for (Eigen::Index j = 0; j < n; ++j) {
      flat = flat * grid.nodes[static_cast<std::size_t>(j)] + idx[j];
      x(j) = grid.lo(j) + grid.step(j) * static_cast<double>(idx[j]);
    }
    fn(flat, x);
    Eigen::Index j = n - 1;
    while (j >= 0 && idx[j] == last[j]) {
      idx[j] = first[j];
      --j;
    }
    if (j < 0) return;
    ++idx[j];
  }
}

// Gauge of K about an interior reference point.
struct ReferenceGauge {
  ConstraintSet set;       // the body itself
  ConstraintSet centered;  // K - p
  Box box;
  Point p;
  double inradius = 0.0;

  explicit ReferenceGauge(const ConvexBody& body) {
    set = as_constraints(body);
    box = sampling_box(body, set);
    if (const auto c = symmetry_center(body)) {
      p = *c;
    } else if (!set.has_ellipsoids()) {
      p = chebyshev_ball(HPolytope{set.normals(), set.offsets()}).center;
    } else {
      p = box.center();
    }
    inradius = set.inradius_about(p);
    if (!(inradius > 0.0)) {
      throw std::domain_error("cover: no interior reference point found");
    }
    centered = set.translated(-p);
  }

  double operator()(const Point& y) const { return centered.gauge(y - p); }

  // Gauge of x relative to the homothet c + λK.
  double homothet(const Point& x, const Point& c, double lambda) const {
    return (*this)((x - c) / lambda);
  }
};

void check_lambda(double lambda, const char* where) {
  if (!(lambda > 0.0 && lambda < 1.0)) {
    throw std::invalid_argument(std::string(where) + ": lambda must lie in (0, 1)");
  }
}

}  // namespace

RogersBound rogers_bound(int n, double volume_ratio) {
  if (n < 2) throw std::invalid_argument("rogers_bound: n must be at least 2");
  if (!(volume_ratio > 0.0)) throw std::invalid_argument("rogers_bound: ratio must be positive");
  const double dn = n;
  const double lnln = std::log(std::log(dn));
  RogersBound out;
  out.n2_adjusted = lnln < 0.0;
  out.factor = dn * std::log(dn) + dn * std::max(lnln, 0.0) + 5.0 * dn;
  out.value = out.factor * volume_ratio;
  return out;
}

KbCoveringBound kb_covering_bound(int n, double delta_kb) {
  if (!(delta_kb > 0.0 && delta_kb <= 1.0)) {
    throw std::invalid_argument("kb_covering_bound: delta_kb must lie in (0, 1]");
  }
  KbCoveringBound out;
  out.n = n;
  out.delta_kb = delta_kb;
  out.rogers = rogers_bound(n, 1.0);
  out.lambda = 1.0 - 1.0 / n;
  out.homothety_factor = std::pow((1.0 + out.lambda) / out.lambda, n);
  out.bound = out.homothety_factor * out.rogers.factor / delta_kb;
  out.simplified_constant = out.bound * delta_kb / std::ldexp(1.0, n);
  return out;
}

CoveringCertificate greedy_cover(const ConvexBody& body, double lambda, double lattice_spacing,
                                 double grid_resolution) {
  check_lambda(lambda, "greedy_cover");
  if (!(lattice_spacing > 0.0) || !(grid_resolution > 0.0)) {
    throw std::invalid_argument("greedy_cover: spacings must be positive");
  }
  const int n = body.dim();
  const ReferenceGauge gauge(body);
  const Grid grid(gauge.box, grid_resolution);
  const double d = grid.cover_radius();

  CoveringCertificate cert{body, lambda, {}, 0, lattice_spacing, grid_resolution, gauge.p,
                           gauge.inradius, 0.0, 0, false, 0, {}};
  cert.margin = d / (lambda * gauge.inradius);
  const double cut = 1.0 - kStrictSlack - cert.margin;

  // Nodes within d of K: every point of K has one of them within d.
  const double near = 1.0 + d / gauge.inradius;
  std::vector<char> active(static_cast<std::size_t>(grid.total), 0);
  for_each_index(static_cast<std::size_t>(grid.total), [&](std::size_t i) {
    active[i] = gauge(grid.node(static_cast<std::int64_t>(i))) <= near ? 1 : 0;
  });
  cert.grid_points = static_cast<std::uint64_t>(std::count(active.begin(), active.end(), 1));

  // Cell-centred lattice about p over the box of p + (1 + λ)(K - p).
  std::vector<Point> candidates;
  {
    const Point lo = gauge.p + (1.0 + lambda) * (gauge.box.lo - gauge.p);
    const Point hi = gauge.p + (1.0 + lambda) * (gauge.box.hi - gauge.p);
    std::vector<std::int64_t> first(n), last(n), idx(n);
    for (int j = 0; j < n; ++j) {
      first[j] = static_cast<std::int64_t>(std::ceil((lo(j) - gauge.p(j)) / lattice_spacing - 0.5));
      last[j] = static_cast<std::int64_t>(std::floor((hi(j) - gauge.p(j)) / lattice_spacing - 0.5));
      if (first[j] > last[j]) first[j] = last[j] = 0;
    }
    idx = first;
    Point c(n);
    while (true) {
      for (int j = 0; j < n; ++j) c(j) = gauge.p(j) + (static_cast<double>(idx[j]) + 0.5) * lattice_spacing;
      if (gauge(c) <= 1.0 + lambda) candidates.push_back(c);
      int j = n - 1;
      while (j >= 0 && idx[j] == last[j]) {
        idx[j] = first[j];
        --j;
      }
      if (j < 0) break;
      ++idx[j];
      if (candidates.size() > 5'000'000) {
        throw std::invalid_argument("greedy_cover: lattice spacing too fine");
      }
    }
  }

  std::vector<char> covered(active.size(), 0);
  const Point half_lo = lambda * gauge.box.lo;
  const Point half_hi = lambda * gauge.box.hi;
  auto gain = [&](std::size_t k, bool mark) {
    const Point& c = candidates[k];
    std::uint64_t g = 0;
    for_nodes_in(grid, c + half_lo, c + half_hi, [&](std::int64_t i, const Point& x) {
      const auto u = static_cast<std::size_t>(i);
      if (!active[u] || covered[u]) return;
      if (gauge.homothet(x, c, lambda) <= cut) {
        ++g;
        if (mark) covered[u] = 1;
      }
    });
    return g;
  };

  std::vector<std::uint64_t> initial(candidates.size(), 0);
  for_each_index(candidates.size(), [&](std::size_t k) { initial[k] = gain(k, false); });

  // Lazy greedy: stored gains are upper bounds; ties go to the
  // lexicographically smaller center, which is the smaller index.
  using Entry = std::pair<std::uint64_t, std::size_t>;
  auto worse = [](const Entry& a, const Entry& b) {
    return a.first != b.first ? a.first < b.first : a.second > b.second;
  };
  std::priority_queue<Entry, std::vector<Entry>, decltype(worse)> heap(worse);
  for (std::size_t k = 0; k < candidates.size(); ++k) {
    if (initial[k] > 0) heap.push({initial[k], k});
  }
  std::uint64_t remaining = cert.grid_points;
  while (remaining > 0 && !heap.empty()) {
    const Entry top = heap.top();
    heap.pop();
    const std::uint64_t g = gain(top.second, false);
    if (g == 0) continue;
    const Entry fresh{g, top.second};
    if (heap.empty() || !worse(fresh, heap.top())) {
      gain(top.second, true);
      remaining -= g;
      cert.centers.push_back(candidates[top.second]);
    } else {
      heap.push(fresh);
    }
  }
  cert.count = static_cast<int>(cert.centers.size());
  cert.complete = remaining == 0;
  cert.uncovered_count = remaining;
  for (std::size_t i = 0; i < active.size() && cert.uncovered.size() < kMaxListedPoints; ++i) {
    if (active[i] && !covered[i]) cert.uncovered.push_back(grid.node(static_cast<std::int64_t>(i)));
  }
  return cert;
}

CoverVerification verify_centers(const ConvexBody& body, double lambda,
                                 const std::vector<Point>& centers, double resolution) {
  check_lambda(lambda, "verify_cover");
  if (!(resolution > 0.0)) throw std::invalid_argument("verify_cover: resolution must be positive");
  for (const auto& c : centers) {
    if (c.size() != body.dim()) throw std::invalid_argument("verify_cover: center dimension mismatch");
  }
  const ReferenceGauge gauge(body);
  const Grid grid(gauge.box, resolution);
  std::vector<char> inside(static_cast<std::size_t>(grid.total), 0);
  std::vector<char> bad(inside.size(), 0);
  for_each_index(inside.size(), [&](std::size_t i) {
    const Point x = grid.node(static_cast<std::int64_t>(i));
    if (!gauge.set.contains(x, 0.0)) return;
    inside[i] = 1;
    for (const auto& c : centers) {
      if (gauge.homothet(x, c, lambda) < 1.0 - kStrictSlack) return;
    }
    bad[i] = 1;
  });
  CoverVerification out;
  out.resolution = resolution;
  out.grid_points = static_cast<std::uint64_t>(std::count(inside.begin(), inside.end(), 1));
  out.uncovered_count = static_cast<std::uint64_t>(std::count(bad.begin(), bad.end(), 1));
  for (std::size_t i = 0; i < bad.size() && out.uncovered.size() < kMaxListedPoints; ++i) {
    if (bad[i]) out.uncovered.push_back(grid.node(static_cast<std::int64_t>(i)));
  }
  out.ok = out.uncovered_count == 0;
  return out;
}

CoverVerification verify_cover(const CoveringCertificate& certificate, double resolution) {
  if (!(resolution < certificate.verified_resolution)) {
    throw std::invalid_argument("verify_cover: resolution must be finer than the certificate's");
  }
  return verify_centers(certificate.body, certificate.lambda, certificate.centers, resolution);
}

HadwigerReport hadwiger_report(const ConvexBody& body, const SampleStream& stream,
                               const HadwigerOptions& options) {
  HadwigerReport r;
  r.n = body.dim();
  if (r.n < 2) throw std::invalid_argument("hadwiger_report: requires n >= 2");
  ConvexBody iso_body = body;
  ConvexBody reduced = body;
  if (options.reduce_small_diameter) {
    const SmallDiameterReport sd = reduce_to_small_diameter(body, stream.split(1), options.isotropic);
    r.L_K = sd.first.L_K;
    r.residuals_ok = sd.first.residuals_ok && sd.second.residuals_ok;
    r.small_diameter = true;
    r.truncated_volume = sd.truncated_volume.value;
    r.L_Q = sd.L_Q;
    r.l_ratio = sd.l_ratio;
    r.k_radius = sd.k;
    iso_body = sd.first.body_iso;
    reduced = sd.q;
  } else {
    const IsotropicReport iso = isotropic_position(body, stream.split(1), options.isotropic);
    r.L_K = iso.L_K;
    r.residuals_ok = iso.residuals_ok;
    iso_body = iso.body_iso;
    reduced = iso.body_iso;
  }
  r.witness = witness_pipeline(iso_body, stream.split(2), options.witness);
  r.b2 = r.witness.b2;
  r.fraction = direction_fraction(reduced, r.b2, options.direction_trials, stream.split(3),
                                  std::nullopt, options.direction_samples);
  const SymmetryResult sym = delta_kb(body, options.symmetry, stream.split(4));
  r.delta_kb = sym.delta_kb;
  r.delta_kb_se = sym.std_error;
  r.delta_method = sym.method;
  r.bound = kb_covering_bound(r.n, std::min(1.0, r.delta_kb));
  return r;
}

}  // namespace hadwiger
