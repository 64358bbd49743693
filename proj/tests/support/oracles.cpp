#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace oracle {

double polygon_area(const Polygon& p) {
  double twice = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const Vec2& a = p[i];
    const Vec2& b = p[(i + 1) % p.size()];
    twice += a.x() * b.y() - a.y() * b.x();
  }
  return 0.5 * std::abs(twice);
}

namespace {

double cross(const Vec2& o, const Vec2& a, const Vec2& b) {
  return (a.x() - o.x()) * (b.y() - o.y()) - (a.y() - o.y()) * (b.x() - o.x());
}

}  // namespace

Polygon clip_polygon(const Polygon& subject, const Polygon& clip) {
  Polygon out = subject;
  for (std::size_t e = 0; e < clip.size() && !out.empty(); ++e) {
    const Vec2& a = clip[e];
    const Vec2& b = clip[(e + 1) % clip.size()];
    Polygon in = std::move(out);
    out.clear();
    for (std::size_t i = 0; i < in.size(); ++i) {
      const Vec2& p = in[i];
      const Vec2& q = in[(i + 1) % in.size()];
      const double sp = cross(a, b, p);
      const double sq = cross(a, b, q);
      if (sp >= 0) out.push_back(p);
      if ((sp >= 0) != (sq >= 0)) out.push_back(p + (q - p) * (sp / (sp - sq)));
    }
  }
  return out;
}

Polygon reflect(const Polygon& p, const Vec2& x) {
  Polygon r;
  for (const auto& v : p) r.push_back(x - v);
  // point reflection keeps the orientation in the plane
  return r;
}

GridMax kb_grid_search(const Polygon& k, int coarse, int fine) {
  const double area = polygon_area(k);
  Vec2 lo = k[0], hi = k[0];
  for (const auto& v : k) {
    lo = lo.cwiseMin(v);
    hi = hi.cwiseMax(v);
  }
  lo *= 2.0;
  hi *= 2.0;
  GridMax best;
  auto eval = [&](const Vec2& x) {
    const double r = polygon_area(clip_polygon(k, reflect(k, x))) / area;
    if (r > best.ratio) {
      best.ratio = r;
      best.argmax = x;
    }
  };
  for (int i = 0; i <= coarse; ++i) {
    for (int j = 0; j <= coarse; ++j) {
      eval(Vec2(lo.x() + (hi.x() - lo.x()) * i / coarse, lo.y() + (hi.y() - lo.y()) * j / coarse));
    }
  }
  const Vec2 step = (hi - lo) / coarse;
  const Vec2 centre = best.argmax;
  for (int i = -fine; i <= fine; ++i) {
    for (int j = -fine; j <= fine; ++j) {
      eval(centre + Vec2(step.x() * i / fine, step.y() * j / fine));
    }
  }
  return best;
}

double segment_psi(double alpha) {
  // mean of exp((|u|/λ)^α) over U[-1/2,1/2] = 2∫_0^{1/2} exp((u/λ)^α) du
  auto mean = [alpha](double lambda) {
    const int m = 4000;
    const double h = 0.5 / m;
    double s = 0.0;
    for (int i = 0; i <= m; ++i) {
      const double w = (i == 0 || i == m) ? 1.0 : (i % 2 ? 4.0 : 2.0);
      s += w * std::exp(std::pow(i * h / lambda, alpha));
    }
    return 2.0 * s * h / 3.0;
  };
  double lo = 0.05, hi = 10.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    (mean(mid) > 2.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

double uniform_mean_density(int k, double x) {
  // sum of k U(0,1) has density Σ_j (-1)^j C(k,j) (s-j)^{k-1} / (k-1)!
  const double s = k * x + 0.5 * k;
  if (s <= 0 || s >= k) return 0.0;
  double f = 0.0;
  double binom = 1.0;
  for (int j = 0; j <= static_cast<int>(std::floor(s)); ++j) {
    f += (j % 2 ? -1.0 : 1.0) * binom * std::pow(s - j, k - 1);
    binom = binom * (k - j) / (j + 1);
  }
  f /= std::tgamma(static_cast<double>(k));
  return k * f;
}

HRep random_hpolytope(int n, int facets, hadwiger::SampleStream& stream) {
  HRep h;
  h.A.resize(facets + 2 * n, n);
  h.b.resize(facets + 2 * n);
  for (int i = 0; i < facets; ++i) {
    Eigen::VectorXd a(n);
    for (int j = 0; j < n; ++j) a(j) = stream.normal();
    h.A.row(i) = a.normalized().transpose();
    h.b(i) = stream.uniform(0.3, 1.0);
  }
  for (int j = 0; j < n; ++j) {
    h.A.row(facets + 2 * j).setZero();
    h.A(facets + 2 * j, j) = 1.0;
    h.A.row(facets + 2 * j + 1).setZero();
    h.A(facets + 2 * j + 1, j) = -1.0;
    h.b(facets + 2 * j) = h.b(facets + 2 * j + 1) = 3.0;
  }
  return h;
}

bool in_open_homothet(const HRep& k, double lambda, const Eigen::VectorXd& c,
                      const Eigen::VectorXd& x, double slack) {
  const Eigen::VectorXd lhs = k.A * (x - c);
  for (Eigen::Index i = 0; i < lhs.size(); ++i) {
    if (lhs(i) >= lambda * k.b(i) - slack) return false;
  }
  return true;
}

std::vector<Eigen::VectorXd> cube_corner_centers(int n, double h, double t) {
  std::vector<Eigen::VectorXd> out;
  for (int mask = 0; mask < (1 << n); ++mask) {
    Eigen::VectorXd c(n);
    for (int j = 0; j < n; ++j) c(j) = ((mask >> j) & 1 ? 1.0 : -1.0) * t * h;
    out.push_back(c);
  }
  return out;
}

Polygon unit_triangle() {
  // equilateral with area 1: side s, s²√3/4 = 1
  const double s = std::sqrt(4.0 / std::sqrt(3.0));
  const double r = s / std::sqrt(3.0);
  Polygon p;
  for (int i = 0; i < 3; ++i) {
    const double a = std::numbers::pi / 2 + 2 * std::numbers::pi * i / 3;
    p.emplace_back(r * std::cos(a), r * std::sin(a));
  }
  return p;
}

}  // namespace oracle
