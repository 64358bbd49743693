#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "hadwiger/body.hpp"
#include "hadwiger/measure.hpp"
#include "hadwiger/sample.hpp"
#include "hadwiger/symmetry.hpp"
#include "support/oracles.hpp"
#include "support/probes.hpp"

using namespace hadwiger;

namespace {

ConvexBody segment() { return make_standard_body(StandardKind::Cube, 1, true); }
ConvexBody square() { return make_standard_body(StandardKind::Cube, 2, true); }
ConvexBody triangle() { return make_standard_body(StandardKind::Simplex, 2, true); }

oracle::Polygon as_polygon(const ConvexBody& k) {
  const Matrix v = polytope_vertices(k);
  const Eigen::Vector2d c = v.rowwise().mean();
  oracle::Polygon p;
  for (Eigen::Index j = 0; j < v.cols(); ++j) p.emplace_back(v.col(j));
  std::sort(p.begin(), p.end(), [&](const auto& a, const auto& b) {
    return std::atan2(a.y() - c.y(), a.x() - c.x()) < std::atan2(b.y() - c.y(), b.x() - c.x());
  });
  return p;
}

double clip_ratio(const ConvexBody& k, const Point& x) {
  const oracle::Polygon p = as_polygon(k);
  return oracle::polygon_area(oracle::clip_polygon(p, oracle::reflect(p, x))) / oracle::polygon_area(p);
}

SymmetryOptions mc_options() {
  SymmetryOptions o;
  o.method = SymmetryOptions::Method::MonteCarlo;
  o.use_symmetry = false;
  o.restarts = 2;
  o.search_samples = 50'000;
  o.samples = 400'000;
  return o;
}

Point vec2(double a, double b) {
  Point p(2);
  p << a, b;
  return p;
}

}  // namespace

TEST_CASE("clipping oracle") {
  // the brute-force maximum over 2K for the triangle is 2/3 at 2·barycenter
  const oracle::GridMax g = oracle::kb_grid_search(oracle::unit_triangle(), 120, 40);
  CHECK(g.ratio == doctest::Approx(2.0 / 3.0).epsilon(1e-4));
  CHECK(g.argmax.norm() < 0.02);
  const oracle::Polygon sq = {{-0.5, -0.5}, {0.5, -0.5}, {0.5, 0.5}, {-0.5, 0.5}};
  CHECK(oracle::polygon_area(oracle::clip_polygon(sq, oracle::reflect(sq, {0.5, 0.0}))) ==
        doctest::Approx(0.5));
}

TEST_CASE("intersection volumes") {
  for (const auto& k : {square(), make_standard_body(StandardKind::CrossPolytope, 3, true)}) {
    CHECK(intersection_volume_at(k, Point::Zero(k.dim()), IntersectionMethod::Exact).value ==
          doctest::Approx(1.0).epsilon(1e-9));
  }
  const VolumeEstimate b =
      intersection_volume_at(make_standard_body(StandardKind::Ball, 3, true), Point::Zero(3),
                             IntersectionMethod::MonteCarlo, 3, 200'000);
  CHECK(std::abs(b.value - 1.0) <= 4.0 * b.std_error + 1e-12);

  const ConvexBody tri = triangle();
  SampleStream s(17);
  for (int i = 0; i < 20; ++i) {
    const Point x = vec2(s.uniform(-1.2, 1.2), s.uniform(-1.2, 1.2));
    CAPTURE(x.transpose());
    CHECK(intersection_volume_at(tri, x, IntersectionMethod::Exact).value ==
          doctest::Approx(clip_ratio(tri, x)).epsilon(1e-9));
  }

  // outside 2K
  CHECK(intersection_volume_at(tri, vec2(5, 5), IntersectionMethod::Exact).value == 0.0);
  CHECK(intersection_volume_at(square(), vec2(1.0, 0.0), IntersectionMethod::Exact).value == 0.0);
  CHECK(intersection_volume_at(square(), vec2(3.0, 0.0), IntersectionMethod::MonteCarlo).value == 0.0);

  CHECK_THROWS_AS(intersection_volume_at(make_standard_body(StandardKind::Ball, 2, true), Point::Zero(2),
                                         IntersectionMethod::Exact),
                  std::invalid_argument);
  CHECK_THROWS_AS(intersection_volume_at(square(), Point::Zero(3), IntersectionMethod::Exact),
                  std::invalid_argument);
}

TEST_CASE("the triangle optimum is a hexagon") {
  const ConvexBody tri = triangle();
  const ConvexBody hex = intersect(tri, reflect_about(tri, Point::Zero(2)));
  CHECK(polytope_vertices(hex).cols() == 6);
  CHECK(exact_polytope_volume(hex).value == doctest::Approx(2.0 / 3.0).epsilon(1e-9));
}

TEST_CASE("convolution identity") {
  const ConvolutionCheck half = convolution_identity_check(square(), vec2(0.5, 0), SampleStream(1), 1'000'000);
  CHECK(half.direct == doctest::Approx(0.5).epsilon(1e-9));
  CHECK(half.convolution == doctest::Approx(0.5).epsilon(0.01));
  CHECK(std::abs(half.z) <= 4.0);

  const ConvolutionCheck full = convolution_identity_check(square(), vec2(0, 0), SampleStream(2), 1'000'000);
  CHECK(full.direct == doctest::Approx(1.0));
  CHECK(full.convolution == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(std::abs(full.z) <= 4.0);

  const ConvexBody tri = triangle();
  SampleStream s(3);
  for (int i = 0; i < 5; ++i) {
    // 2·(uniform point of K) is a point of 2K
    const Point x = 2.0 * sample_uniform(tri, s.split(i), 1).col(0);
    const ConvolutionCheck c = convolution_identity_check(tri, x, s.split(100 + i), 200'000);
    CHECK(c.direct == doctest::Approx(clip_ratio(tri, x)).epsilon(1e-9));
    CHECK(std::abs(c.z) <= 4.0);
  }
}

TEST_CASE("symmetric bodies have delta one") {
  for (int n = 2; n <= 5; ++n) {
    for (auto kind : {StandardKind::Cube, StandardKind::Ball, StandardKind::CrossPolytope}) {
      const SymmetryResult r = delta_kb(make_standard_body(kind, n, true), SymmetryOptions{}, SampleStream(1));
      CHECK(r.delta_kb == 1.0);
      CHECK(r.x_star.norm() == 0.0);
      CHECK(r.method == "symmetric");
    }
  }
  // without the shortcut the search still finds the center
  const SymmetryResult r = delta_kb(square(), mc_options(), SampleStream(2));
  CHECK(r.delta_kb >= 1.0 - 4.0 * r.std_error - 0.01);
  CHECK(r.x_star.norm() < 0.05);
}

TEST_CASE("triangle delta") {
  SymmetryOptions exact;
  exact.method = SymmetryOptions::Method::Exact2d;
  const SymmetryResult e = delta_kb(triangle(), exact, SampleStream(1));
  CHECK(e.method == "exact-2d");
  CHECK(std::abs(e.delta_kb - 2.0 / 3.0) <= 0.01);
  CHECK(e.std_error == 0.0);
  CHECK(e.x_star.norm() < 0.02);

  const SymmetryResult m = delta_kb(triangle(), mc_options(), SampleStream(2));
  CHECK(m.method == "mc");
  CHECK(std::abs(m.delta_kb - e.delta_kb) <= 0.02);

  // the symmetric shortcut answers first, so the check needs it off
  exact.use_symmetry = false;
  CHECK_THROWS_AS(delta_kb(ConvexBody::ball(Point::Zero(2), 1.0), exact, SampleStream(1)),
                  std::invalid_argument);
}

TEST_CASE("simplex delta respects the unconditional bound") {
  const SymmetryResult r = delta_kb(make_standard_body(StandardKind::Simplex, 3, true), mc_options(), SampleStream(3));
  CHECK(r.delta_kb > 0.125);
  CHECK(r.delta_kb <= 1.0);
  CHECK(r.delta_kb >= 0.125 * (1.0 - 4.0 * r.std_error / r.delta_kb));
}

TEST_CASE("delta is affine invariant") {
  const ConvexBody tri = triangle();
  const Matrix t = probes::random_matrix(2, 3);
  const Point shift = vec2(0.4, -0.7);
  SymmetryOptions exact;
  exact.method = SymmetryOptions::Method::Exact2d;
  const SymmetryResult a = delta_kb(tri, exact, SampleStream(4));
  const SymmetryResult b = delta_kb(affine_image(tri, t, shift), exact, SampleStream(4));
  CHECK(b.delta_kb == doctest::Approx(a.delta_kb).epsilon(1e-3));
  // x ∈ 2K maps to T·x + 2·shift
  CHECK((b.x_star - (t * a.x_star + 2.0 * shift)).norm() < 0.05);

  const ConvexBody s3 = make_standard_body(StandardKind::Simplex, 3, true);
  const Matrix t3 = probes::random_matrix(3, 5);
  const SymmetryResult c = delta_kb(s3, mc_options(), SampleStream(5));
  const SymmetryResult d = delta_kb(affine_image(s3, t3, Point::Ones(3)), mc_options(), SampleStream(5));
  CHECK(std::abs(c.delta_kb - d.delta_kb) <= 4.0 * std::hypot(c.std_error, d.std_error) + 0.01);
}

TEST_CASE("delta runs are deterministic") {
  const SymmetryResult a = delta_kb(make_standard_body(StandardKind::Simplex, 3, true), mc_options(), SampleStream(6));
  const SymmetryResult b = delta_kb(make_standard_body(StandardKind::Simplex, 3, true), mc_options(), SampleStream(6));
  CHECK(a.delta_kb == b.delta_kb);
  CHECK(a.x_star == b.x_star);
  CHECK(a.evaluations == b.evaluations);
}

TEST_CASE("g^{1/n} is concave along segments in 2K") {
  const ConvexBody tri = triangle();
  SampleStream s(7);
  for (int i = 0; i < 30; ++i) {
    const Point a = 2.0 * sample_uniform(tri, s.split(2 * i), 1).col(0);
    const Point b = 2.0 * sample_uniform(tri, s.split(2 * i + 1), 1).col(0);
    auto root = [&](const Point& x) {
      return std::sqrt(intersection_volume_at(tri, x, IntersectionMethod::Exact).value);
    };
    CHECK(root(0.5 * (a + b)) >= 0.5 * (root(a) + root(b)) - 1e-9);
  }
  const ConvexBody s3 = make_standard_body(StandardKind::Simplex, 3, true);
  for (int i = 0; i < 5; ++i) {
    const Point a = 2.0 * sample_uniform(s3, s.split(100 + i), 1).col(0);
    const Point b = 2.0 * sample_uniform(s3, s.split(200 + i), 1).col(0);
    auto est = [&](const Point& x, std::uint64_t seed) {
      return intersection_volume_at(s3, x, IntersectionMethod::MonteCarlo, seed, 200'000);
    };
    const VolumeEstimate m = est(0.5 * (a + b), 1), ea = est(a, 2), eb = est(b, 3);
    const double lhs = std::cbrt(m.value);
    const double rhs = 0.5 * (std::cbrt(ea.value) + std::cbrt(eb.value));
    // delta-method error of the cube roots
    auto se = [](const VolumeEstimate& v) {
      return v.value > 0 ? v.std_error / (3.0 * std::pow(v.value, 2.0 / 3.0)) : 0.0;
    };
    CHECK(lhs >= rhs - 4.0 * std::sqrt(se(m) * se(m) + 0.25 * (se(ea) * se(ea) + se(eb) * se(eb))));
  }
}

TEST_CASE("density of averages") {
  AvgDensityReport r1 = avg_density_sup(segment(), 1, SampleStream(1), 2'000'000);
  CHECK(r1.sup_estimate == doctest::Approx(2.0).epsilon(0.03));
  CHECK(r1.N == 1);
  CHECK(std::abs(r1.mode(0)) < 0.05);
  const AvgDensityReport r2 = avg_density_sup(segment(), 2, SampleStream(2), 2'000'000);
  CHECK(r2.sup_estimate == doctest::Approx(oracle::uniform_mean_density(4, 0.0)).epsilon(0.03));
  const AvgDensityReport q1 = avg_density_sup(square(), 1, SampleStream(3), 2'000'000);
  CHECK(q1.sup_estimate == doctest::Approx(4.0).epsilon(0.05));

  CHECK_THROWS_AS(avg_density_sup(make_standard_body(StandardKind::Cube, 4, true), 1, SampleStream(1), 10'000),
                  std::invalid_argument);
  CHECK_THROWS_AS(avg_density_sup(segment(), 0, SampleStream(1), 10'000), std::invalid_argument);
}

TEST_CASE("Irwin-Hall oracle") {
  CHECK(oracle::uniform_mean_density(2, 0.0) == doctest::Approx(2.0));
  CHECK(oracle::uniform_mean_density(4, 0.0) == doctest::Approx(8.0 / 3.0));
  CHECK(oracle::uniform_mean_density(2, 0.25) == doctest::Approx(1.0));
  CHECK(oracle::uniform_mean_density(1, 0.3) == doctest::Approx(1.0));
  CHECK(oracle::uniform_mean_density(3, 0.6) == 0.0);
  // integrates to one
  double total = 0.0;
  for (int i = 0; i < 10000; ++i) total += oracle::uniform_mean_density(4, -0.5 + (i + 0.5) / 10000.0) / 10000.0;
  CHECK(total == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("averaging inequality on grids") {
  std::vector<Point> line;
  for (int i = -4; i <= 4; ++i) line.push_back(Point::Constant(1, 0.1 * i));
  const DensityComparison one = lemma31_check(segment(), 1, line, SampleStream(1), 2'000'000);
  CHECK(one.all_ok);
  for (const auto& row : one.rows) {
    // N = 1: S_1 is the pair average itself
    CHECK(std::abs(row.f_sn - row.f_avg) <= 4.0 * std::hypot(row.f_sn_se, row.f_avg_se));
    CHECK(row.f_avg == doctest::Approx(oracle::uniform_mean_density(2, row.x(0))).epsilon(0.05));
  }

  const DensityComparison two = lemma31_check(segment(), 2, {Point::Zero(1)}, SampleStream(2), 2'000'000);
  CHECK(two.rows[0].f_sn == doctest::Approx(8.0 / 3.0).epsilon(0.05));
  CHECK(two.rows[0].rhs == doctest::Approx(8.0).epsilon(0.1));
  CHECK(two.all_ok);

  const DensityComparison sq = lemma31_check(square(), 2, {Point::Zero(2), vec2(0.2, -0.1)}, SampleStream(3), 2'000'000);
  CHECK(sq.rows[0].f_sn == doctest::Approx(64.0 / 9.0).epsilon(0.1));
  CHECK(sq.rows[0].rhs == doctest::Approx(64.0).epsilon(0.2));
  CHECK(sq.all_ok);

  CHECK_THROWS_AS(lemma31_check(make_standard_body(StandardKind::Cube, 3, true), 1, {Point::Zero(3)}, SampleStream(1), 10'000),
                  std::invalid_argument);
}

TEST_CASE("lower bound from the density of averages") {
  AvgDensityReport r;
  r.N = 2;
  r.sup_estimate = 8.0 / 3.0;
  CHECK(kb_lower_bound_from_avg(r, 1) == doctest::Approx(0.5 * std::cbrt(8.0 / 3.0)));
  CHECK(kb_lower_bound_from_avg(r, 1) == doctest::Approx(0.693361).epsilon(1e-5));
  r.N = 1;
  r.sup_estimate = 2.0;
  CHECK(kb_lower_bound_from_avg(r, 1) == doctest::Approx(1.0));
  r.N = 0;
  CHECK_THROWS_AS(kb_lower_bound_from_avg(r, 1), std::invalid_argument);

  // triangle: below the clipping-oracle value
  const AvgDensityReport t = avg_density_sup(triangle(), 2, SampleStream(4), 2'000'000);
  const double lb = kb_lower_bound_from_avg(t, 2);
  const double lb_hi = 0.25 * std::cbrt(t.sup_estimate + 4.0 * t.std_error);
  CHECK(lb <= 2.0 / 3.0 + (lb_hi - lb));
}
