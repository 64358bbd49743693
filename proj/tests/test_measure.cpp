#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <numbers>

#include "hadwiger/body.hpp"
#include "hadwiger/measure.hpp"
#include "support/probes.hpp"

using namespace hadwiger;

namespace {

ConvexBody box(const Point& lo, const Point& hi) {
  const int n = static_cast<int>(lo.size());
  Matrix a(2 * n, n);
  a << Matrix::Identity(n, n), -Matrix::Identity(n, n);
  Eigen::VectorXd b(2 * n);
  b << hi, -lo;
  return ConvexBody::hpolytope(a, b);
}

double factorial(int n) { return std::tgamma(n + 1.0); }

}  // namespace

TEST_CASE("exact volumes") {
  CHECK(exact_polytope_volume(make_standard_body(StandardKind::Cube, 4, true)).value ==
        doctest::Approx(1.0).epsilon(1e-12));
  const VolumeEstimate cr = exact_polytope_volume(make_standard_body(StandardKind::CrossPolytope, 3, false));
  CHECK(cr.value == doctest::Approx(4.0 / 3.0).epsilon(1e-9));
  CHECK(cr.method == VolumeMethod::Exact);
  CHECK(cr.std_error == 0.0);
  CHECK(cr.samples == 0);

  const ConvexBody sq = box(Point::Zero(2), Point::Ones(2));
  Eigen::Vector2d lo(0.5, 0.0), hi(1.5, 1.0);
  const ConvexBody shifted = box(lo, hi);
  CHECK(exact_polytope_volume(intersect(sq, shifted)).value == doctest::Approx(0.5).epsilon(1e-12));

  // 2^n/n! and the cube at every exact dimension
  for (int n = 1; n <= 6; ++n) {
    CAPTURE(n);
    CHECK(exact_polytope_volume(make_standard_body(StandardKind::CrossPolytope, n, false)).value ==
          doctest::Approx(std::pow(2.0, n) / factorial(n)).epsilon(1e-9));
    CHECK(exact_polytope_volume(make_standard_body(StandardKind::Cube, n, false)).value ==
          doctest::Approx(std::pow(2.0, n)).epsilon(1e-9));
  }
}

TEST_CASE("exact volume preconditions") {
  CHECK_THROWS_AS(exact_polytope_volume(make_standard_body(StandardKind::Cube, 7, false)),
                  std::invalid_argument);
  CHECK_THROWS_AS(exact_polytope_volume(ConvexBody::ball(Point::Zero(2), 1.0)), std::invalid_argument);
}

TEST_CASE("exact volumes are deterministic and ignore duplicate vertices") {
  Matrix v(2, 6);
  v << 0, 1, 0, 1, 1e-12, 0.5, 0, 0, 1, 1, 0, 0.5;
  const ConvexBody p = ConvexBody::vpolytope(v);
  CHECK(exact_polytope_volume(p).value == doctest::Approx(1.0).epsilon(1e-12));
  // the near-duplicate merges; the interior point is kept as given
  CHECK(polytope_vertices(p).cols() == 5);
  const ConvexBody s = make_standard_body(StandardKind::Simplex, 5, true);
  CHECK(exact_polytope_volume(s).value == exact_polytope_volume(s).value);
}

TEST_CASE("Monte Carlo volumes") {
  const VolumeEstimate c = mc_volume(make_standard_body(StandardKind::Cube, 3, true), 7, 1'000'000);
  CHECK(c.method == VolumeMethod::MonteCarlo);
  CHECK(c.samples == 1'000'000);
  CHECK(std::abs(c.value - 1.0) <= 3.0 * c.std_error + 1e-12);

  const VolumeEstimate disc = mc_volume(ConvexBody::ball(Point::Zero(2), 1.0), 3, 1'000'000);
  CHECK(disc.std_error > 0.0);
  CHECK(std::abs(disc.value - std::numbers::pi) <= 3.0 * disc.std_error);

  const VolumeEstimate s = mc_volume(make_standard_body(StandardKind::Simplex, 4, true), 1, 1'000'000);
  CHECK(std::abs(s.value - 1.0) <= 3.0 * s.std_error);

  CHECK_THROWS_AS(mc_volume(make_standard_body(StandardKind::Cube, 2, true), 1, 0),
                  std::invalid_argument);
}

TEST_CASE("rejection standard error formula") {
  const std::uint64_t m = 200'000;
  const VolumeEstimate disc = mc_volume(ConvexBody::ball(Point::Zero(2), 1.0), 5, m);
  const double p = disc.value / 4.0;
  CHECK(disc.std_error == doctest::Approx(disc.value * std::sqrt((1 - p) / (p * m))).epsilon(1e-9));
}

TEST_CASE("exact and Monte Carlo volumes agree on the standard families") {
  for (int n = 1; n <= 5; ++n) {
    for (auto kind : {StandardKind::Cube, StandardKind::Simplex, StandardKind::CrossPolytope,
                      StandardKind::Ball}) {
      const ConvexBody k = make_standard_body(kind, n, false);
      const double exact = kind == StandardKind::Ball ? unit_ball_volume(n)
                                                      : exact_polytope_volume(k).value;
      const VolumeEstimate mc = mc_volume(k, 100 + n, 1'000'000);
      CAPTURE(n);
      CAPTURE(to_string(kind));
      CHECK(std::abs(mc.value - exact) <= 4.0 * mc.std_error + 1e-12);
    }
  }
}

TEST_CASE("Monte Carlo volumes do not depend on the worker count") {
  const ConvexBody k = make_standard_body(StandardKind::Simplex, 3, true);
  setenv("HADWIGER_WORKERS", "1", 1);
  const VolumeEstimate one = mc_volume(k, 9, 300'000);
  setenv("HADWIGER_WORKERS", "3", 1);
  const VolumeEstimate three = mc_volume(k, 9, 300'000);
  unsetenv("HADWIGER_WORKERS");
  CHECK(one.value == three.value);
  CHECK(one.std_error == three.std_error);
  CHECK(mc_volume(k, 10, 300'000).value != one.value);
}

TEST_CASE("volume products") {
  CHECK(volume_product(make_standard_body(StandardKind::Cube, 2, false)).value ==
        doctest::Approx(2.0 * std::sqrt(2.0)).epsilon(1e-9));
  CHECK(volume_product(ConvexBody::ball(Point::Zero(2), 1.0)).value ==
        doctest::Approx(std::numbers::pi).epsilon(1e-9));
  CHECK(volume_product(make_standard_body(StandardKind::Cube, 3, false)).value ==
        doctest::Approx(std::cbrt(8.0 * 4.0 / 3.0)).epsilon(1e-9));
  CHECK_THROWS_AS(volume_product(make_standard_body(StandardKind::Simplex, 2, true)),
                  std::invalid_argument);
}

TEST_CASE("volume products stay inside the symmetric range") {
  for (int n = 2; n <= 4; ++n) {
    const ProductRange r = volume_product_range(n);
    CHECK(r.lower == doctest::Approx(std::pow(std::pow(4.0, n) / factorial(n), 1.0 / n)));
    CHECK(r.upper == doctest::Approx(std::pow(unit_ball_volume(n), 2.0 / n)));
    for (auto kind : {StandardKind::Cube, StandardKind::CrossPolytope}) {
      const double v = volume_product(make_standard_body(kind, n, true)).value;
      CHECK(std::abs(n * v - n * r.lower) <= 1e-6);
    }
    CHECK(std::abs(n * volume_product(make_standard_body(StandardKind::Ball, n, true)).value -
                   n * r.upper) <= 1e-6);
    // random symmetric polytopes land strictly inside
    for (int trial = 0; trial < 3; ++trial) {
      const Matrix t = probes::random_matrix(n, 50 + trial);
      const Matrix pts = probes::gaussian(n, 2 * n + 2, 60 + trial);
      Matrix v(n, 2 * pts.cols());
      v << pts, -pts;
      const ConvexBody k = affine_image(ConvexBody::vpolytope(v), t, Point::Zero(n));
      REQUIRE(k.symmetric());
      const double p = volume_product(k).value;
      CHECK(p >= r.lower - 1e-9);
      CHECK(p <= r.upper + 1e-9);
    }
  }
}

TEST_CASE("Monte Carlo volume products") {
  VolumeOptions opts;
  opts.force_monte_carlo = true;
  opts.seed = 4;
  const VolumeProduct vp = volume_product(make_standard_body(StandardKind::Cube, 2, false), opts);
  CHECK(vp.method == VolumeMethod::MonteCarlo);
  CHECK(std::abs(vp.value - 2.0 * std::sqrt(2.0)) <= 4.0 * vp.std_error);
}
