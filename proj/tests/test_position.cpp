#include <doctest.h>

#include <cmath>
#include <numbers>

#include "hadwiger/body.hpp"
#include "hadwiger/measure.hpp"
#include "hadwiger/position.hpp"
#include "hadwiger/sample.hpp"
#include "hadwiger/symmetry.hpp"
#include "support/probes.hpp"

using namespace hadwiger;

namespace {

const double kCubeL = 1.0 / std::sqrt(12.0);

// L of the volume-1 ball: E X₁² = r²/(n+2).
double ball_L(int n) {
  const double r = std::pow(unit_ball_volume(n), -1.0 / n);
  return r / std::sqrt(n + 2.0);
}

IsotropicOptions fast(std::uint64_t samples = 200'000) {
  IsotropicOptions o;
  o.samples = samples;
  o.volume_samples = 200'000;
  return o;
}

}  // namespace

TEST_CASE("moments of the cube") {
  const Moments m = estimate_moments(make_standard_body(StandardKind::Cube, 3, true), SampleStream(1),
                                     1'000'000);
  CHECK(m.samples == 1'000'000);
  for (int i = 0; i < 3; ++i) {
    CHECK(std::abs(m.barycenter(i)) <= 4.0 * m.barycenter_se(i));
    for (int j = 0; j < 3; ++j) {
      const double expected = i == j ? 1.0 / 12.0 : 0.0;
      CAPTURE(i);
      CAPTURE(j);
      CHECK(std::abs(m.covariance(i, j) - expected) <= 4.0 * m.covariance_se(i, j));
    }
  }
}

TEST_CASE("moments of symmetric bodies") {
  for (const auto& k : {make_standard_body(StandardKind::CrossPolytope, 3, true),
                        make_standard_body(StandardKind::Ball, 4, true)}) {
    const Moments m = estimate_moments(k, SampleStream(3), 200'000);
    for (Eigen::Index i = 0; i < m.barycenter.size(); ++i) {
      CHECK(std::abs(m.barycenter(i)) <= 4.0 * m.barycenter_se(i));
    }
  }
  const Moments d = estimate_moments(make_standard_body(StandardKind::Ball, 2, true), SampleStream(2),
                                     1'000'000);
  const double se = std::hypot(d.covariance_se(0, 0), d.covariance_se(1, 1));
  CHECK(std::abs(d.covariance(0, 0) - d.covariance(1, 1)) <= 4.0 * se);
  CHECK(std::abs(d.covariance(0, 1)) <= 4.0 * d.covariance_se(0, 1));
  CHECK_THROWS_AS(estimate_moments(make_standard_body(StandardKind::Cube, 2, true), SampleStream(1), 999),
                  std::invalid_argument);
}

TEST_CASE("isotropic constant of the cube") {
  const IsotropicReport r = isotropic_position(make_standard_body(StandardKind::Cube, 4, true), SampleStream(1));
  CHECK(r.L_K == doctest::Approx(kCubeL).epsilon(0.02));
  CHECK(r.residuals_ok);
  CHECK(r.covariance_residual <= 0.02 * r.L_K * r.L_K);
  CHECK(volume(r.body_iso).value == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("isotropic input is a fixed point") {
  const IsotropicReport r = isotropic_position(make_standard_body(StandardKind::Cube, 3, true), SampleStream(2));
  Eigen::JacobiSVD<Matrix> svd(r.matrix);
  CHECK(svd.singularValues().maxCoeff() <= 1.02);
  CHECK(svd.singularValues().minCoeff() >= 0.98);

  const IsotropicReport b = isotropic_position(make_standard_body(StandardKind::Ball, 3, true), SampleStream(3), fast());
  CHECK(b.L_K == doctest::Approx(ball_L(3)).epsilon(0.02));
}

TEST_CASE("isotropic constant is an affine invariant") {
  for (int n = 2; n <= 4; ++n) {
    const Matrix t = probes::random_matrix(n, 200 + n);
    const ConvexBody img = affine_image(make_standard_body(StandardKind::Cube, n, false), t,
                                        Point::LinSpaced(n, -1.0, 2.0));
    const IsotropicReport r = isotropic_position(img, SampleStream(4));
    CAPTURE(n);
    CHECK(r.L_K == doctest::Approx(kCubeL).epsilon(0.03));
    CHECK(r.residuals_ok);
  }
}

TEST_CASE("small-diameter truncation") {
  // √6·L = 0.707 is below the circumradius √3/2 of the unit cube
  const IsotropicReport cube = isotropic_position(make_standard_body(StandardKind::Cube, 3, true), SampleStream(5), fast());
  const ConvexBody cut = small_diameter_truncation(cube);
  const VolumeEstimate v = mc_volume(cut, 6, 1'000'000);
  CHECK(v.value < 1.0 - 4.0 * v.std_error);
  CHECK(v.value >= 0.5 - 4.0 * v.std_error);

  // the volume-1 ball lies inside √(2n)·L·B: nothing is removed
  for (int n = 2; n <= 5; ++n) {
    const ConvexBody ball = make_standard_body(StandardKind::Ball, n, true);
    const IsotropicReport r = isotropic_position(ball, SampleStream(7), fast());
    const double radius = std::sqrt(2.0 * n) * r.L_K;
    CHECK(support_value(r.body_iso, Point::Unit(n, 0)) < radius);
    const VolumeEstimate vb = mc_volume(small_diameter_truncation(r), 8, 200'000);
    CHECK(std::abs(vb.value - 1.0) <= 4.0 * vb.std_error + 1e-12);
  }
}

TEST_CASE("truncation keeps at least half the volume") {
  const Matrix t = probes::random_matrix(3, 300);
  for (const auto& k : {make_standard_body(StandardKind::Simplex, 2, true),
                        make_standard_body(StandardKind::Simplex, 3, true),
                        make_standard_body(StandardKind::CrossPolytope, 3, true),
                        make_standard_body(StandardKind::Cube, 4, true),
                        affine_image(make_standard_body(StandardKind::Simplex, 3, true), t, Point::Zero(3))}) {
    const IsotropicReport r = isotropic_position(k, SampleStream(9), fast());
    const VolumeEstimate v = mc_volume(small_diameter_truncation(r), 10, 500'000);
    CAPTURE(k.dim());
    CHECK(v.value >= 0.5 - 4.0 * v.std_error);
  }
}

TEST_CASE("reduction to small diameter") {
  const SmallDiameterReport s =
      reduce_to_small_diameter(make_standard_body(StandardKind::Simplex, 3, true), SampleStream(11), fast());
  CHECK(std::isfinite(s.k));
  CHECK(s.k > 0.0);
  CHECK(s.truncated_volume.value >= 0.5 - 4.0 * s.truncated_volume.std_error);
  const Matrix x = sample_uniform(s.q, SampleStream(12), 100'000);
  int violations = 0;
  for (Eigen::Index j = 0; j < x.cols(); ++j) violations += x.col(j).norm() > s.radius_bound;
  CHECK(violations == 0);
  CHECK(s.radius_bound == doctest::Approx(s.k * std::sqrt(3.0) * s.L_Q));

  // the ball is already small-diameter: both positions agree
  const SmallDiameterReport b =
      reduce_to_small_diameter(make_standard_body(StandardKind::Ball, 3, true), SampleStream(13), fast());
  CHECK(b.l_ratio == doctest::Approx(1.0).epsilon(0.02));
  CHECK(b.L_Q == doctest::Approx(ball_L(3)).epsilon(0.02));
}

TEST_CASE("truncating the cube keeps it symmetric") {
  const SmallDiameterReport s =
      reduce_to_small_diameter(make_standard_body(StandardKind::Cube, 3, true), SampleStream(14), fast());
  SymmetryOptions opts;
  opts.use_symmetry = false;
  opts.method = SymmetryOptions::Method::MonteCarlo;
  opts.restarts = 2;
  opts.samples = 200'000;
  opts.search_samples = 50'000;
  const SymmetryResult r = delta_kb(s.q, opts, SampleStream(15));
  CHECK(r.delta_kb >= 1.0 - 4.0 * r.std_error - 0.01);
}

TEST_CASE("L ratio is stable across seeds") {
  std::vector<double> ratios;
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    ratios.push_back(reduce_to_small_diameter(make_standard_body(StandardKind::Simplex, 3, true),
                                              SampleStream(seed), fast())
                         .l_ratio);
  }
  const double lo = *std::min_element(ratios.begin(), ratios.end());
  const double hi = *std::max_element(ratios.begin(), ratios.end());
  CHECK(hi <= 1.2 * lo);
  CHECK(lo > 0.0);
}
