#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <vector>

#include "hadwiger/body.hpp"
#include "hadwiger/sample.hpp"
#include "support/probes.hpp"

using namespace hadwiger;

namespace {

// Two-sample energy statistic with a permutation p-value.
double energy_pvalue(const Matrix& x, const Matrix& y, int permutations, std::uint64_t seed) {
  const Eigen::Index nx = x.cols(), ny = y.cols(), n = nx + ny;
  Matrix all(x.rows(), n);
  all << x, y;
  Matrix d(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) d(i, j) = (all.col(i) - all.col(j)).norm();
  }
  auto stat = [&](const std::vector<int>& idx) {
    double xy = 0, xx = 0, yy = 0;
    for (Eigen::Index i = 0; i < nx; ++i) {
      for (Eigen::Index j = nx; j < n; ++j) xy += d(idx[i], idx[j]);
      for (Eigen::Index j = 0; j < nx; ++j) xx += d(idx[i], idx[j]);
    }
    for (Eigen::Index i = nx; i < n; ++i) {
      for (Eigen::Index j = nx; j < n; ++j) yy += d(idx[i], idx[j]);
    }
    return 2 * xy / (nx * ny) - xx / (nx * nx) - yy / (ny * ny);
  };
  std::vector<int> idx(n);
  for (Eigen::Index i = 0; i < n; ++i) idx[i] = static_cast<int>(i);
  const double observed = stat(idx);
  SampleStream s(seed);
  int above = 0;
  for (int p = 0; p < permutations; ++p) {
    for (Eigen::Index i = n - 1; i > 0; --i) std::swap(idx[i], idx[s.below(i + 1)]);
    above += stat(idx) >= observed;
  }
  return (above + 1.0) / (permutations + 1.0);
}

double ks_uniform(std::vector<double> v, double lo, double hi) {
  std::sort(v.begin(), v.end());
  const double n = static_cast<double>(v.size());
  double d = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double f = (v[i] - lo) / (hi - lo);
    d = std::max({d, (i + 1) / n - f, f - i / n});
  }
  return d;
}

}  // namespace

TEST_CASE("uniform samples of the square") {
  const std::size_t m = 100'000;
  const Matrix x = sample_uniform(make_standard_body(StandardKind::Cube, 2, true), SampleStream(1), m);
  REQUIRE(x.cols() == static_cast<Eigen::Index>(m));
  const double tol = 4.0 * (1.0 / std::sqrt(12.0)) / std::sqrt(static_cast<double>(m));
  CHECK(std::abs(x.row(0).mean()) <= tol);
  CHECK(std::abs(x.row(1).mean()) <= tol);
  CHECK(x.cwiseAbs().maxCoeff() <= 0.5);
}

TEST_CASE("radial law in the ball") {
  const std::size_t m = 100'000;
  const Matrix x = sample_uniform(ConvexBody::ball(Point::Zero(3), 1.0), SampleStream(2), m);
  // |X|³ is uniform on [0, 1]
  const Eigen::ArrayXd r3 = x.colwise().norm().array().cube();
  CHECK(std::abs(r3.mean() - 0.5) <= 4.0 / std::sqrt(12.0 * m));
  CHECK(r3.maxCoeff() <= 1.0);
}

TEST_CASE("barycenter of triangle samples") {
  const std::size_t m = 100'000;
  const Matrix x = sample_uniform(make_standard_body(StandardKind::Simplex, 2, true), SampleStream(3), m);
  for (int i = 0; i < 2; ++i) {
    const double mean = x.row(i).mean();
    const double sd = std::sqrt((x.row(i).array() - mean).square().mean());
    CHECK(std::abs(mean) <= 4.0 * sd / std::sqrt(static_cast<double>(m)));
  }
}

TEST_CASE("sphere samples") {
  const std::size_t m = 100'000;
  const Matrix t2 = sample_sphere(2, SampleStream(1), m);
  CHECK((t2.colwise().norm().array() - 1.0).abs().maxCoeff() <= 1e-12);
  // θ₁² = cos² of a uniform angle: mean 1/2, variance 1/8
  CHECK(std::abs(t2.row(0).array().square().mean() - 0.5) <= 4.0 * std::sqrt(0.125 / m));

  const Matrix t5 = sample_sphere(5, SampleStream(9), m);
  for (int i = 0; i < 5; ++i) CHECK(std::abs(t5.row(i).mean()) <= 4.0 * std::sqrt(0.2 / m));

  const Matrix t3 = sample_sphere(3, SampleStream(4), m);
  std::vector<double> z;
  z.reserve(m);
  for (std::size_t j = 0; j < m; ++j) z.push_back(t3(2, static_cast<Eigen::Index>(j)));
  // 1% critical value of the Kolmogorov-Smirnov statistic
  CHECK(ks_uniform(z, -1.0, 1.0) < 1.628 / std::sqrt(static_cast<double>(m)));

  CHECK_THROWS_AS(sample_sphere(0, SampleStream(1), 10), std::invalid_argument);
}

TEST_CASE("samples are reproducible and independent of the worker count") {
  const ConvexBody k = make_standard_body(StandardKind::CrossPolytope, 3, true);
  setenv("HADWIGER_WORKERS", "1", 1);
  const Matrix a = sample_uniform(k, SampleStream(5), 70'000);
  setenv("HADWIGER_WORKERS", "4", 1);
  const Matrix b = sample_uniform(k, SampleStream(5), 70'000);
  unsetenv("HADWIGER_WORKERS");
  CHECK(a == b);
  CHECK(sample_uniform(k, SampleStream(6), 70'000) != a);
  CHECK(sample_sphere(4, SampleStream(3), 1000) == sample_sphere(4, SampleStream(3), 1000));
}

TEST_CASE("every sample lies in the body") {
  const Matrix t = probes::random_matrix(3, 77);
  for (const auto& k : {make_standard_body(StandardKind::Simplex, 3, true),
                        make_standard_body(StandardKind::CrossPolytope, 4, true),
                        affine_image(make_standard_body(StandardKind::Cube, 3, true), t, Point::Ones(3)),
                        ConvexBody::intersection({make_standard_body(StandardKind::Cube, 3, true),
                                                  ConvexBody::ball(Point::Zero(3), 0.6)})}) {
    const Matrix x = sample_uniform(k, SampleStream(8), 20'000);
    int outside = 0;
    for (Eigen::Index j = 0; j < x.cols(); ++j) outside += !contains(k, x.col(j));
    CAPTURE(k.kind_name());
    CHECK(outside == 0);
  }
}

TEST_CASE("hit-and-run on a thin body") {
  // the 8-dim cross-polytope fills 8!^{-1} of its box
  const ConvexBody k = make_standard_body(StandardKind::CrossPolytope, 8, false);
  const UniformSampler sampler(k, SampleStream(1));
  CHECK(sampler.method() == SamplerMethod::HitAndRun);
  CHECK(sampler.pilot_acceptance() < 1e-3);
  const Matrix x = sampler.sample(SampleStream(2), 20'000);
  int outside = 0;
  for (Eigen::Index j = 0; j < x.cols(); ++j) outside += x.col(j).cwiseAbs().sum() > 1.0 + 1e-9;
  CHECK(outside == 0);
  // |X|₁ has density 8 r^7 on [0, 1]: mean 8/9, variance 8/810
  const Eigen::ArrayXd l1 = x.cwiseAbs().colwise().sum().array();
  CHECK(std::abs(l1.mean() - 8.0 / 9.0) <= 6.0 * std::sqrt(8.0 / 810.0 / 20'000));
}

TEST_CASE("forced hit-and-run matches the rejection sampler") {
  SamplerOptions opts;
  opts.acceptance_floor = 2.0;
  const ConvexBody k = make_standard_body(StandardKind::Simplex, 2, true);
  const UniformSampler walk(k, SampleStream(1), opts);
  REQUIRE(walk.method() == SamplerMethod::HitAndRun);
  const Matrix a = walk.sample(SampleStream(3), 400);
  const Matrix b = sample_uniform(k, SampleStream(4), 400);
  CHECK(energy_pvalue(a, b, 200, 1) > 0.01);
}

TEST_CASE("affine images push samples forward") {
  for (auto kind : {StandardKind::Cube, StandardKind::Simplex, StandardKind::CrossPolytope}) {
    const ConvexBody k = make_standard_body(kind, 2, true);
    const Matrix t = probes::random_matrix(2, 90);
    const Point shift = Point::Constant(2, 0.5);
    const Matrix pushed = (t * sample_uniform(k, SampleStream(5), 400)).colwise() + shift;
    const Matrix direct = sample_uniform(affine_image(k, t, shift), SampleStream(6), 400);
    CAPTURE(to_string(kind));
    CHECK(energy_pvalue(pushed, direct, 200, 2) > 0.01);
  }
}
