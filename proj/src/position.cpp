#include "hadwiger/position.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

#include "hadwiger/parallel.hpp"

namespace hadwiger {

namespace {

constexpr int kJackknifeGroups = 20;

struct GroupSums {
  std::vector<double> count;
  std::vector<Point> sum;
  std::vector<Matrix> outer;

  explicit GroupSums(int n)
      : count(kJackknifeGroups, 0.0),
        sum(kJackknifeGroups, Point::Zero(n)),
        outer(kJackknifeGroups, Matrix::Zero(n, n)) {}
};

void covariance_from(double count, const Point& sum, const Matrix& outer, Point& mean, Matrix& cov) {
  mean = sum / count;
  cov = (outer - count * mean * mean.transpose()) / (count - 1.0);
}

std::uint64_t derived_seed(const SampleStream& stream, std::uint64_t id) {
  return stream.split(id).next_u64();
}

}  // namespace

Moments estimate_moments(const ConvexBody& body, const SampleStream& stream, std::uint64_t samples,
                         SamplerOptions sampler) {
  if (samples < kMinMomentSamples) {
    throw std::invalid_argument("estimate_moments: at least 1000 samples are required");
  }
  return estimate_moments(UniformSampler(body, stream, sampler), stream, samples);
}

Moments estimate_moments(const UniformSampler& sampler, const SampleStream& stream,
                         std::uint64_t samples) {
  if (samples < kMinMomentSamples) {
    throw std::invalid_argument("estimate_moments: at least 1000 samples are required");
  }
  const int n = sampler.dim();
  std::vector<GroupSums> per_chunk(chunk_count(samples), GroupSums(n));
  sampler.for_each_chunk(stream, samples, [&](std::size_t c, const Matrix& pts) {
    GroupSums& g = per_chunk[c];
    const std::size_t base = c * kChunkSize;
    for (Eigen::Index k = 0; k < pts.cols(); ++k) {
      const int group = static_cast<int>((base + static_cast<std::size_t>(k)) % kJackknifeGroups);
      g.count[group] += 1.0;
      g.sum[group] += pts.col(k);
      g.outer[group].selfadjointView<Eigen::Lower>().rankUpdate(pts.col(k));
    }
  });
  GroupSums groups(n);
  for (const auto& g : per_chunk) {
    for (int j = 0; j < kJackknifeGroups; ++j) {
      groups.count[j] += g.count[j];
      groups.sum[j] += g.sum[j];
      groups.outer[j] += g.outer[j];
    }
  }
  for (auto& o : groups.outer) o = o.selfadjointView<Eigen::Lower>();
  double count = 0.0;
  Point sum = Point::Zero(n);
  Matrix outer = Matrix::Zero(n, n);
  for (int j = 0; j < kJackknifeGroups; ++j) {
    count += groups.count[j];
    sum += groups.sum[j];
    outer += groups.outer[j];
  }
  Moments m;
  m.samples = samples;
  covariance_from(count, sum, outer, m.barycenter, m.covariance);

  std::vector<Point> means(kJackknifeGroups);
  std::vector<Matrix> covs(kJackknifeGroups);
  Point mean_bar = Point::Zero(n);
  Matrix cov_bar = Matrix::Zero(n, n);
  for (int j = 0; j < kJackknifeGroups; ++j) {
    covariance_from(count - groups.count[j], sum - groups.sum[j], outer - groups.outer[j], means[j],
                    covs[j]);
    mean_bar += means[j] / kJackknifeGroups;
    cov_bar += covs[j] / kJackknifeGroups;
  }
  m.barycenter_se = Point::Zero(n);
  m.covariance_se = Matrix::Zero(n, n);
  for (int j = 0; j < kJackknifeGroups; ++j) {
    m.barycenter_se += (means[j] - mean_bar).cwiseAbs2();
    m.covariance_se += (covs[j] - cov_bar).cwiseAbs2();
  }
  const double factor = (kJackknifeGroups - 1.0) / kJackknifeGroups;
  m.barycenter_se = (factor * m.barycenter_se).cwiseSqrt();
  m.covariance_se = (factor * m.covariance_se).cwiseSqrt();
  return m;
}

IsotropicReport isotropic_position(const ConvexBody& body, const SampleStream& stream,
                                   const IsotropicOptions& options) {
  const int n = body.dim();
  IsotropicReport report{Matrix(), Point(), body, 0.0, {}, {}, 0.0, 0.0, false};
  report.input_moments =
      estimate_moments(body, stream.split(1), options.samples, options.sampler);
  Point center = report.input_moments.barycenter;
  if (options.exact_symmetric_center) {
    if (const auto c = symmetry_center(body)) center = *c;
  }
  report.input_volume =
      volume(body, VolumeOptions{derived_seed(stream, 3), options.volume_samples, false});
  if (!(report.input_volume.value > 0.0)) {
    throw std::domain_error("isotropic_position: body has zero volume");
  }

  Eigen::SelfAdjointEigenSolver<Matrix> eig(report.input_moments.covariance);
  const Eigen::VectorXd lambda = eig.eigenvalues();
  if (!(lambda.minCoeff() > 0.0)) {
    throw std::domain_error("isotropic_position: covariance estimate is not positive definite");
  }
  const Matrix whiten =
      eig.eigenvectors() * lambda.cwiseSqrt().cwiseInverse().asDiagonal() * eig.eigenvectors().transpose();
  // c·W·K has covariance c²·I and volume cⁿ·det(W)·|K| = 1.
  const double log_det_cov = lambda.array().log().sum();
  const double c = std::exp(log_det_cov / (2.0 * n) - std::log(report.input_volume.value) / n);
  report.matrix = c * whiten;
  report.shift = -report.matrix * center;
  report.L_K = c;
  report.body_iso = affine_image(body, report.matrix, report.shift);

  const Moments check = estimate_moments(report.body_iso, stream.split(2), options.samples,
                                         options.sampler);
  report.barycenter_residual = check.barycenter.norm();
  report.covariance_residual =
      (check.covariance - c * c * Matrix::Identity(n, n)).cwiseAbs().maxCoeff();
  report.residuals_ok = report.covariance_residual <= options.covariance_tolerance * c * c &&
                        report.barycenter_residual <= options.barycenter_tolerance * c;
  return report;
}

ConvexBody small_diameter_truncation(const IsotropicReport& report) {
  const int n = report.body_iso.dim();
  const double radius = std::sqrt(2.0 * n) * report.L_K;
  return ConvexBody::intersection({report.body_iso, ConvexBody::ball(Point::Zero(n), radius)});
}

SmallDiameterReport reduce_to_small_diameter(const ConvexBody& body, const SampleStream& stream,
                                             const IsotropicOptions& options) {
  const int n = body.dim();
  IsotropicReport first = isotropic_position(body, stream.split(10), options);
  ConvexBody truncated = small_diameter_truncation(first);
  const VolumeEstimate truncated_volume = mc_volume(
      truncated, derived_seed(stream, 11), options.volume_samples);
  IsotropicReport second = isotropic_position(truncated, stream.split(12), options);
  SmallDiameterReport out{std::move(first), truncated, truncated_volume, std::move(second),
                          body, 0.0, 0.0, 0.0, 0.0};
  out.q = out.second.body_iso;
  out.L_Q = out.second.L_K;
  out.radius_bound = circumradius_bound(out.q);
  out.k = out.radius_bound / (std::sqrt(static_cast<double>(n)) * out.L_Q);
  out.l_ratio = out.first.L_K / out.L_Q;
  return out;
}

}  // namespace hadwiger
