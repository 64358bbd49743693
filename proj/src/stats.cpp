#include "hadwiger/stats.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

namespace hadwiger {

Interval wilson_interval(std::uint64_t successes, std::uint64_t trials, double z) {
  if (trials == 0) return {0.0, 1.0};
  const double n = static_cast<double>(trials);
  const double p = static_cast<double>(successes) / n;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / n;
  const double center = (p + z2 / (2.0 * n)) / denom;
  const double half = z * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / denom;
  // exact endpoints at the extremes, where rounding would leave 1e-18 residue
  return {successes == 0 ? 0.0 : std::max(0.0, center - half),
          successes == trials ? 1.0 : std::min(1.0, center + half)};
}

double binomial_stderr(std::uint64_t successes, std::uint64_t trials) {
  if (trials == 0) return 0.0;
  const double p = static_cast<double>(successes) / static_cast<double>(trials);
  return std::sqrt(p * (1.0 - p) / static_cast<double>(trials));
}

double block_bootstrap_stderr(std::span<const double> numerators,
                              std::span<const double> denominators, int replicates,
                              SampleStream stream) {
  if (numerators.size() != denominators.size()) {
    throw std::invalid_argument("bootstrap: block arrays differ in length");
  }
  const std::size_t blocks = numerators.size();
  if (blocks < 2 || replicates < 2) return 0.0;
  std::vector<double> estimates;
  estimates.reserve(replicates);
  for (int r = 0; r < replicates; ++r) {
    double num = 0.0;
    double den = 0.0;
    for (std::size_t k = 0; k < blocks; ++k) {
      const auto pick = static_cast<std::size_t>(stream.below(blocks));
      num += numerators[pick];
      den += denominators[pick];
    }
    estimates.push_back(den > 0.0 ? num / den : 0.0);
  }
  double mean = 0.0;
  for (double e : estimates) mean += e;
  mean /= replicates;
  double var = 0.0;
  for (double e : estimates) var += (e - mean) * (e - mean);
  return std::sqrt(var / (replicates - 1));
}

}  // namespace hadwiger
