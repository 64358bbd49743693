#pragma once

#include <cstddef>
#include <cstdint>
#include <span>

#include "hadwiger/rng.hpp"

namespace hadwiger {

struct Interval {
  double low = 0.0;
  double high = 0.0;
};

inline constexpr double kZ95 = 1.959963984540054;

// Wilson score interval for a binomial proportion.
Interval wilson_interval(std::uint64_t successes, std::uint64_t trials, double z = kZ95);

// Binomial standard error sqrt(p(1-p)/n) at p = successes/trials.
double binomial_stderr(std::uint64_t successes, std::uint64_t trials);

// Nonparametric bootstrap standard error of sum(numerators)/sum(denominators)
// resampling whole blocks (typically Monte Carlo chunks).
double block_bootstrap_stderr(std::span<const double> numerators,
                              std::span<const double> denominators, int replicates,
                              SampleStream stream);

}  // namespace hadwiger
