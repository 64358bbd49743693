#pragma once

#include <cmath>
#include <vector>

#include "hadwiger/body.hpp"
#include "hadwiger/rng.hpp"

namespace probes {

// Gaussian points scaled by `scale`, one per column.
inline hadwiger::Matrix gaussian(int n, int count, std::uint64_t seed, double scale = 1.0) {
  hadwiger::SampleStream s(seed, 0x9e0b);
  hadwiger::Matrix out(n, count);
  for (int j = 0; j < count; ++j) {
    for (int i = 0; i < n; ++i) out(i, j) = scale * s.normal();
  }
  return out;
}

inline hadwiger::Matrix random_matrix(int n, std::uint64_t seed) {
  hadwiger::SampleStream s(seed, 0x7a11);
  hadwiger::Matrix t(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) t(i, j) = s.normal();
  }
  // keep it comfortably invertible
  t += 2.0 * hadwiger::Matrix::Identity(n, n);
  return t;
}

// Count of probes on which the two bodies disagree, skipping points within
// `band` of either boundary where rounding could flip the answer.
inline int membership_disagreements(const hadwiger::ConvexBody& a, const hadwiger::ConvexBody& b,
                                    const hadwiger::Matrix& pts, double band = 1e-7) {
  int bad = 0;
  for (Eigen::Index j = 0; j < pts.cols(); ++j) {
    const hadwiger::Point x = pts.col(j);
    const bool in_a = hadwiger::contains(a, x);
    const bool in_b = hadwiger::contains(b, x);
    if (in_a == in_b) continue;
    if (hadwiger::contains(a, x, band) != hadwiger::contains(a, x, -band)) continue;
    if (hadwiger::contains(b, x, band) != hadwiger::contains(b, x, -band)) continue;
    ++bad;
  }
  return bad;
}

}  // namespace probes
