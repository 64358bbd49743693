#pragma once

// Independent reference computations for the tests. Nothing here calls into
// the library except for the Point/Matrix types and the random stream.

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "hadwiger/rng.hpp"

namespace oracle {

using Vec2 = Eigen::Vector2d;
using Polygon = std::vector<Vec2>;  // counter-clockwise

double polygon_area(const Polygon& p);

// Sutherland-Hodgman clipping of `subject` by the convex polygon `clip`.
Polygon clip_polygon(const Polygon& subject, const Polygon& clip);

// x - P for every vertex, re-oriented counter-clockwise.
Polygon reflect(const Polygon& p, const Vec2& x);

struct GridMax {
  Vec2 argmax;
  double ratio = 0.0;  // max |K ∩ (x - K)| / |K|
};

// Brute force over a square grid covering 2K, then a dense refinement
// around the best node.
GridMax kb_grid_search(const Polygon& k, int coarse, int fine);

// ψ_α norm of U[-1/2, 1/2] by composite Simpson quadrature and bisection.
double segment_psi(double alpha);

// Density at x of the mean of k independent U[-1/2, 1/2] (Irwin-Hall).
double uniform_mean_density(int k, double x);

// Random bounded H-polytope with the origin inside: `facets` random unit
// normals with offsets in [0.3, 1], plus a guard box [-3, 3]^n.
struct HRep {
  Eigen::MatrixXd A;
  Eigen::VectorXd b;
};
HRep random_hpolytope(int n, int facets, hadwiger::SampleStream& stream);

// Whether x ∈ c + λ·int(K) for K = {A y <= b}, straight from the rows.
bool in_open_homothet(const HRep& k, double lambda, const Eigen::VectorXd& c,
                      const Eigen::VectorXd& x, double slack = 1e-9);

// The 2^n corner centers σ·t·h of [-h, h]^n. The open homothets c + λ·int
// cover the cube iff (1 - λ) < t < λ; t defaults to 1/2.
std::vector<Eigen::VectorXd> cube_corner_centers(int n, double h, double t = 0.5);

// Regular simplex vertices in the plane with unit area, barycenter 0.
Polygon unit_triangle();

}  // namespace oracle
