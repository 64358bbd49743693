#pragma once

#include <functional>
#include <utility>
#include <vector>

#include "hadwiger/body.hpp"

namespace hadwiger {

// {y : ||L (y - center)||_2 <= radius}. `inverse` is L^{-1}.
struct Ellipsoid {
  Matrix L;
  Matrix inverse;
  Point center;
  double radius = 1.0;
};

// A body flattened into raw halfspace rows plus ellipsoids, with all affine
// maps folded in. This is the representation Monte Carlo loops run against.
class ConstraintSet {
 public:
  ConstraintSet() = default;
  explicit ConstraintSet(int dim);
  ConstraintSet(Matrix normals, Eigen::VectorXd offsets);

  int dim() const { return dim_; }
  const Matrix& normals() const { return normals_; }
  const Eigen::VectorXd& offsets() const { return offsets_; }
  const std::vector<Ellipsoid>& ellipsoids() const { return ellipsoids_; }
  bool has_ellipsoids() const { return !ellipsoids_.empty(); }

  void add_halfspaces(const Matrix& normals, const Eigen::VectorXd& offsets);
  void add_ellipsoid(Ellipsoid e);
  void append(const ConstraintSet& other);

  bool contains(const double* x, double slack = kMembershipSlack) const;
  bool contains(const Point& x, double slack = kMembershipSlack) const {
    return contains(x.data(), slack);
  }

  // Parameter interval {t : x + t d ∈ K} for x inside K. Empty (lo > hi)
  // when the line misses K.
  std::pair<double, double> chord(const Point& x, const Point& d) const;

  // Minkowski functional about the origin; requires 0 in the interior.
  double gauge(const Point& x) const;

  // Radius of a Euclidean ball about z contained in K. Exact for halfspaces
  // and round balls, a lower bound for general ellipsoids. Negative when z is
  // outside.
  double inradius_about(const Point& z) const;

  // Largest halfspace/ellipsoid violation at x (<= 0 means inside).
  double max_violation(const Point& x) const;

  ConstraintSet scaled(double s) const;
  ConstraintSet translated(const Point& v) const;

  // Enclosing box: exact support LPs for the halfspace part intersected with
  // the ellipsoid boxes. Throws when the set is unbounded.
  Box bounding_box() const;

 private:
  int dim_ = 0;
  Matrix normals_;
  Eigen::VectorXd offsets_;
  std::vector<Ellipsoid> ellipsoids_;
};

// Converts vertex lists to halfspaces on demand.
using VertexConverter = std::function<HPolytope(const VPolytope&)>;

ConstraintSet flatten(const ConvexBody& body, const VertexConverter& convert);

}  // namespace hadwiger
