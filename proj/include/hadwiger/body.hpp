#pragma once

#include <Eigen/Dense>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace hadwiger {

using Point = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// Absolute slack on halfspace constraints in membership tests.
inline constexpr double kMembershipSlack = 1e-9;

class ConvexBody;
using BodyPtr = std::shared_ptr<const ConvexBody>;

// Rows <normals.row(i), x> <= offsets(i).
struct HPolytope {
  Matrix normals;
  Eigen::VectorXd offsets;
};

// Vertices are the columns.
struct VPolytope {
  Matrix vertices;
};

struct Ball {
  Point center;
  double radius = 1.0;
};

// matrix * base + shift. `inverse` is cached at construction.
struct AffineImage {
  BodyPtr base;
  Matrix matrix;
  Point shift;
  Matrix inverse;
};

// Conjunction of membership constraints; used for truncations such as
// K ∩ r·B₂ⁿ that have no exact polytope form.
struct Intersection {
  std::vector<BodyPtr> parts;
};

struct Box {
  Point lo;
  Point hi;
  bool exact = true;  // false when only an enclosure is known

  double volume() const { return (hi - lo).prod(); }
  Point center() const { return 0.5 * (lo + hi); }
};

// Immutable tagged representation of a convex body. Copies share structure.
class ConvexBody {
 public:
  using Rep = std::variant<HPolytope, VPolytope, Ball, AffineImage, Intersection>;

  // Checks boundedness and a nonempty interior with a small LP probe.
  static ConvexBody hpolytope(Matrix normals, Eigen::VectorXd offsets);
  static ConvexBody vpolytope(Matrix vertices);
  static ConvexBody ball(Point center, double radius);
  static ConvexBody intersection(const std::vector<ConvexBody>& parts);

  int dim() const { return dim_; }
  // K = -K.
  bool symmetric() const { return symmetric_; }
  // Set on intersections whose interior is empty; their volume is zero.
  bool degenerate() const { return degenerate_; }
  const Rep& rep() const { return *rep_; }

  template <class T>
  const T* as() const {
    return std::get_if<T>(rep_.get());
  }

  // True for H/V polytopes and affine images or intersections built only
  // from them.
  bool is_polytope() const;
  std::string kind_name() const;

 private:
  ConvexBody(int dim, Rep rep, bool symmetric, bool degenerate);

  int dim_ = 0;
  std::shared_ptr<const Rep> rep_;
  bool symmetric_ = false;
  bool degenerate_ = false;

  friend struct BodyAccess;
};

enum class StandardKind { Cube, Ball, Simplex, CrossPolytope };

std::optional<StandardKind> parse_standard_kind(const std::string& name);
std::string to_string(StandardKind kind);

// cube = [-s,s]^n, cross-polytope = absconv{±s·e_i}, ball = s·B₂ⁿ with s = 1,
// simplex = regular simplex with circumradius 1 centred at its barycenter.
// With volume_normalized the scale is chosen so the volume is exactly 1.
ConvexBody make_standard_body(StandardKind kind, int dim, bool volume_normalized);

// Closed-form volume of the standard body at scale s as used above.
double standard_volume(StandardKind kind, int dim, double scale);
double unit_ball_volume(int dim);

bool contains(const ConvexBody& body, const Point& x, double slack = kMembershipSlack);

// sup over K of <x, theta/|theta|>.
double support_value(const ConvexBody& body, const Point& theta);

// Minkowski functional inf{t > 0 : x ∈ tK}, by bisection along the ray.
double gauge_norm(const ConvexBody& body, const Point& x);

ConvexBody affine_image(const ConvexBody& body, const Matrix& matrix, const Point& shift);

// The body x - K.
ConvexBody reflect_about(const ConvexBody& body, const Point& x);

// Halfspace concatenation of two H-polytopes (affine images and intersections
// of H-polytopes are accepted and folded). The result is flagged degenerate
// instead of throwing when its interior is empty.
ConvexBody intersect(const ConvexBody& a, const ConvexBody& b);

ConvexBody polar_dual(const ConvexBody& body);

// Exact when support values are available, otherwise an enclosing box.
Box bounding_box(const ConvexBody& body);

// Whether support_value is exact for this representation. Intersections
// involving a ball have no closed-form support.
bool has_exact_support(const ConvexBody& body);

// Chebyshev ball of an H-polytope: largest radius r and center c with
// c + r·B₂ⁿ inside. Radius is negative for empty polytopes and +inf when the
// polytope contains arbitrarily large balls.
struct ChebyshevBall {
  Point center;
  double radius = 0.0;
};
ChebyshevBall chebyshev_ball(const HPolytope& poly);

// Point p with K - p = p - K when it can be read off the representation.
std::optional<Point> symmetry_center(const ConvexBody& body);

// H-form of polytopes that need no vertex-to-facet conversion: H, affine
// images of those, and intersections of those. Empty for anything else.
std::optional<HPolytope> as_halfspaces(const ConvexBody& body);

// Probe check of K = -K: gauge(x) and gauge(-x) agree on `probes`
// deterministic directions.
bool check_symmetry_by_probes(const ConvexBody& body, int probes, double tol = 1e-9);

}  // namespace hadwiger
