#include "hadwiger/body.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "hadwiger/lp.hpp"
#include "hadwiger/rng.hpp"

namespace hadwiger {

struct BodyAccess {
  static ConvexBody make(int dim, ConvexBody::Rep rep, bool symmetric, bool degenerate) {
    return ConvexBody(dim, std::move(rep), symmetric, degenerate);
  }
};

namespace {

constexpr double kSymmetryTol = 1e-9;

void require_dim(const ConvexBody& body, const Point& x, const char* what) {
  if (x.size() != body.dim()) {
    throw std::invalid_argument(std::string(what) + ": dimension mismatch (body " +
                                std::to_string(body.dim()) + ", point " +
                                std::to_string(x.size()) + ")");
  }
}

// Closed under negation after normalizing each row by its offset.
bool rows_symmetric(const Matrix& normals, const Eigen::VectorXd& offsets) {
  const Eigen::Index m = normals.rows();
  if ((offsets.array() <= 0.0).any()) return false;
  Matrix scaled = normals;
  for (Eigen::Index i = 0; i < m; ++i) scaled.row(i) /= offsets(i);
  for (Eigen::Index i = 0; i < m; ++i) {
    bool found = false;
    for (Eigen::Index j = 0; j < m && !found; ++j) {
      found = (scaled.row(i) + scaled.row(j)).cwiseAbs().maxCoeff() <= kSymmetryTol;
    }
    if (!found) return false;
  }
  return true;
}

bool columns_symmetric(const Matrix& vertices) {
  const Eigen::Index m = vertices.cols();
  for (Eigen::Index i = 0; i < m; ++i) {
    bool found = false;
    for (Eigen::Index j = 0; j < m && !found; ++j) {
      found = (vertices.col(i) + vertices.col(j)).cwiseAbs().maxCoeff() <= kSymmetryTol;
    }
    if (!found) return false;
  }
  return true;
}

// min b'y s.t. A'y = theta, y >= 0; the LP dual of max <theta, x> over Ax <= b.
std::optional<double> h_support(const HPolytope& poly, const Point& theta) {
  const lp::Result r = lp::minimize_standard(poly.normals.transpose(), theta, poly.offsets);
  if (r.status != lp::Status::Optimal) return std::nullopt;
  return r.objective;
}

double support_raw(const ConvexBody& body, const Point& theta);

ConvexBody make_hpolytope_unchecked(Matrix normals, Eigen::VectorXd offsets, bool degenerate) {
  const int dim = static_cast<int>(normals.cols());
  const bool sym = !degenerate && rows_symmetric(normals, offsets);
  return BodyAccess::make(dim, HPolytope{std::move(normals), std::move(offsets)}, sym,
                          degenerate);
}

double support_raw(const ConvexBody& body, const Point& theta) {
  return std::visit(
      [&](const auto& rep) -> double {
        using T = std::decay_t<decltype(rep)>;
        if constexpr (std::is_same_v<T, HPolytope>) {
          const auto v = h_support(rep, theta);
          if (!v) throw std::domain_error("support_value: polytope is unbounded");
          return *v;
        } else if constexpr (std::is_same_v<T, VPolytope>) {
          return (rep.vertices.transpose() * theta).maxCoeff();
        } else if constexpr (std::is_same_v<T, Ball>) {
          return rep.center.dot(theta) + rep.radius * theta.norm();
        } else if constexpr (std::is_same_v<T, AffineImage>) {
          return rep.shift.dot(theta) + support_raw(*rep.base, rep.matrix.transpose() * theta);
        } else {
          const auto h = as_halfspaces(body);
          if (!h) {
            throw std::domain_error(
                "support_value: not available for intersections with non-polytope parts");
          }
          const auto v = h_support(*h, theta);
          if (!v) throw std::domain_error("support_value: polytope is unbounded or empty");
          return *v;
        }
      },
      body.rep());
}

bool origin_is_interior(const ConvexBody& body) {
  const int n = body.dim();
  if (!contains(body, Point::Zero(n), 0.0)) return false;
  const Box box = bounding_box(body);
  const double eps = 1e-7 * std::max(1e-12, (box.hi - box.lo).maxCoeff());
  for (int i = 0; i < n; ++i) {
    for (double sign : {1.0, -1.0}) {
      Point probe = Point::Zero(n);
      probe(i) = sign * eps;
      if (!contains(body, probe, 0.0)) return false;
    }
  }
  return true;
}

Matrix checked_inverse(const Matrix& matrix, const char* what) {
  if (matrix.rows() != matrix.cols()) {
    throw std::invalid_argument(std::string(what) + ": matrix must be square");
  }
  Eigen::JacobiSVD<Matrix> svd(matrix);
  const auto& s = svd.singularValues();
  const double smax = s(0);
  const double smin = s(s.size() - 1);
  if (!(smin > 0.0) || smax / smin > 1e12) {
    throw std::domain_error(std::string(what) + ": matrix is singular (condition number above 1e12)");
  }
  return matrix.inverse();
}

}  // namespace

ConvexBody::ConvexBody(int dim, Rep rep, bool symmetric, bool degenerate)
    : dim_(dim),
      rep_(std::make_shared<const Rep>(std::move(rep))),
      symmetric_(symmetric),
      degenerate_(degenerate) {}

ConvexBody ConvexBody::hpolytope(Matrix normals, Eigen::VectorXd offsets) {
  if (normals.cols() < 1) throw std::invalid_argument("hpolytope: dimension must be positive");
  if (normals.rows() != offsets.size()) {
    throw std::invalid_argument("hpolytope: normals and offsets differ in length");
  }
  if (!normals.allFinite() || !offsets.allFinite()) {
    throw std::invalid_argument("hpolytope: non-finite coefficients");
  }
  for (Eigen::Index i = 0; i < normals.rows(); ++i) {
    if (normals.row(i).norm() == 0.0) throw std::invalid_argument("hpolytope: zero normal");
  }
  HPolytope poly{normals, offsets};
  const ChebyshevBall cheb = chebyshev_ball(poly);
  if (!std::isfinite(cheb.radius)) throw std::invalid_argument("hpolytope: unbounded");
  if (cheb.radius <= 1e-12) throw std::invalid_argument("hpolytope: empty interior");
  const int n = static_cast<int>(normals.cols());
  for (int i = 0; i < n; ++i) {
    for (double sign : {1.0, -1.0}) {
      Point e = Point::Zero(n);
      e(i) = sign;
      if (!h_support(poly, e)) throw std::invalid_argument("hpolytope: unbounded");
    }
  }
  return make_hpolytope_unchecked(std::move(normals), std::move(offsets), false);
}

ConvexBody ConvexBody::vpolytope(Matrix vertices) {
  if (vertices.rows() < 1) throw std::invalid_argument("vpolytope: dimension must be positive");
  if (vertices.cols() < 1) throw std::invalid_argument("vpolytope: empty vertex list");
  if (!vertices.allFinite()) throw std::invalid_argument("vpolytope: non-finite vertex");
  const int dim = static_cast<int>(vertices.rows());
  const bool sym = columns_symmetric(vertices);
  return ConvexBody(dim, VPolytope{std::move(vertices)}, sym, false);
}

ConvexBody ConvexBody::ball(Point center, double radius) {
  if (center.size() < 1) throw std::invalid_argument("ball: dimension must be positive");
  if (!(radius > 0.0) || !std::isfinite(radius)) {
    throw std::invalid_argument("ball: radius must be positive");
  }
  const int dim = static_cast<int>(center.size());
  const bool sym = center.cwiseAbs().maxCoeff() == 0.0;
  return ConvexBody(dim, Ball{std::move(center), radius}, sym, false);
}

ConvexBody ConvexBody::intersection(const std::vector<ConvexBody>& parts) {
  if (parts.empty()) throw std::invalid_argument("intersection: no parts");
  const int dim = parts.front().dim();
  Intersection inter;
  bool sym = true;
  bool degenerate = false;
  for (const auto& p : parts) {
    if (p.dim() != dim) throw std::invalid_argument("intersection: dimension mismatch");
    sym = sym && p.symmetric();
    degenerate = degenerate || p.degenerate();
    if (const auto* nested = p.as<Intersection>()) {
      inter.parts.insert(inter.parts.end(), nested->parts.begin(), nested->parts.end());
    } else {
      inter.parts.push_back(std::make_shared<const ConvexBody>(p));
    }
  }
  return ConvexBody(dim, std::move(inter), sym, degenerate);
}

bool ConvexBody::is_polytope() const {
  return std::visit(
      [](const auto& rep) -> bool {
        using T = std::decay_t<decltype(rep)>;
        if constexpr (std::is_same_v<T, HPolytope> || std::is_same_v<T, VPolytope>) {
          return true;
        } else if constexpr (std::is_same_v<T, Ball>) {
          return false;
        } else if constexpr (std::is_same_v<T, AffineImage>) {
          return rep.base->is_polytope();
        } else {
          return std::all_of(rep.parts.begin(), rep.parts.end(),
                             [](const BodyPtr& p) { return p->is_polytope(); });
        }
      },
      rep());
}

std::string ConvexBody::kind_name() const {
  return std::visit(
      [](const auto& rep) -> std::string {
        using T = std::decay_t<decltype(rep)>;
        if constexpr (std::is_same_v<T, HPolytope>) return "hpolytope";
        else if constexpr (std::is_same_v<T, VPolytope>) return "vpolytope";
        else if constexpr (std::is_same_v<T, Ball>) return "ball";
        else if constexpr (std::is_same_v<T, AffineImage>) return "affine-image";
        else return "intersection";
      },
      rep());
}

std::optional<StandardKind> parse_standard_kind(const std::string& name) {
  if (name == "cube") return StandardKind::Cube;
  if (name == "ball" || name == "euclidean-ball") return StandardKind::Ball;
  if (name == "simplex") return StandardKind::Simplex;
  if (name == "cross" || name == "cross-polytope") return StandardKind::CrossPolytope;
  return std::nullopt;
}

std::string to_string(StandardKind kind) {
  switch (kind) {
    case StandardKind::Cube: return "cube";
    case StandardKind::Ball: return "ball";
    case StandardKind::Simplex: return "simplex";
    case StandardKind::CrossPolytope: return "cross";
  }
  return "unknown";
}

double unit_ball_volume(int dim) {
  const double half = 0.5 * dim;
  return std::exp(half * std::log(std::numbers::pi) - std::lgamma(half + 1.0));
}

double standard_volume(StandardKind kind, int dim, double scale) {
  const double n = dim;
  switch (kind) {
    case StandardKind::Cube: return std::pow(2.0 * scale, n);
    case StandardKind::Ball: return unit_ball_volume(dim) * std::pow(scale, n);
    case StandardKind::CrossPolytope: return std::exp(n * std::log(2.0 * scale) - std::lgamma(n + 1.0));
    case StandardKind::Simplex:
      // circumradius `scale`: (n+1)^{(n+1)/2} / (n! n^{n/2}) R^n
      return std::exp(0.5 * (n + 1.0) * std::log(n + 1.0) - std::lgamma(n + 1.0) -
                      0.5 * n * std::log(n)) *
             std::pow(scale, n);
  }
  throw std::invalid_argument("standard_volume: unknown kind");
}

ConvexBody make_standard_body(StandardKind kind, int dim, bool volume_normalized) {
  if (dim < 1) throw std::invalid_argument("make_standard_body: dim must be at least 1");
  double scale = 1.0;
  if (volume_normalized) scale = std::pow(standard_volume(kind, dim, 1.0), -1.0 / dim);
  const int n = dim;
  switch (kind) {
    case StandardKind::Cube: {
      Matrix a(2 * n, n);
      a << Matrix::Identity(n, n), -Matrix::Identity(n, n);
      return ConvexBody::hpolytope(a, Eigen::VectorXd::Constant(2 * n, scale));
    }
    case StandardKind::Ball:
      return ConvexBody::ball(Point::Zero(n), scale);
    case StandardKind::CrossPolytope: {
      Matrix v(n, 2 * n);
      v << scale * Matrix::Identity(n, n), -scale * Matrix::Identity(n, n);
      return ConvexBody::vpolytope(v);
    }
    case StandardKind::Simplex: {
      // Vertices e_i - 1/(n+1) in R^{n+1}, expressed in the Helmert basis of
      // the sum-zero hyperplane and scaled to circumradius `scale`.
      Matrix helmert = Matrix::Zero(n + 1, n);
      for (int k = 1; k <= n; ++k) {
        const double norm = std::sqrt(static_cast<double>(k) * (k + 1));
        for (int j = 0; j < k; ++j) helmert(j, k - 1) = 1.0 / norm;
        helmert(k, k - 1) = -static_cast<double>(k) / norm;
      }
      Matrix lifted = Matrix::Identity(n + 1, n + 1) -
                      Matrix::Constant(n + 1, n + 1, 1.0 / (n + 1));
      Matrix verts = helmert.transpose() * lifted;  // n × (n+1)
      verts *= scale / std::sqrt(static_cast<double>(n) / (n + 1));
      Matrix a(n + 1, n);
      for (int i = 0; i <= n; ++i) a.row(i) = -verts.col(i).transpose() / scale;
      // Validate through the checked factory, then drop the symmetry flag so
      // the family is treated uniformly (the segment at n = 1 included).
      const ConvexBody checked = ConvexBody::hpolytope(a, Eigen::VectorXd::Constant(n + 1, scale / n));
      return BodyAccess::make(n, checked.rep(), false, false);
    }
  }
  throw std::invalid_argument("make_standard_body: unknown kind");
}

bool contains(const ConvexBody& body, const Point& x, double slack) {
  require_dim(body, x, "contains");
  return std::visit(
      [&](const auto& rep) -> bool {
        using T = std::decay_t<decltype(rep)>;
        if constexpr (std::is_same_v<T, HPolytope>) {
          return ((rep.normals * x - rep.offsets).array() <= slack).all();
        } else if constexpr (std::is_same_v<T, VPolytope>) {
          const Eigen::Index n = rep.vertices.rows();
          const Eigen::Index m = rep.vertices.cols();
          Matrix e(n + 1, m);
          e.topRows(n) = rep.vertices;
          e.row(n).setOnes();
          Eigen::VectorXd f(n + 1);
          f << x, 1.0;
          const double tol = std::max(slack, 1e-12) * (1.0 + x.cwiseAbs().sum());
          return lp::feasibility_residual(e, f) <= tol;
        } else if constexpr (std::is_same_v<T, Ball>) {
          return (x - rep.center).norm() <= rep.radius + slack;
        } else if constexpr (std::is_same_v<T, AffineImage>) {
          return contains(*rep.base, rep.inverse * (x - rep.shift), slack);
        } else {
          return std::all_of(rep.parts.begin(), rep.parts.end(),
                             [&](const BodyPtr& p) { return contains(*p, x, slack); });
        }
      },
      body.rep());
}

double support_value(const ConvexBody& body, const Point& theta) {
  require_dim(body, theta, "support_value");
  const double norm = theta.norm();
  if (!(norm > 0.0)) throw std::invalid_argument("support_value: zero direction");
  return support_raw(body, theta / norm);
}

double gauge_norm(const ConvexBody& body, const Point& x) {
  require_dim(body, x, "gauge_norm");
  if (!origin_is_interior(body)) {
    throw std::domain_error("gauge_norm: origin is not an interior point");
  }
  if (x.cwiseAbs().maxCoeff() == 0.0) return 0.0;
  auto inside = [&](double t) { return contains(body, x / t, 0.0); };
  double hi = 1.0;
  for (int k = 0; !inside(hi); ++k) {
    if (k > 2000) throw std::domain_error("gauge_norm: ray does not re-enter the body");
    hi *= 2.0;
  }
  double lo = hi * 0.5;
  for (int k = 0; inside(lo); ++k) {
    if (k > 2000) return 0.0;
    hi = lo;
    lo *= 0.5;
  }
  for (int k = 0; k < 200 && hi - lo > 1e-15 * hi; ++k) {
    const double mid = 0.5 * (lo + hi);
    (inside(mid) ? hi : lo) = mid;
  }
  return hi;
}

ConvexBody affine_image(const ConvexBody& body, const Matrix& matrix, const Point& shift) {
  if (matrix.rows() != body.dim() || matrix.cols() != body.dim() || shift.size() != body.dim()) {
    throw std::invalid_argument("affine_image: dimension mismatch");
  }
  Matrix inverse = checked_inverse(matrix, "affine_image");
  const bool sym = body.symmetric() && shift.cwiseAbs().maxCoeff() == 0.0;
  if (const auto* img = body.as<AffineImage>()) {
    Matrix composed = matrix * img->matrix;
    Point composed_shift = matrix * img->shift + shift;
    const bool base_sym = img->base->symmetric() && composed_shift.cwiseAbs().maxCoeff() == 0.0;
    return BodyAccess::make(
        body.dim(),
        AffineImage{img->base, composed, composed_shift, img->inverse * inverse}, base_sym,
        body.degenerate());
  }
  return BodyAccess::make(
      body.dim(),
      AffineImage{std::make_shared<const ConvexBody>(body), matrix, shift, std::move(inverse)},
      sym, body.degenerate());
}

ConvexBody reflect_about(const ConvexBody& body, const Point& x) {
  require_dim(body, x, "reflect_about");
  const bool at_origin = x.cwiseAbs().maxCoeff() == 0.0;
  return std::visit(
      [&](const auto& rep) -> ConvexBody {
        using T = std::decay_t<decltype(rep)>;
        if constexpr (std::is_same_v<T, HPolytope>) {
          // <a, y> <= b for y = x - k  <=>  <-a, k> <= b - <a, x>
          Eigen::VectorXd offsets = rep.offsets - rep.normals * x;
          return BodyAccess::make(body.dim(), HPolytope{-rep.normals, std::move(offsets)},
                                  body.symmetric() && at_origin, body.degenerate());
        } else if constexpr (std::is_same_v<T, VPolytope>) {
          Matrix v = (-rep.vertices).colwise() + x;
          return BodyAccess::make(body.dim(), VPolytope{std::move(v)},
                                  body.symmetric() && at_origin, false);
        } else if constexpr (std::is_same_v<T, Ball>) {
          return ConvexBody::ball(x - rep.center, rep.radius);
        } else if constexpr (std::is_same_v<T, AffineImage>) {
          return BodyAccess::make(body.dim(),
                                  AffineImage{rep.base, -rep.matrix, x - rep.shift, -rep.inverse},
                                  body.symmetric() && at_origin, body.degenerate());
        } else {
          std::vector<ConvexBody> parts;
          for (const auto& p : rep.parts) parts.push_back(reflect_about(*p, x));
          return ConvexBody::intersection(parts);
        }
      },
      body.rep());
}

std::optional<HPolytope> as_halfspaces(const ConvexBody& body) {
  return std::visit(
      [&](const auto& rep) -> std::optional<HPolytope> {
        using T = std::decay_t<decltype(rep)>;
        if constexpr (std::is_same_v<T, HPolytope>) {
          return rep;
        } else if constexpr (std::is_same_v<T, AffineImage>) {
          auto base = as_halfspaces(*rep.base);
          if (!base) return std::nullopt;
          // a'(M^{-1}(y - s)) <= b
          Matrix normals = base->normals * rep.inverse;
          Eigen::VectorXd offsets = base->offsets + normals * rep.shift;
          return HPolytope{std::move(normals), std::move(offsets)};
        } else if constexpr (std::is_same_v<T, Intersection>) {
          std::vector<HPolytope> pieces;
          Eigen::Index rows = 0;
          for (const auto& p : rep.parts) {
            auto h = as_halfspaces(*p);
            if (!h) return std::nullopt;
            rows += h->normals.rows();
            pieces.push_back(std::move(*h));
          }
          HPolytope out{Matrix(rows, body.dim()), Eigen::VectorXd(rows)};
          Eigen::Index at = 0;
          for (const auto& h : pieces) {
            out.normals.middleRows(at, h.normals.rows()) = h.normals;
            out.offsets.segment(at, h.offsets.size()) = h.offsets;
            at += h.normals.rows();
          }
          return out;
        } else {
          return std::nullopt;
        }
      },
      body.rep());
}

ChebyshevBall chebyshev_ball(const HPolytope& poly) {
  // Dual of max r s.t. a_i'x + |a_i| r <= b_i:
  //   min b'y s.t. A'y = 0, |a|'y = 1, y >= 0.
  const Eigen::Index m = poly.normals.rows();
  const Eigen::Index n = poly.normals.cols();
  Matrix e(n + 1, m);
  e.topRows(n) = poly.normals.transpose();
  e.row(n) = poly.normals.rowwise().norm().transpose();
  Eigen::VectorXd f = Eigen::VectorXd::Zero(n + 1);
  f(n) = 1.0;
  const lp::Result r = lp::minimize_standard(e, f, poly.offsets);
  ChebyshevBall ball;
  if (r.status == lp::Status::Infeasible) {
    ball.radius = std::numeric_limits<double>::infinity();
    ball.center = Point::Zero(n);
    return ball;
  }
  if (r.status == lp::Status::Unbounded) {
    ball.radius = -std::numeric_limits<double>::infinity();
    ball.center = Point::Zero(n);
    return ball;
  }
  ball.radius = r.objective;
  ball.center = r.dual.head(n);
  return ball;
}

ConvexBody intersect(const ConvexBody& a, const ConvexBody& b) {
  if (a.dim() != b.dim()) throw std::invalid_argument("intersect: dimension mismatch");
  const auto ha = as_halfspaces(a);
  const auto hb = as_halfspaces(b);
  if (!ha || !hb) throw std::invalid_argument("intersect: both operands must be H-polytopes");
  const Eigen::Index ma = ha->normals.rows();
  const Eigen::Index mb = hb->normals.rows();
  Matrix normals(ma + mb, a.dim());
  normals << ha->normals, hb->normals;
  Eigen::VectorXd offsets(ma + mb);
  offsets << ha->offsets, hb->offsets;
  const ChebyshevBall cheb = chebyshev_ball(HPolytope{normals, offsets});
  const bool degenerate = !(cheb.radius > 1e-12);
  return make_hpolytope_unchecked(std::move(normals), std::move(offsets), degenerate);
}

ConvexBody polar_dual(const ConvexBody& body) {
  return std::visit(
      [&](const auto& rep) -> ConvexBody {
        using T = std::decay_t<decltype(rep)>;
        if constexpr (std::is_same_v<T, VPolytope>) {
          if (!origin_is_interior(body)) {
            throw std::domain_error("polar_dual: origin is not an interior point");
          }
          return ConvexBody::hpolytope(rep.vertices.transpose(),
                                       Eigen::VectorXd::Ones(rep.vertices.cols()));
        } else if constexpr (std::is_same_v<T, HPolytope>) {
          if ((rep.offsets.array() <= 0.0).any()) {
            throw std::domain_error("polar_dual: offsets must be positive");
          }
          Matrix v = rep.normals.transpose();
          for (Eigen::Index i = 0; i < v.cols(); ++i) v.col(i) /= rep.offsets(i);
          return ConvexBody::vpolytope(std::move(v));
        } else if constexpr (std::is_same_v<T, Ball>) {
          if (rep.center.cwiseAbs().maxCoeff() != 0.0) {
            throw std::domain_error("polar_dual: ball must be centred at the origin");
          }
          return ConvexBody::ball(rep.center, 1.0 / rep.radius);
        } else if constexpr (std::is_same_v<T, AffineImage>) {
          if (rep.shift.cwiseAbs().maxCoeff() != 0.0) {
            throw std::domain_error("polar_dual: affine images must be linear");
          }
          // (MK)° = M^{-T} K°
          return affine_image(polar_dual(*rep.base), rep.inverse.transpose(),
                              Point::Zero(body.dim()));
        } else {
          throw std::domain_error("polar_dual: unsupported representation " + body.kind_name());
        }
      },
      body.rep());
}

bool has_exact_support(const ConvexBody& body) {
  return std::visit(
      [&](const auto& rep) -> bool {
        using T = std::decay_t<decltype(rep)>;
        if constexpr (std::is_same_v<T, AffineImage>) return has_exact_support(*rep.base);
        else if constexpr (std::is_same_v<T, Intersection>) return as_halfspaces(body).has_value();
        else return true;
      },
      body.rep());
}

Box bounding_box(const ConvexBody& body) {
  const int n = body.dim();
  Box box{Point(n), Point(n), true};
  if (has_exact_support(body)) {
    for (int i = 0; i < n; ++i) {
      Point e = Point::Zero(n);
      e(i) = 1.0;
      box.hi(i) = support_raw(body, e);
      box.lo(i) = -support_raw(body, -e);
    }
    return box;
  }
  box.exact = false;
  if (const auto* img = body.as<AffineImage>()) {
    const Box base = bounding_box(*img->base);
    const Point c = img->matrix * base.center() + img->shift;
    const Point h = img->matrix.cwiseAbs() * (0.5 * (base.hi - base.lo));
    box.lo = c - h;
    box.hi = c + h;
    return box;
  }
  const auto& inter = std::get<Intersection>(body.rep());
  box.lo.setConstant(-std::numeric_limits<double>::infinity());
  box.hi.setConstant(std::numeric_limits<double>::infinity());
  for (const auto& p : inter.parts) {
    const Box b = bounding_box(*p);
    box.lo = box.lo.cwiseMax(b.lo);
    box.hi = box.hi.cwiseMin(b.hi);
  }
  return box;
}

std::optional<Point> symmetry_center(const ConvexBody& body) {
  return std::visit(
      [&](const auto& rep) -> std::optional<Point> {
        using T = std::decay_t<decltype(rep)>;
        if constexpr (std::is_same_v<T, Ball>) {
          return rep.center;
        } else if constexpr (std::is_same_v<T, AffineImage>) {
          const auto c = symmetry_center(*rep.base);
          if (!c) return std::nullopt;
          return Point(rep.matrix * *c + rep.shift);
        } else if constexpr (std::is_same_v<T, Intersection>) {
          std::optional<Point> common;
          for (const auto& p : rep.parts) {
            const auto c = symmetry_center(*p);
            if (!c) return std::nullopt;
            if (!common) {
              common = c;
            } else if ((*common - *c).cwiseAbs().maxCoeff() > 1e-12 * (1.0 + c->norm())) {
              return std::nullopt;
            }
          }
          return common;
        } else {
          if (body.symmetric()) return Point(Point::Zero(body.dim()));
          return std::nullopt;
        }
      },
      body.rep());
}

bool check_symmetry_by_probes(const ConvexBody& body, int probes, double tol) {
  SampleStream stream(0x5eedULL);
  const int n = body.dim();
  for (int k = 0; k < probes; ++k) {
    Point x(n);
    for (int i = 0; i < n; ++i) x(i) = stream.normal();
    x /= x.norm();
    const double gp = gauge_norm(body, x);
    const double gm = gauge_norm(body, -x);
    if (std::abs(gp - gm) > tol * std::max(1.0, gp)) return false;
  }
  return true;
}

}  // namespace hadwiger
