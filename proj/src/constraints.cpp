#include "hadwiger/constraints.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "hadwiger/lp.hpp"

namespace hadwiger {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void fold_into(const ConvexBody& body, const Matrix& inv, const Point& shift,
               const VertexConverter& convert, ConstraintSet& out);

// Adds {y : a' inv (y - shift) <= b}.
void add_mapped_rows(const HPolytope& h, const Matrix& inv, const Point& shift,
                     ConstraintSet& out) {
  Matrix normals = h.normals * inv;
  Eigen::VectorXd offsets = h.offsets + normals * shift;
  out.add_halfspaces(normals, offsets);
}

void fold_into(const ConvexBody& body, const Matrix& inv, const Point& shift,
               const VertexConverter& convert, ConstraintSet& out) {
  // The current body is inv^{-1} x + shift for x in `body`.
  std::visit(
      [&](const auto& rep) {
        using T = std::decay_t<decltype(rep)>;
        if constexpr (std::is_same_v<T, HPolytope>) {
          add_mapped_rows(rep, inv, shift, out);
        } else if constexpr (std::is_same_v<T, VPolytope>) {
          add_mapped_rows(convert(rep), inv, shift, out);
        } else if constexpr (std::is_same_v<T, Ball>) {
          const Matrix forward = inv.inverse();
          out.add_ellipsoid(Ellipsoid{inv, forward, forward * rep.center + shift, rep.radius});
        } else if constexpr (std::is_same_v<T, AffineImage>) {
          // outer(M x + s) = inv^{-1}(M x + s) + shift
          const Matrix forward = inv.inverse();
          fold_into(*rep.base, rep.inverse * inv, forward * rep.shift + shift, convert, out);
        } else {
          for (const auto& p : rep.parts) fold_into(*p, inv, shift, convert, out);
        }
      },
      body.rep());
}

}  // namespace

ConstraintSet::ConstraintSet(int dim)
    : dim_(dim), normals_(0, dim), offsets_(0) {}

ConstraintSet::ConstraintSet(Matrix normals, Eigen::VectorXd offsets)
    : dim_(static_cast<int>(normals.cols())),
      normals_(std::move(normals)),
      offsets_(std::move(offsets)) {}

void ConstraintSet::add_halfspaces(const Matrix& normals, const Eigen::VectorXd& offsets) {
  if (normals.cols() != dim_) throw std::invalid_argument("add_halfspaces: dimension mismatch");
  const Eigen::Index m = normals_.rows();
  normals_.conservativeResize(m + normals.rows(), dim_);
  offsets_.conservativeResize(m + offsets.size());
  normals_.bottomRows(normals.rows()) = normals;
  offsets_.tail(offsets.size()) = offsets;
}

void ConstraintSet::add_ellipsoid(Ellipsoid e) {
  if (e.center.size() != dim_) throw std::invalid_argument("add_ellipsoid: dimension mismatch");
  ellipsoids_.push_back(std::move(e));
}

void ConstraintSet::append(const ConstraintSet& other) {
  add_halfspaces(other.normals_, other.offsets_);
  for (const auto& e : other.ellipsoids_) ellipsoids_.push_back(e);
}

bool ConstraintSet::contains(const double* x, double slack) const {
  const Eigen::Index m = normals_.rows();
  for (Eigen::Index i = 0; i < m; ++i) {
    double s = 0.0;
    for (int j = 0; j < dim_; ++j) s += normals_(i, j) * x[j];
    if (s > offsets_(i) + slack) return false;
  }
  for (const auto& e : ellipsoids_) {
    double total = 0.0;
    for (int r = 0; r < dim_; ++r) {
      double s = 0.0;
      for (int j = 0; j < dim_; ++j) s += e.L(r, j) * (x[j] - e.center(j));
      total += s * s;
    }
    const double lim = e.radius + slack;
    if (total > lim * lim) return false;
  }
  return true;
}

std::pair<double, double> ConstraintSet::chord(const Point& x, const Point& d) const {
  double lo = -kInf;
  double hi = kInf;
  const Eigen::VectorXd ad = normals_ * d;
  const Eigen::VectorXd slack = offsets_ - normals_ * x;
  for (Eigen::Index i = 0; i < ad.size(); ++i) {
    if (ad(i) > 0.0) {
      hi = std::min(hi, slack(i) / ad(i));
    } else if (ad(i) < 0.0) {
      lo = std::max(lo, slack(i) / ad(i));
    } else if (slack(i) < 0.0) {
      return {1.0, -1.0};
    }
  }
  for (const auto& e : ellipsoids_) {
    const Point u = e.L * (x - e.center);
    const Point w = e.L * d;
    const double a = w.squaredNorm();
    const double b = u.dot(w);
    const double c = u.squaredNorm() - e.radius * e.radius;
    const double disc = b * b - a * c;
    if (disc < 0.0) return {1.0, -1.0};
    const double root = std::sqrt(disc);
    lo = std::max(lo, (-b - root) / a);
    hi = std::min(hi, (-b + root) / a);
  }
  return {lo, hi};
}

double ConstraintSet::gauge(const Point& x) const {
  double g = 0.0;
  const Eigen::VectorXd ax = normals_ * x;
  for (Eigen::Index i = 0; i < ax.size(); ++i) {
    if (!(offsets_(i) > 0.0)) throw std::domain_error("gauge: origin is not an interior point");
    g = std::max(g, ax(i) / offsets_(i));
  }
  for (const auto& e : ellipsoids_) {
    // smallest t with ||L x - t L c|| <= t r
    const Point u = e.L * x;
    const Point w = e.L * e.center;
    const double a = w.squaredNorm() - e.radius * e.radius;
    if (!(a < 0.0)) throw std::domain_error("gauge: origin is not an interior point");
    const double uw = u.dot(w);
    const double t = (uw - std::sqrt(uw * uw - a * u.squaredNorm())) / a;
    g = std::max(g, t);
  }
  return g;
}

double ConstraintSet::inradius_about(const Point& z) const {
  double r = kInf;
  for (Eigen::Index i = 0; i < normals_.rows(); ++i) {
    r = std::min(r, (offsets_(i) - normals_.row(i).dot(z)) / normals_.row(i).norm());
  }
  for (const auto& e : ellipsoids_) {
    Eigen::JacobiSVD<Matrix> svd(e.L);
    const double smax = svd.singularValues()(0);
    r = std::min(r, (e.radius - (e.L * (z - e.center)).norm()) / smax);
  }
  return r;
}

double ConstraintSet::max_violation(const Point& x) const {
  double v = -kInf;
  if (normals_.rows() > 0) v = (normals_ * x - offsets_).maxCoeff();
  for (const auto& e : ellipsoids_) {
    v = std::max(v, (e.L * (x - e.center)).norm() - e.radius);
  }
  return v;
}

ConstraintSet ConstraintSet::scaled(double s) const {
  if (!(s > 0.0)) throw std::invalid_argument("scaled: factor must be positive");
  ConstraintSet out(normals_, offsets_ * s);
  for (auto e : ellipsoids_) {
    e.center *= s;
    e.radius *= s;
    out.ellipsoids_.push_back(std::move(e));
  }
  return out;
}

ConstraintSet ConstraintSet::translated(const Point& v) const {
  ConstraintSet out(normals_, offsets_ + normals_ * v);
  for (auto e : ellipsoids_) {
    e.center += v;
    out.ellipsoids_.push_back(std::move(e));
  }
  return out;
}

Box ConstraintSet::bounding_box() const {
  Box box{Point::Constant(dim_, -kInf), Point::Constant(dim_, kInf), ellipsoids_.empty()};
  for (const auto& e : ellipsoids_) {
    for (int i = 0; i < dim_; ++i) {
      const double h = e.radius * e.inverse.row(i).norm();
      box.lo(i) = std::max(box.lo(i), e.center(i) - h);
      box.hi(i) = std::min(box.hi(i), e.center(i) + h);
    }
  }
  if (normals_.rows() > 0) {
    const Matrix et = normals_.transpose();
    for (int i = 0; i < dim_; ++i) {
      for (double sign : {1.0, -1.0}) {
        Eigen::VectorXd theta = Eigen::VectorXd::Zero(dim_);
        theta(i) = sign;
        const lp::Result r = lp::minimize_standard(et, theta, offsets_);
        if (r.status != lp::Status::Optimal) continue;
        if (sign > 0) box.hi(i) = std::min(box.hi(i), r.objective);
        else box.lo(i) = std::max(box.lo(i), -r.objective);
      }
    }
  }
  if (!box.lo.allFinite() || !box.hi.allFinite()) {
    throw std::domain_error("bounding_box: constraint set is unbounded");
  }
  return box;
}

ConstraintSet flatten(const ConvexBody& body, const VertexConverter& convert) {
  ConstraintSet out(body.dim());
  fold_into(body, Matrix::Identity(body.dim(), body.dim()), Point::Zero(body.dim()), convert, out);
  return out;
}

}  // namespace hadwiger
