#include "hadwiger/measure.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>
#include <vector>

#include "hadwiger/parallel.hpp"

namespace hadwiger {

namespace {

constexpr double kMergeTol = 1e-9;

// Advances `idx` to the next k-subset of {0..m-1} in lexicographic order.
bool next_subset(std::vector<int>& idx, int m) {
  const int k = static_cast<int>(idx.size());
  int i = k - 1;
  while (i >= 0 && idx[i] == m - k + i) --i;
  if (i < 0) return false;
  ++idx[i];
  for (int j = i + 1; j < k; ++j) idx[j] = idx[j - 1] + 1;
  return true;
}

std::vector<int> first_subset(int k) {
  std::vector<int> idx(k);
  for (int i = 0; i < k; ++i) idx[i] = i;
  return idx;
}

void add_unique(std::vector<Point>& pts, const Point& x) {
  for (const auto& p : pts) {
    if ((p - x).norm() <= kMergeTol * (1.0 + x.norm())) return;
  }
  pts.push_back(x);
}

Matrix to_columns(const std::vector<Point>& pts, int dim) {
  Matrix out(dim, static_cast<Eigen::Index>(pts.size()));
  for (std::size_t j = 0; j < pts.size(); ++j) out.col(static_cast<Eigen::Index>(j)) = pts[j];
  return out;
}

Matrix enumerate_vertices(const HPolytope& h) {
  const int n = static_cast<int>(h.normals.cols());
  const int m = static_cast<int>(h.normals.rows());
  std::vector<Point> pts;
  if (m < n) return Matrix(n, 0);
  Matrix a(m, n);
  Eigen::VectorXd b(m);
  for (int i = 0; i < m; ++i) {
    const double norm = h.normals.row(i).norm();
    a.row(i) = h.normals.row(i) / norm;
    b(i) = h.offsets(i) / norm;
  }
  const double tol = 1e-9 * (1.0 + b.cwiseAbs().maxCoeff());
  std::vector<int> idx = first_subset(n);
  Matrix sub(n, n);
  Eigen::VectorXd rhs(n);
  do {
    for (int r = 0; r < n; ++r) {
      sub.row(r) = a.row(idx[r]);
      rhs(r) = b(idx[r]);
    }
    Eigen::FullPivLU<Matrix> lu(sub);
    lu.setThreshold(1e-10);
    if (!lu.isInvertible()) continue;
    const Point x = lu.solve(rhs);
    if ((a * x - b).maxCoeff() <= tol) add_unique(pts, x);
  } while (next_subset(idx, m));
  return to_columns(pts, n);
}

// Unit normal of the hyperplane through the columns `idx` of `pts`, or an
// empty vector when they are affinely dependent.
Point hyperplane_normal(const Matrix& pts, const std::vector<int>& idx) {
  const Eigen::Index n = pts.rows();
  Matrix d(n - 1, n);
  for (Eigen::Index r = 1; r < n; ++r) d.row(r - 1) = (pts.col(idx[r]) - pts.col(idx[0])).transpose();
  Eigen::FullPivLU<Matrix> lu(d);
  lu.setThreshold(1e-10);
  if (lu.rank() != n - 1) return Point();
  Point normal = lu.kernel().col(0);
  return normal / normal.norm();
}

int affine_rank(const Matrix& v, const std::vector<int>& cols) {
  if (cols.size() < 2) return 0;
  Matrix d(v.rows(), static_cast<Eigen::Index>(cols.size()) - 1);
  for (std::size_t j = 1; j < cols.size(); ++j) {
    d.col(static_cast<Eigen::Index>(j) - 1) = v.col(cols[j]) - v.col(cols[0]);
  }
  Eigen::FullPivLU<Matrix> lu(d);
  lu.setThreshold(1e-9);
  return static_cast<int>(lu.rank());
}

// vol_d(P) = sum over facets F of h_F · vol_{d-1}(F) / d, with h_F the
// distance from the vertex centroid to F.
double cone_volume_rec(const Matrix& v, const Matrix& a, const Eigen::VectorXd& b) {
  const int d = static_cast<int>(v.rows());
  const Eigen::Index k = v.cols();
  if (k < d + 1) return 0.0;
  if (d == 1) return v.maxCoeff() - v.minCoeff();
  const Point c = v.rowwise().mean();
  double factorial = 1.0;
  for (int j = 2; j <= d; ++j) factorial *= j;
  const double tol = 1e-9 * (1.0 + v.cwiseAbs().maxCoeff());
  std::set<std::vector<int>> seen;
  double total = 0.0;
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    const double norm = a.row(i).norm();
    if (norm < 1e-14) continue;
    const Point ai = a.row(i).transpose() / norm;
    const double bi = b(i) / norm;
    std::vector<int> tight;
    for (Eigen::Index j = 0; j < k; ++j) {
      if (std::abs(ai.dot(v.col(j)) - bi) <= tol) tight.push_back(static_cast<int>(j));
    }
    if (static_cast<int>(tight.size()) < d || seen.count(tight)) continue;
    if (affine_rank(v, tight) != d - 1) continue;
    seen.insert(tight);
    const double h = bi - ai.dot(c);
    if (h <= tol) continue;
    if (static_cast<int>(tight.size()) == d) {
      Matrix simplex(d, d);
      for (int j = 0; j < d; ++j) simplex.col(j) = v.col(tight[static_cast<std::size_t>(j)]) - c;
      total += std::abs(simplex.determinant()) / factorial;
      continue;
    }
    // Orthonormal basis of the facet's direction space.
    const Matrix normal_col = ai;
    Eigen::HouseholderQR<Matrix> qr(normal_col);
    const Matrix q = qr.householderQ();
    const Matrix u = q.rightCols(d - 1);
    const Point origin = v.col(tight[0]);
    Matrix fv(d - 1, static_cast<Eigen::Index>(tight.size()));
    for (std::size_t j = 0; j < tight.size(); ++j) {
      fv.col(static_cast<Eigen::Index>(j)) = u.transpose() * (v.col(tight[j]) - origin);
    }
    Matrix fa(a.rows(), d - 1);
    Eigen::VectorXd fb(a.rows());
    Eigen::Index rows = 0;
    for (Eigen::Index r = 0; r < a.rows(); ++r) {
      if (r == i) continue;
      const Eigen::RowVectorXd proj = a.row(r) * u;
      const double pn = proj.norm();
      if (pn < 1e-12 * a.row(r).norm()) continue;
      fa.row(rows) = proj / pn;
      fb(rows) = (b(r) - a.row(r).dot(origin)) / pn;
      ++rows;
    }
    total += h * cone_volume_rec(fv, fa.topRows(rows), fb.head(rows)) / d;
  }
  return total;
}

double radius_rec(const ConvexBody& body, const Matrix& a, const Point& s) {
  return std::visit(
      [&](const auto& rep) -> double {
        using T = std::decay_t<decltype(rep)>;
        if constexpr (std::is_same_v<T, Ball>) {
          Eigen::JacobiSVD<Matrix> svd(a);
          return (a * rep.center + s).norm() + rep.radius * svd.singularValues()(0);
        } else if constexpr (std::is_same_v<T, AffineImage>) {
          return radius_rec(*rep.base, a * rep.matrix, a * rep.shift + s);
        } else if constexpr (std::is_same_v<T, Intersection>) {
          if (body.is_polytope()) {
            const Matrix v = polytope_vertices(body);
            return ((a * v).colwise() + s).colwise().norm().maxCoeff();
          }
          double best = std::numeric_limits<double>::infinity();
          for (const auto& p : rep.parts) best = std::min(best, radius_rec(*p, a, s));
          return best;
        } else {
          const Matrix v = polytope_vertices(body);
          return ((a * v).colwise() + s).colwise().norm().maxCoeff();
        }
      },
      body.rep());
}

// Innermost non-affine body and the accumulated map.
const ConvexBody& strip_affine(const ConvexBody& body, Matrix& m, Point& s) {
  m = Matrix::Identity(body.dim(), body.dim());
  s = Point::Zero(body.dim());
  const ConvexBody* cur = &body;
  while (const auto* img = cur->as<AffineImage>()) {
    s = m * img->shift + s;
    m = m * img->matrix;
    cur = img->base.get();
  }
  return *cur;
}

}  // namespace

std::string to_string(VolumeMethod method) {
  return method == VolumeMethod::Exact ? "exact" : "monte-carlo";
}

Matrix polytope_vertices(const ConvexBody& poly) {
  if (!poly.is_polytope()) throw std::invalid_argument("polytope_vertices: body is not a polytope");
  Matrix m;
  Point s;
  const ConvexBody& core = strip_affine(poly, m, s);
  if (const auto* v = core.as<VPolytope>()) {
    std::vector<Point> pts;
    for (Eigen::Index j = 0; j < v->vertices.cols(); ++j) add_unique(pts, m * v->vertices.col(j) + s);
    return to_columns(pts, poly.dim());
  }
  const ConstraintSet set = as_constraints(poly);
  return enumerate_vertices(HPolytope{set.normals(), set.offsets()});
}

HPolytope vertex_hull(const Matrix& points) {
  const int n = static_cast<int>(points.rows());
  const int k = static_cast<int>(points.cols());
  HPolytope out{Matrix(0, n), Eigen::VectorXd(0)};
  if (k < n + 1) return out;
  if (n == 1) {
    out.normals.resize(2, 1);
    out.normals << 1.0, -1.0;
    out.offsets.resize(2);
    out.offsets << points.maxCoeff(), -points.minCoeff();
    return out;
  }
  const Point center = points.rowwise().mean();
  const double tol = 1e-9 * (1.0 + points.cwiseAbs().maxCoeff());
  std::set<std::vector<int>> seen;
  std::vector<Point> normals;
  std::vector<double> offsets;
  std::vector<int> idx = first_subset(n);
  do {
    Point a = hyperplane_normal(points, idx);
    if (a.size() == 0) continue;
    double b = a.dot(points.col(idx[0]));
    const double side = a.dot(center) - b;
    if (std::abs(side) <= tol) continue;
    if (side > 0.0) {
      a = -a;
      b = -b;
    }
    const Eigen::VectorXd vals = points.transpose() * a;
    if (vals.maxCoeff() > b + tol) continue;
    std::vector<int> tight;
    for (int j = 0; j < k; ++j) {
      if (vals(j) >= b - tol) tight.push_back(j);
    }
    if (!seen.insert(tight).second) continue;
    normals.push_back(a);
    offsets.push_back(b);
  } while (next_subset(idx, k));
  out.normals.resize(static_cast<Eigen::Index>(normals.size()), n);
  out.offsets.resize(static_cast<Eigen::Index>(offsets.size()));
  for (std::size_t i = 0; i < normals.size(); ++i) {
    out.normals.row(static_cast<Eigen::Index>(i)) = normals[i].transpose();
    out.offsets(static_cast<Eigen::Index>(i)) = offsets[i];
  }
  return out;
}

double cone_volume(const Matrix& vertices, const HPolytope& rows) {
  return cone_volume_rec(vertices, rows.normals, rows.offsets);
}

VolumeEstimate exact_polytope_volume(const ConvexBody& poly) {
  if (poly.dim() > kMaxExactDim) {
    throw std::invalid_argument("exact_polytope_volume: dimension " + std::to_string(poly.dim()) +
                                " exceeds " + std::to_string(kMaxExactDim));
  }
  if (!poly.is_polytope()) throw std::invalid_argument("exact_polytope_volume: not a polytope");
  VolumeEstimate est;
  if (poly.degenerate()) return est;
  if (const auto* img = poly.as<AffineImage>()) {
    est = exact_polytope_volume(*img->base);
    est.value *= std::abs(img->matrix.determinant());
    return est;
  }
  if (const auto* v = poly.as<VPolytope>()) {
    const HPolytope hull = vertex_hull(v->vertices);
    if (hull.normals.rows() == 0) return est;
    est.value = cone_volume(v->vertices, hull);
    return est;
  }
  const ConstraintSet set = as_constraints(poly);
  const HPolytope h{set.normals(), set.offsets()};
  const Matrix verts = enumerate_vertices(h);
  if (verts.cols() < poly.dim() + 1) return est;
  set.bounding_box();  // throws on unbounded input
  est.value = cone_volume(verts, h);
  return est;
}

VolumeEstimate mc_volume(const ConstraintSet& set, const Box& box, const SampleStream& stream,
                         std::uint64_t samples) {
  if (samples == 0) throw std::invalid_argument("mc_volume: zero samples");
  const int n = set.dim();
  const std::size_t chunks = chunk_count(samples);
  std::vector<std::uint64_t> hits(chunks, 0);
  const Point width = box.hi - box.lo;
  for_each_index(chunks, [&](std::size_t c) {
    SampleStream s = stream.split(c);
    const std::size_t len = chunk_length(samples, c);
    std::vector<double> x(n);
    std::uint64_t h = 0;
    for (std::size_t i = 0; i < len; ++i) {
      for (int j = 0; j < n; ++j) x[j] = box.lo(j) + width(j) * s.uniform();
      if (set.contains(x.data())) ++h;
    }
    hits[c] = h;
  });
  std::uint64_t total = 0;
  for (auto h : hits) total += h;
  const double p = static_cast<double>(total) / static_cast<double>(samples);
  const double bv = box.volume();
  VolumeEstimate est;
  est.method = VolumeMethod::MonteCarlo;
  est.samples = samples;
  est.value = bv * p;
  est.std_error = bv * std::sqrt(p * (1.0 - p) / static_cast<double>(samples));
  return est;
}

VolumeEstimate mc_volume(const ConvexBody& body, std::uint64_t seed, std::uint64_t samples) {
  if (samples == 0) throw std::invalid_argument("mc_volume: zero samples");
  const ConstraintSet set = as_constraints(body);
  return mc_volume(set, sampling_box(body, set), SampleStream(seed), samples);
}

VolumeEstimate volume(const ConvexBody& body, const VolumeOptions& options) {
  if (!options.force_monte_carlo) {
    Matrix m;
    Point s;
    const ConvexBody& core = strip_affine(body, m, s);
    if (const auto* ball = core.as<Ball>()) {
      VolumeEstimate est;
      est.value = std::abs(m.determinant()) * unit_ball_volume(body.dim()) *
                  std::pow(ball->radius, body.dim());
      return est;
    }
    if (body.degenerate()) return VolumeEstimate{};
    if (body.is_polytope() && body.dim() <= kMaxExactDim) return exact_polytope_volume(body);
  }
  return mc_volume(body, options.seed, options.samples);
}

ConstraintSet as_constraints(const ConvexBody& body) {
  return flatten(body, [](const VPolytope& v) {
    HPolytope h = vertex_hull(v.vertices);
    if (h.normals.rows() == 0) throw std::domain_error("as_constraints: vertex hull is not full-dimensional");
    return h;
  });
}

Box sampling_box(const ConvexBody& body, const ConstraintSet& set) {
  Box box = set.bounding_box();
  const Box outer = bounding_box(body);
  box.lo = box.lo.cwiseMax(outer.lo);
  box.hi = box.hi.cwiseMin(outer.hi);
  box.exact = box.exact || outer.exact;
  if (((box.hi - box.lo).array() <= 0.0).any()) {
    box.hi = box.hi.cwiseMax(box.lo);
  }
  return box;
}

VolumeProduct volume_product(const ConvexBody& body, const VolumeOptions& options) {
  if (!body.symmetric()) throw std::invalid_argument("volume_product: body is not symmetric");
  const ConvexBody polar = polar_dual(body);
  VolumeProduct out;
  out.body = volume(body, options);
  VolumeOptions polar_options = options;
  polar_options.seed = mix64(options.seed ^ 0x706f6c6172ULL);
  out.polar = volume(polar, polar_options);
  const double n = body.dim();
  out.value = std::pow(out.body.value * out.polar.value, 1.0 / n);
  const bool mc = out.body.method == VolumeMethod::MonteCarlo ||
                  out.polar.method == VolumeMethod::MonteCarlo;
  out.method = mc ? VolumeMethod::MonteCarlo : VolumeMethod::Exact;
  if (mc) {
    const double r1 = out.body.value > 0.0 ? out.body.std_error / out.body.value : 0.0;
    const double r2 = out.polar.value > 0.0 ? out.polar.std_error / out.polar.value : 0.0;
    out.std_error = out.value / n * std::sqrt(r1 * r1 + r2 * r2);
  }
  return out;
}

ProductRange volume_product_range(int dim) {
  const double n = dim;
  ProductRange r;
  r.lower = std::exp((n * std::log(4.0) - std::lgamma(n + 1.0)) / n);
  r.upper = std::pow(unit_ball_volume(dim), 2.0 / n);
  return r;
}

double circumradius_bound(const ConvexBody& body) {
  return radius_rec(body, Matrix::Identity(body.dim(), body.dim()), Point::Zero(body.dim()));
}

}  // namespace hadwiger
