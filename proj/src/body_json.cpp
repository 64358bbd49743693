#include "hadwiger/body_json.hpp"

#include <cmath>
#include <set>
#include <stdexcept>
#include <string>

namespace hadwiger {

namespace {

using nlohmann::json;

void check_fields(const json& spec, const std::set<std::string>& allowed, const std::string& kind) {
  for (const auto& [key, value] : spec.items()) {
    if (!allowed.count(key)) {
      throw std::invalid_argument("body spec: field '" + key + "' is not allowed for kind '" +
                                  kind + "'");
    }
  }
}

int read_dim(const json& spec) {
  if (!spec.contains("dim")) throw std::invalid_argument("body spec: missing 'dim'");
  const auto& d = spec.at("dim");
  if (!d.is_number_integer() || d.get<long long>() < 1 || d.get<long long>() > 64) {
    throw std::invalid_argument("body spec: 'dim' must be an integer in [1, 64]");
  }
  return d.get<int>();
}

bool read_bool(const json& spec, const char* key) {
  if (!spec.contains(key)) return false;
  if (!spec.at(key).is_boolean()) {
    throw std::invalid_argument(std::string("body spec: '") + key + "' must be a boolean");
  }
  return spec.at(key).get<bool>();
}

Eigen::VectorXd read_vector(const json& v, const std::string& what) {
  if (!v.is_array() || v.empty()) {
    throw std::invalid_argument("body spec: '" + what + "' must be a nonempty array");
  }
  Eigen::VectorXd out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!v[i].is_number()) {
      throw std::invalid_argument("body spec: '" + what + "' must contain numbers");
    }
    out(static_cast<Eigen::Index>(i)) = v[i].get<double>();
  }
  return out;
}

// Rows of the JSON array become rows of the matrix.
Matrix read_rows(const json& v, const std::string& what) {
  if (!v.is_array() || v.empty()) {
    throw std::invalid_argument("body spec: '" + what + "' must be a nonempty array of rows");
  }
  const Eigen::VectorXd first = read_vector(v[0], what + "[0]");
  Matrix out(v.size(), first.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    const Eigen::VectorXd row = read_vector(v[i], what + "[" + std::to_string(i) + "]");
    if (row.size() != first.size()) {
      throw std::invalid_argument("body spec: rows of '" + what + "' differ in length");
    }
    out.row(static_cast<Eigen::Index>(i)) = row.transpose();
  }
  return out;
}

std::string read_kind(const json& spec) {
  if (!spec.is_object()) throw std::invalid_argument("body spec: must be a JSON object");
  if (!spec.contains("kind") || !spec.at("kind").is_string()) {
    throw std::invalid_argument("body spec: missing string field 'kind'");
  }
  return spec.at("kind").get<std::string>();
}

}  // namespace

int validate_body_spec(const json& spec) {
  const std::string kind = read_kind(spec);
  if (kind == "cube" || kind == "simplex" || kind == "cross") {
    check_fields(spec, {"kind", "dim", "normalize_volume"}, kind);
    read_bool(spec, "normalize_volume");
    return read_dim(spec);
  }
  if (kind == "ball") {
    check_fields(spec, {"kind", "dim", "normalize_volume", "radius", "center"}, kind);
    const int dim = read_dim(spec);
    const bool normalized = read_bool(spec, "normalize_volume");
    if (spec.contains("radius")) {
      if (normalized) {
        throw std::invalid_argument("body spec: 'radius' conflicts with 'normalize_volume'");
      }
      if (!spec.at("radius").is_number() || !(spec.at("radius").get<double>() > 0.0)) {
        throw std::invalid_argument("body spec: 'radius' must be a positive number");
      }
    }
    if (spec.contains("center") && read_vector(spec.at("center"), "center").size() != dim) {
      throw std::invalid_argument("body spec: 'center' length differs from 'dim'");
    }
    return dim;
  }
  if (kind == "hpolytope") {
    check_fields(spec, {"kind", "dim", "A", "b"}, kind);
    if (!spec.contains("A") || !spec.contains("b")) {
      throw std::invalid_argument("body spec: hpolytope needs 'A' and 'b'");
    }
    const Matrix a = read_rows(spec.at("A"), "A");
    const Eigen::VectorXd b = read_vector(spec.at("b"), "b");
    if (a.rows() != b.size()) throw std::invalid_argument("body spec: 'A' and 'b' differ in length");
    if (spec.contains("dim") && read_dim(spec) != a.cols()) {
      throw std::invalid_argument("body spec: 'dim' differs from the width of 'A'");
    }
    return static_cast<int>(a.cols());
  }
  if (kind == "vpolytope") {
    check_fields(spec, {"kind", "dim", "vertices"}, kind);
    if (!spec.contains("vertices")) throw std::invalid_argument("body spec: vpolytope needs 'vertices'");
    const Matrix v = read_rows(spec.at("vertices"), "vertices");
    if (spec.contains("dim") && read_dim(spec) != v.cols()) {
      throw std::invalid_argument("body spec: 'dim' differs from the vertex length");
    }
    return static_cast<int>(v.cols());
  }
  throw std::invalid_argument("body spec: unknown kind '" + kind + "'");
}

ConvexBody body_from_json(const json& spec) {
  const int dim = validate_body_spec(spec);
  const std::string kind = read_kind(spec);
  const bool normalized = read_bool(spec, "normalize_volume");
  if (kind == "hpolytope") {
    return ConvexBody::hpolytope(read_rows(spec.at("A"), "A"), read_vector(spec.at("b"), "b"));
  }
  if (kind == "vpolytope") {
    return ConvexBody::vpolytope(read_rows(spec.at("vertices"), "vertices").transpose());
  }
  if (kind == "ball" && (spec.contains("radius") || spec.contains("center"))) {
    const double radius = spec.contains("radius") ? spec.at("radius").get<double>() : 1.0;
    const Point center =
        spec.contains("center") ? read_vector(spec.at("center"), "center") : Point(Point::Zero(dim));
    if (normalized) {
      return ConvexBody::ball(center, std::pow(unit_ball_volume(dim), -1.0 / dim));
    }
    return ConvexBody::ball(center, radius);
  }
  return make_standard_body(*parse_standard_kind(kind), dim, normalized);
}

}  // namespace hadwiger
