#pragma once

#include <json.hpp>

#include "hadwiger/body.hpp"

namespace hadwiger {

// Body specs:
//   {"kind": "cube"|"ball"|"simplex"|"cross", "dim": n, "normalize_volume": bool}
//   {"kind": "ball", "dim": n, "radius": r, "center": [...]}
//   {"kind": "hpolytope", "A": [[...]], "b": [...]}
//   {"kind": "vpolytope", "vertices": [[...]]}
// Only the fields of the given kind are accepted. Errors throw
// std::invalid_argument naming the offending field.
ConvexBody body_from_json(const nlohmann::json& spec);

// Checks the fields of a spec without building the body. Returns its dimension.
int validate_body_spec(const nlohmann::json& spec);

}  // namespace hadwiger
