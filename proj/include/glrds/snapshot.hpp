#pragma once

// JSON checkpoint of a GlrdsFilter.
//
// {
//   "format": "glrds-state", "version": 1,
//   "params": {"M", "D", "K", "I", "B", "lambda", "T", "delta", "adapt_basis", "max_condition"},
//   "weights": <matrix>, "inverse_correlation": <matrix>, "selected_branch": b,
//   "branches": [{"basis": [<matrix>...], "inverse_correlation": [...],
//                 "cross_correlation": [...], "cross_vector": [...]}, ...]
// }
//
// <matrix> is {"rows": r, "cols": c, "re": [...], "im": [...]} in column-major
// order; vectors are single-column matrices. Doubles are written with
// round-trip precision, so a restored filter continues bit-identically.

#include <string>

#include <json.hpp>

#include "glrds/rals.hpp"

namespace glrds {

nlohmann::json to_json(const GlrdsFilter& filter);
GlrdsFilter filter_from_json(const nlohmann::json& snapshot);

std::string save_snapshot(const GlrdsFilter& filter);
GlrdsFilter load_snapshot(const std::string& text);

}  // namespace glrds
