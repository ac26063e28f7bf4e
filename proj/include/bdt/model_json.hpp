#pragma once

// JSON form of a finite model: {"J": int, "lambda": [...], "mu": [...],
// "q_plus": [...], "q_minus": [...]}, each array of length J+1. Other keys
// are ignored.

#include "bdt/model.hpp"

#include <json.hpp>

#include <string>

namespace bdt {

/// Throws ParseError on malformed JSON or missing/mistyped fields, then the
/// usual validation errors.
BDModel model_from_json(const nlohmann::json& j);
BDModel parse_model(const std::string& text);
/// "-" reads standard input.
BDModel load_model(const std::string& path);

nlohmann::json model_to_json(const BDModel& model);

}  // namespace bdt
