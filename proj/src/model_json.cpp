#include "bdt/model_json.hpp"

#include <fstream>
#include <iostream>
#include <sstream>
#include <vector>

namespace bdt {
namespace {

Vector<double> read_array(const nlohmann::json& j, const char* key, Index expected) {
  if (!j.contains(key)) throw Error(ErrorCode::ParseError, std::string("missing field '") + key + "'");
  const auto& a = j.at(key);
  if (!a.is_array()) throw Error(ErrorCode::ParseError, std::string("field '") + key + "' must be an array");
  if (static_cast<Index>(a.size()) != expected)
    throw Error(ErrorCode::DimensionMismatch, std::string("field '") + key + "' must have J+1 entries");
  Vector<double> v(expected);
  for (Index i = 0; i < expected; ++i) {
    const auto& x = a[static_cast<std::size_t>(i)];
    if (!x.is_number()) throw Error(ErrorCode::ParseError, detail::at(key, i) + " is not a number");
    v[i] = x.get<double>();
  }
  return v;
}

std::vector<double> to_std(const Vector<double>& v) { return {v.data(), v.data() + v.size()}; }

}  // namespace

BDModel model_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw Error(ErrorCode::ParseError, "model must be a JSON object");
  if (!j.contains("J") || !j.at("J").is_number_integer())
    throw Error(ErrorCode::ParseError, "field 'J' must be an integer");
  const auto J = j.at("J").get<long long>();
  if (J < 1) throw Error(ErrorCode::DimensionMismatch, "J must be at least 1");
  const auto n = static_cast<Index>(J + 1);

  BDModel m{read_array(j, "lambda", n), read_array(j, "mu", n), read_array(j, "q_plus", n), read_array(j, "q_minus", n)};
  validate(m);
  return m;
}

BDModel parse_model(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::ParseError, e.what());
  }
  return model_from_json(j);
}

BDModel load_model(const std::string& path) {
  if (path == "-") {
    std::ostringstream ss;
    ss << std::cin.rdbuf();
    return parse_model(ss.str());
  }
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::ParseError, "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_model(ss.str());
}

nlohmann::json model_to_json(const BDModel& model) {
  return {{"J", model.J()},
          {"lambda", to_std(model.lambda)},
          {"mu", to_std(model.mu)},
          {"q_plus", to_std(model.q_plus)},
          {"q_minus", to_std(model.q_minus)}};
}

}  // namespace bdt
