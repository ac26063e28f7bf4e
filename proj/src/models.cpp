#include "bdt/models.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace bdt {
namespace {

[[noreturn]] void out_of_range(const std::string& what) { throw Error(ErrorCode::ParamOutOfRange, what); }

void require_positive(const char* name, double v) {
  if (!(v > 0) || !std::isfinite(v)) out_of_range(std::string(name) + " must be positive and finite");
}

void require_unit_open(const char* name, double v) {
  if (!(v > 0 && v < 1)) out_of_range(std::string(name) + " must lie in (0,1)");
}

void require_unit_half_open(const char* name, double v) {
  if (!(v > 0 && v <= 1)) out_of_range(std::string(name) + " must lie in (0,1]");
}

BDModel zeros(int J) {
  const Index n = J + 1;
  return {Vector<double>::Zero(n), Vector<double>::Zero(n), Vector<double>::Zero(n), Vector<double>::Zero(n)};
}

}  // namespace

BDModel mmsk_reneging(int K, int s, double lambda, double mu, double gamma) {
  if (K < 1) out_of_range("K must be at least 1");
  if (s < 1 || s > K) out_of_range("s must lie in [1, K]");
  require_positive("lambda", lambda);
  require_positive("mu", mu);
  if (!(gamma >= 0) || !std::isfinite(gamma)) out_of_range("gamma must be nonnegative and finite");

  BDModel m = zeros(K);
  for (int i = 0; i <= K; ++i) {
    if (i < K) m.lambda[i] = lambda;
    if (i == 0) continue;
    const double service = mu * std::min(i, s);
    m.mu[i] = service + gamma * std::max(i - s, 0);
    m.q_minus[i] = service / m.mu[i];
  }
  return m;
}

BDModel billabong(int J, double lambda, double mu) {
  // With one animal no state both admits an arrival and has i > 0.
  if (J < 2) out_of_range("J must be at least 2");
  require_positive("lambda", lambda);
  require_positive("mu", mu);

  BDModel m = zeros(J);
  for (int i = 0; i <= J; ++i) {
    m.lambda[i] = (J - i) * lambda;
    m.mu[i] = i * mu;
    if (i < J) m.q_plus[i] = static_cast<double>(i) / (i + 1);
  }
  return m;
}

BDModel mm1k(int K, double lambda, double mu) {
  if (K < 1) out_of_range("K must be at least 1");
  require_positive("lambda", lambda);
  require_positive("mu", mu);

  BDModel m = zeros(K);
  m.lambda.head(K).setConstant(lambda);
  m.mu.tail(K).setConstant(mu);
  m.q_minus.tail(K).setOnes();
  return m;
}

InfiniteBDModel mm1_busy_cycle(double rho) {
  require_unit_open("rho", rho);
  InfiniteBDModel m;
  m.rates = [rho](std::size_t i) {
    return StateRates{rho, i == 0 ? 0.0 : 1.0, 0.0, i == 1 ? 1.0 : 0.0};
  };
  m.geometric_tail_ratio = rho;
  return m;
}

InfiniteBDModel mms_output(int s, double rho, double q) {
  if (s < 1) out_of_range("s must be at least 1");
  require_unit_open("rho", rho);
  require_unit_half_open("q", q);
  InfiniteBDModel m;
  m.rates = [s, rho, q](std::size_t i) {
    const double servers = static_cast<double>(std::min<std::size_t>(i, static_cast<std::size_t>(s)));
    return StateRates{rho * s, servers, 0.0, i == 0 ? 0.0 : q};
  };
  m.geometric_tail_ratio = rho;
  return m;
}

InfiniteBDModel mm1_two_sided(double rho, double q_plus, double q_minus) {
  require_unit_open("rho", rho);
  require_unit_half_open("q_plus", q_plus);
  require_unit_half_open("q_minus", q_minus);
  InfiniteBDModel m;
  m.rates = [=](std::size_t i) {
    return StateRates{rho, i == 0 ? 0.0 : 1.0, q_plus, i == 0 ? 0.0 : q_minus};
  };
  m.geometric_tail_ratio = rho;
  return m;
}

const std::vector<ModelInfo>& model_catalog() {
  static const std::vector<ModelInfo> catalog = {
      {"mmsk_reneging",
       ModelKind::finite,
       {{"K", true, {}},
        {"s", true, {}},
        {"lambda", false, {}, false},
        {"rho", false, {}, false},
        {"mu", false, 1.0},
        {"gamma", false, 0.0}}},
      {"billabong", ModelKind::finite, {{"J", true, {}}, {"lambda", false, {}}, {"mu", false, 1.0}}},
      {"mm1k", ModelKind::finite, {{"K", true, {}}, {"lambda", false, {}}, {"mu", false, 1.0}}},
      {"mm1_busy_cycle", ModelKind::infinite, {{"rho", false, {}}}},
      {"mms_output", ModelKind::infinite, {{"s", true, {}}, {"rho", false, {}}, {"q", false, 1.0}}},
      {"mm1_two_sided", ModelKind::infinite, {{"rho", false, {}}, {"q_plus", false, {}}, {"q_minus", false, {}}}},
  };
  return catalog;
}

const ModelInfo& model_info(const std::string& name) {
  for (const auto& info : model_catalog())
    if (info.name == name) return info;
  out_of_range("unknown model '" + name + "'");
}

AnyModel build_model(const ModelSpec& spec) {
  const ModelInfo& info = model_info(spec.name);

  for (const auto& [key, value] : spec.params) {
    const auto it = std::find_if(info.params.begin(), info.params.end(), [&](const ParamInfo& p) { return p.name == key; });
    if (it == info.params.end()) out_of_range("model " + spec.name + " has no parameter '" + key + "'");
    if (!std::isfinite(value)) out_of_range("parameter " + key + " must be finite");
    if (it->integer && (value != std::floor(value) || std::abs(value) > 1e9))
      out_of_range("parameter " + key + " must be an integer");
  }

  std::map<std::string, double> p;
  for (const auto& param : info.params) {
    if (const auto it = spec.params.find(param.name); it != spec.params.end())
      p[param.name] = it->second;
    else if (param.default_value)
      p[param.name] = *param.default_value;
    else if (param.required)
      out_of_range("model " + spec.name + " requires parameter '" + param.name + "'");
  }
  const auto integer = [&](const char* k) { return static_cast<int>(p.at(k)); };

  if (spec.name == "mmsk_reneging") {
    const bool has_lambda = p.count("lambda") != 0;
    if (has_lambda == (p.count("rho") != 0)) out_of_range("mmsk_reneging takes exactly one of lambda or rho");
    const double lambda = has_lambda ? p["lambda"] : p["rho"] * integer("s") * p["mu"];
    return mmsk_reneging(integer("K"), integer("s"), lambda, p["mu"], p["gamma"]);
  }
  if (spec.name == "billabong") return billabong(integer("J"), p["lambda"], p["mu"]);
  if (spec.name == "mm1k") return mm1k(integer("K"), p["lambda"], p["mu"]);
  if (spec.name == "mm1_busy_cycle") return mm1_busy_cycle(p["rho"]);
  if (spec.name == "mms_output") return mms_output(integer("s"), p["rho"], p["q"]);
  return mm1_two_sided(p["rho"], p["q_plus"], p["q_minus"]);
}

}  // namespace bdt
