#pragma once

// Named example systems, finite and infinite, addressable by name plus a
// parameter map.

#include "bdt/infinite.hpp"
#include "bdt/model.hpp"

#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace bdt {

/// M/M/s/K+M: s servers, buffer K, exponential abandonment at rate gamma per
/// waiting customer. Only service completions are counted.
BDModel mmsk_reneging(int K, int s, double lambda, double mu, double gamma);

/// Finite population of J animals; each absent animal arrives at rate lambda,
/// each present one leaves at rate mu. An arrival to i animals starts a
/// fight (is counted) with probability i/(i+1). Needs J >= 2: with one animal
/// nothing is ever counted.
BDModel billabong(int J, double lambda, double mu);

/// M/M/1/K with every departure counted.
BDModel mm1k(int K, double lambda, double mu);

/// M/M/1 with lambda = rho, mu = 1, counting only departures that empty the
/// queue: the renewal process of busy-cycle ends.
InfiniteBDModel mm1_busy_cycle(double rho);

/// M/M/s with lambda = rho s, mu_i = min(i, s); departures counted with
/// probability q.
InfiniteBDModel mms_output(int s, double rho, double q);

/// M/M/1 (mu = 1) with arrivals and departures thinned by constant q+ / q-.
InfiniteBDModel mm1_two_sided(double rho, double q_plus, double q_minus);

enum class ModelKind { finite, infinite };

struct ParamInfo {
  std::string name;
  bool integer = false;
  std::optional<double> default_value;
  bool required = true;  // ignored when a default exists
};

struct ModelInfo {
  std::string name;
  ModelKind kind;
  std::vector<ParamInfo> params;
};

const std::vector<ModelInfo>& model_catalog();

/// Throws ParamOutOfRange for unknown model names.
const ModelInfo& model_info(const std::string& name);

struct ModelSpec {
  std::string name;
  std::map<std::string, double> params;
};

using AnyModel = std::variant<BDModel, InfiniteBDModel>;

/// Unknown, missing, non-integer or out-of-range parameters raise
/// ParamOutOfRange. mmsk_reneging also accepts rho in place of lambda
/// (lambda = rho s mu).
AnyModel build_model(const ModelSpec& spec);

}  // namespace bdt
