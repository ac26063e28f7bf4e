#pragma once

// Random valid models for property checks.

#include "bdt/model.hpp"

#include <cmath>
#include <random>

namespace bdt {

struct RandomModelOptions {
  Index J_min = 1;
  Index J_max = 50;
  double rate_min = 0.1;  // rates are log-uniform on [rate_min, rate_max]
  double rate_max = 10;
  double zero_q_fraction = 0.3;  // chance that a retention probability is exactly 0
  double one_q_fraction = 0.1;   // chance that it is exactly 1
};

inline BDModel random_model(std::mt19937_64& rng, const RandomModelOptions& opt = {}) {
  std::uniform_int_distribution<Index> size(opt.J_min, opt.J_max);
  std::uniform_real_distribution<double> unit(0, 1);
  const double lo = std::log(opt.rate_min), hi = std::log(opt.rate_max);
  const auto rate = [&] { return std::exp(lo + (hi - lo) * unit(rng)); };
  const auto prob = [&] {
    const double u = unit(rng);
    if (u < opt.zero_q_fraction) return 0.0;
    if (u < opt.zero_q_fraction + opt.one_q_fraction) return 1.0;
    return unit(rng);
  };

  const Index J = size(rng);
  BDModel m{Vector<double>::Zero(J + 1), Vector<double>::Zero(J + 1), Vector<double>::Zero(J + 1),
            Vector<double>::Zero(J + 1)};
  for (Index i = 0; i < J; ++i) m.lambda[i] = rate();
  for (Index i = 1; i <= J; ++i) m.mu[i] = rate();
  for (Index i = 0; i < J; ++i) m.q_plus[i] = prob();
  for (Index i = 1; i <= J; ++i) m.q_minus[i] = prob();
  if ((m.q_plus.array() == 0).all() && (m.q_minus.array() == 0).all()) m.q_minus[J] = 1;
  return m;
}

}  // namespace bdt
