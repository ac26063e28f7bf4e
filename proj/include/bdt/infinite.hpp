#pragma once

// Dispersion sum 1 + 2 sum_k R_k evaluated on a countably infinite chain by
// truncation. The infinite-state formula has no proven validity conditions;
// results carry their truncation diagnostics and make no such claim.

#include "bdt/types.hpp"

#include <cstddef>
#include <functional>
#include <optional>

namespace bdt {

struct StateRates {
  double lambda = 0;
  double mu = 0;
  double q_plus = 0;
  double q_minus = 0;
};

struct TruncationPolicy {
  double tail_tol = 1e-10;
  std::size_t max_states = 1'000'000;
};

struct InfiniteBDModel {
  std::function<StateRates(std::size_t)> rates;
  TruncationPolicy truncation;
  /// Known geometric decay ratio of pi (and of the R_k tail), when the model
  /// has one. Used for the remainder bound instead of the empirical estimate.
  std::optional<double> geometric_tail_ratio;
};

struct InfiniteDispersion {
  double D = 1;
  std::size_t states_used = 0;  // K: R_0..R_{K-1} were summed
  double tail_bound = 0;        // estimate of the truncation error in D, 2 |sum_{k>=K} R_k|
  std::size_t horizon = 0;      // states materialized to normalize pi
  double thinned_rate = 0;
  double raw_rate = 0;
  double counted_fraction = 0;
  Vector<double> R;             // R_0..R_{K-1}
};

/// Stops at the first K with 1 - P_K < tol, 1 - Lambda_K < tol and
/// |R_K| < tol * max(1, |sum_{k<K} R_k|). Throws StabilityCheckFailed when
/// the product-form weights stop decaying (last 100 ratios lambda_{i-1}/mu_i
/// all >= 1 - 1e-6 at max_states) and TruncationNotConverged otherwise.
InfiniteDispersion dispersion_infinite(const InfiniteBDModel& model);

}  // namespace bdt
