#pragma once

// Finite birth-death chains with state- and direction-dependent thinning,
// and the stationary quantities every dispersion computation consumes.

#include "bdt/types.hpp"

#include <cmath>
#include <string>
#include <utility>

namespace bdt {

/// Birth-death chain on {0..J} plus retention probabilities for births and
/// deaths. All vectors cover the full index range; the boundary conventions
/// lambda[J] = mu[0] = q_plus[J] = q_minus[0] = 0 are stored explicitly.
template <typename Scalar>
struct BasicBDModel {
  Vector<Scalar> lambda;
  Vector<Scalar> mu;
  Vector<Scalar> q_plus;
  Vector<Scalar> q_minus;

  Index J() const { return lambda.size() - 1; }

  template <typename Other>
  BasicBDModel<Other> cast() const {
    return {lambda.template cast<Other>(), mu.template cast<Other>(),
            q_plus.template cast<Other>(), q_minus.template cast<Other>()};
  }
};

using BDModel = BasicBDModel<double>;

namespace detail {

template <typename Scalar>
bool is_finite(const Scalar& x) {
  using std::isfinite;
  return isfinite(x);
}

inline std::string at(const char* field, Index i) {
  return std::string(field) + "[" + std::to_string(i) + "]";
}

}  // namespace detail

/// Throws bdt::Error unless the model is an irreducible chain with legal
/// thinning. Boundary violations are rejected, never repaired.
template <typename Scalar>
void validate(const BasicBDModel<Scalar>& model) {
  const Index n = model.lambda.size();
  if (n < 2) throw Error(ErrorCode::DimensionMismatch, "J must be at least 1");
  if (model.mu.size() != n || model.q_plus.size() != n || model.q_minus.size() != n)
    throw Error(ErrorCode::DimensionMismatch, "lambda, mu, q_plus, q_minus must all have length J+1");

  const Index J = n - 1;
  if (model.lambda[J] != Scalar(0)) throw Error(ErrorCode::BoundaryRateNonzero, "lambda[J] must be 0");
  if (model.mu[0] != Scalar(0)) throw Error(ErrorCode::BoundaryRateNonzero, "mu[0] must be 0");

  for (Index i = 0; i < J; ++i) {
    if (!(model.lambda[i] > Scalar(0)) || !detail::is_finite(model.lambda[i]))
      throw Error(ErrorCode::NonPositiveInteriorRate, detail::at("lambda", i) + " must be positive and finite");
  }
  for (Index i = 1; i <= J; ++i) {
    if (!(model.mu[i] > Scalar(0)) || !detail::is_finite(model.mu[i]))
      throw Error(ErrorCode::NonPositiveInteriorRate, detail::at("mu", i) + " must be positive and finite");
  }

  bool any_counted = false;
  for (Index i = 0; i <= J; ++i) {
    for (const auto& [name, q] : {std::pair{"q_plus", model.q_plus[i]}, std::pair{"q_minus", model.q_minus[i]}}) {
      if (!(q >= Scalar(0) && q <= Scalar(1)))
        throw Error(ErrorCode::ProbabilityOutOfRange, detail::at(name, i) + " must lie in [0,1]");
      if (q > Scalar(0)) any_counted = true;
    }
  }
  if (model.q_minus[0] != Scalar(0)) throw Error(ErrorCode::ProbabilityOutOfRange, "q_minus[0] must be 0");
  if (model.q_plus[J] != Scalar(0)) throw Error(ErrorCode::ProbabilityOutOfRange, "q_plus[J] must be 0");
  if (!any_counted) throw Error(ErrorCode::AllThinningZero, "at least one retention probability must be positive");
}

/// pi together with its cumulative P and the upper tail 1 - P summed from the
/// top, so both tails keep full relative precision.
template <typename Scalar>
struct BasicStationaryDistribution {
  Vector<Scalar> pi;
  Vector<Scalar> P;
  Vector<Scalar> P_upper;
};

template <typename Scalar>
struct BasicStationarySummary : BasicStationaryDistribution<Scalar> {
  Scalar raw_rate{0};
  Scalar thinned_rate{0};
  Vector<Scalar> partial_rates;
  Vector<Scalar> Lambda;
  Vector<Scalar> Lambda_upper;
  Scalar counted_fraction{0};

  /// P_k - Lambda_k, evaluated from whichever end of the two distributions
  /// carries less mass.
  Scalar cdf_gap(Index k) const {
    if (this->P[k] + Lambda[k] <= Scalar(1)) return this->P[k] - Lambda[k];
    return Lambda_upper[k] - this->P_upper[k];
  }
};

using StationaryDistribution = BasicStationaryDistribution<double>;
using StationarySummary = BasicStationarySummary<double>;

namespace detail {

/// Unnormalized pi from the product-form recurrence, rescaled to the running
/// maximum whenever a weight exceeds 1e150. States whose weight underflows
/// relative to the peak come back as 0.
template <typename Scalar>
Vector<Scalar> stationary_weights(const BasicBDModel<Scalar>& model) {
  const Index J = model.J();
  const Scalar upper(1e150);
  Vector<Scalar> w(J + 1);
  w[0] = Scalar(1);
  for (Index i = 1; i <= J; ++i) {
    w[i] = w[i - 1] * (model.lambda[i - 1] / model.mu[i]);
    if (w[i] > upper) w.head(i + 1) *= Scalar(1) / w[i];
  }
  return w;
}

template <typename Scalar>
Vector<Scalar> upper_tail(const Vector<Scalar>& terms) {
  const Index n = terms.size();
  Vector<Scalar> tail(n);
  Scalar acc(0);
  for (Index k = n - 1; k >= 0; --k) {
    tail[k] = acc;
    acc += terms[k];
  }
  return tail;
}

/// Exclusive prefix sums: out[k] = sum_{i<k} terms[i].
template <typename Scalar>
Vector<Scalar> prefix_before(const Vector<Scalar>& terms) {
  Vector<Scalar> out(terms.size());
  Scalar acc(0);
  for (Index k = 0; k < terms.size(); ++k) {
    out[k] = acc;
    acc += terms[k];
  }
  return out;
}

template <typename Scalar>
Vector<Scalar> cumulative(const Vector<Scalar>& terms) {
  Vector<Scalar> out(terms.size());
  Scalar acc(0);
  for (Index k = 0; k < terms.size(); ++k) {
    acc += terms[k];
    out[k] = acc;
  }
  return out;
}

}  // namespace detail

template <typename Scalar>
BasicStationaryDistribution<Scalar> stationary_distribution(const BasicBDModel<Scalar>& model) {
  validate(model);
  const Vector<Scalar> w = detail::stationary_weights(model);
  const Scalar total = w.sum();
  if (!detail::is_finite(total) || !(total > Scalar(0)))
    throw Error(ErrorCode::NumericOverflow, "stationary normalizing constant is not finite");

  BasicStationaryDistribution<Scalar> out;
  out.pi = w / total;
  for (Index i = 0; i < out.pi.size(); ++i) {
    if (!(out.pi[i] > Scalar(0)))
      throw Error(ErrorCode::NumericOverflow, "pi[" + std::to_string(i) + "] underflows; rate ratios are too skewed");
  }
  out.P = detail::cumulative(out.pi);
  out.P_upper = detail::upper_tail(out.pi);
  return out;
}

template <typename Scalar>
BasicStationarySummary<Scalar> rates_and_cdfs(const BasicBDModel<Scalar>& model) {
  using std::abs;
  BasicStationarySummary<Scalar> s;
  static_cast<BasicStationaryDistribution<Scalar>&>(s) = stationary_distribution(model);

  const Index J = model.J();
  const auto& pi = s.pi;
  const Vector<Scalar> up = pi.cwiseProduct(model.lambda);  // pi_i lambda_i, zero at J

  s.raw_rate = Scalar(2) * up.sum();

  // Counted up-crossing flow pi_i lambda_i (q+_i + q-_{i+1}); partial balance
  // turns each counted death from i+1 into a flow from i.
  Vector<Scalar> flow = Vector<Scalar>::Zero(J + 1);
  for (Index i = 0; i < J; ++i) flow[i] = up[i] * (model.q_plus[i] + model.q_minus[i + 1]);

  const Vector<Scalar> flow_before = detail::prefix_before(flow);
  const Vector<Scalar> flow_after = detail::upper_tail(flow);

  s.partial_rates = up.cwiseProduct(model.q_plus) + flow_before;
  s.thinned_rate = s.partial_rates[J];

  const Scalar direct = up.cwiseProduct(model.q_plus).sum() +
                        pi.cwiseProduct(model.mu).cwiseProduct(model.q_minus).sum();
  if (abs(direct - s.thinned_rate) > Scalar(1e-12) * s.thinned_rate)
    throw Error(ErrorCode::InternalIdentityViolated, "the two forms of the thinned rate disagree");

  s.Lambda = s.partial_rates / s.thinned_rate;
  s.Lambda_upper.resize(J + 1);
  for (Index k = 0; k < J; ++k) s.Lambda_upper[k] = (up[k] * model.q_minus[k + 1] + flow_after[k]) / s.thinned_rate;
  s.Lambda_upper[J] = Scalar(0);

  s.counted_fraction = s.thinned_rate / s.raw_rate;
  return s;
}

}  // namespace bdt
