#pragma once

// Closed-form asymptotic index of dispersion of the thinned count on a
// finite birth-death chain:
//
//   D = 1 + 2 sum_{k<J} R_k,
//   R_k = (P_k - Lambda_k) * (lbar (P_k - Lambda_k) / (pi_k lambda_k) + q+_k - q-_{k+1}).

#include "bdt/model.hpp"

namespace bdt {

template <typename Scalar>
struct BasicRTermBreakdown {
  Vector<Scalar> R;  // R_0 .. R_{J-1}
  Scalar D{1};
};

using RTermBreakdown = BasicRTermBreakdown<double>;

template <typename Scalar>
Scalar r_term(const BasicBDModel<Scalar>& model, const BasicStationarySummary<Scalar>& s, Index k) {
  const Scalar gap = s.cdf_gap(k);
  return gap * (s.thinned_rate * gap / (s.pi[k] * model.lambda[k]) + model.q_plus[k] - model.q_minus[k + 1]);
}

template <typename Scalar>
BasicRTermBreakdown<Scalar> dispersion_closed_form(const BasicBDModel<Scalar>& model) {
  const auto s = rates_and_cdfs(model);
  const Index J = model.J();
  BasicRTermBreakdown<Scalar> out;
  out.R.resize(J);
  for (Index k = 0; k < J; ++k) out.R[k] = r_term(model, s, k);
  out.D = Scalar(1) + Scalar(2) * out.R.sum();
  return out;
}

enum class CountingDirection { births, deaths };

/// Same rates, thinning replaced by complete pure birth- or death-counting.
template <typename Scalar>
BasicBDModel<Scalar> complete_counting_model(const BasicBDModel<Scalar>& rates, CountingDirection direction) {
  BasicBDModel<Scalar> m = rates;
  const Index J = rates.J();
  m.q_plus.setZero(J + 1);
  m.q_minus.setZero(J + 1);
  if (direction == CountingDirection::births)
    m.q_plus.head(J).setOnes();
  else
    m.q_minus.tail(J).setOnes();
  return m;
}

/// Complete pure birth- or death-counting; the q vectors of `model` are
/// ignored. Both directions give the same value:
///
///   D = 1 + 2 lbar sum_k (P_k - Lambda-_k)(P_k - Lambda+_k) / (pi_k lambda_k)
///
/// with Lambda-_k = sum_{i<k} pi_i lambda_i / lbar and Lambda+_k the same
/// sum including i = k.
template <typename Scalar>
Scalar dispersion_complete_counting(const BasicBDModel<Scalar>& model, CountingDirection direction) {
  const auto counting = complete_counting_model(model, direction);
  const auto s = rates_and_cdfs(counting);
  const Index J = model.J();

  Scalar acc(0);
  for (Index k = 0; k < J; ++k) {
    const Scalar step = s.pi[k] * model.lambda[k];
    // Lambda_k of the counting model is Lambda+ for births and Lambda- for deaths.
    const Scalar own_gap = s.cdf_gap(k);
    const Scalar gap_minus = direction == CountingDirection::births ? own_gap + step / s.thinned_rate : own_gap;
    const Scalar gap_plus = direction == CountingDirection::births ? own_gap : own_gap - step / s.thinned_rate;
    acc += gap_minus * gap_plus / step;
  }
  return Scalar(1) + Scalar(2) * s.thinned_rate * acc;
}

}  // namespace bdt
