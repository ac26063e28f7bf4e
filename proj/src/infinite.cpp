#include "bdt/infinite.hpp"

#include "bdt/dispersion.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

namespace bdt {
namespace {

void check_state(const StateRates& r, std::size_t i) {
  const auto where = " at state " + std::to_string(i);
  if (!(r.lambda > 0) || !std::isfinite(r.lambda))
    throw Error(ErrorCode::NonPositiveInteriorRate, "lambda must be positive" + where);
  if (i == 0 && r.mu != 0) throw Error(ErrorCode::BoundaryRateNonzero, "mu[0] must be 0");
  if (i > 0 && (!(r.mu > 0) || !std::isfinite(r.mu)))
    throw Error(ErrorCode::NonPositiveInteriorRate, "mu must be positive" + where);
  if (!(r.q_plus >= 0 && r.q_plus <= 1) || !(r.q_minus >= 0 && r.q_minus <= 1))
    throw Error(ErrorCode::ProbabilityOutOfRange, "retention probability outside [0,1]" + where);
  if (i == 0 && r.q_minus != 0) throw Error(ErrorCode::ProbabilityOutOfRange, "q_minus[0] must be 0");
}

/// Rates for states 0..N, grown on demand.
class StateCache {
 public:
  explicit StateCache(const InfiniteBDModel& model) : model_(model) {}

  void ensure(std::size_t n) {
    while (states_.size() < n) {
      const auto i = states_.size();
      const auto r = model_.rates(i);
      check_state(r, i);
      states_.push_back(r);
    }
  }

  const StateRates& operator[](std::size_t i) const { return states_[i]; }

 private:
  const InfiniteBDModel& model_;
  std::vector<StateRates> states_;
};

/// Stationary quantities over states 0..N, treating the mass beyond N as
/// negligible. The finite-model summary type carries them so the same
/// stable P_k - Lambda_k evaluation applies.
struct Horizon {
  BDModel rates;  // lambda/mu/q over 0..N (lambda_N kept as is)
  StationarySummary summary;
  bool adequate = false;
};

Horizon evaluate_horizon(const StateCache& cache, std::size_t N, double tail_tol) {
  Horizon h;
  const auto n = static_cast<Index>(N + 1);
  h.rates.lambda.resize(n);
  h.rates.mu.resize(n);
  h.rates.q_plus.resize(n);
  h.rates.q_minus.resize(n);
  for (Index i = 0; i < n; ++i) {
    const auto& r = cache[static_cast<std::size_t>(i)];
    h.rates.lambda[i] = r.lambda;
    h.rates.mu[i] = r.mu;
    h.rates.q_plus[i] = r.q_plus;
    h.rates.q_minus[i] = r.q_minus;
  }

  const Vector<double> w = detail::stationary_weights(h.rates);
  const double total = w.sum();
  if (!std::isfinite(total)) return h;

  // The neglected mass beyond N must sit far below the tolerance: the last
  // weights have to be decaying and tiny relative to the total.
  const Index tail_window = std::min<Index>(16, n - 1);
  double max_ratio = 0;
  for (Index i = n - tail_window; i < n; ++i) max_ratio = std::max(max_ratio, h.rates.lambda[i - 1] / h.rates.mu[i]);
  const double threshold = 1e-3 * std::min(tail_tol, 1e-6);
  if (max_ratio >= 1 || w[n - 1] / total > threshold * (1 - max_ratio)) return h;

  auto& s = h.summary;
  s.pi = w / total;
  s.P = detail::cumulative(s.pi);
  s.P_upper = detail::upper_tail(s.pi);

  const Vector<double> up = s.pi.cwiseProduct(h.rates.lambda);
  s.raw_rate = 2 * up.head(n - 1).sum();
  Vector<double> flow = Vector<double>::Zero(n);
  for (Index i = 0; i + 1 < n; ++i) flow[i] = up[i] * (h.rates.q_plus[i] + h.rates.q_minus[i + 1]);
  const Vector<double> before = detail::prefix_before(flow);
  const Vector<double> after = detail::upper_tail(flow);

  s.thinned_rate = before[n - 1];
  if (!(s.thinned_rate > 0)) throw Error(ErrorCode::AllThinningZero, "no counted transitions within the truncation horizon");
  s.partial_rates = up.cwiseProduct(h.rates.q_plus) + before;
  s.Lambda = s.partial_rates / s.thinned_rate;
  s.Lambda_upper.resize(n);
  for (Index k = 0; k + 1 < n; ++k) s.Lambda_upper[k] = (up[k] * h.rates.q_minus[k + 1] + after[k]) / s.thinned_rate;
  s.Lambda_upper[n - 1] = 0;
  s.counted_fraction = s.thinned_rate / s.raw_rate;
  h.adequate = true;
  return h;
}

double geometric_remainder(const std::vector<double>& R, std::size_t K, const std::optional<double>& hint) {
  const double last = std::abs(R[K]);
  if (last == 0) return 0;
  double ratio = std::numeric_limits<double>::infinity();
  if (hint) {
    ratio = *hint;
  } else if (K >= 10 && R[K - 10] != 0) {
    ratio = std::pow(last / std::abs(R[K - 10]), 0.1);
  }
  if (!(ratio < 1)) return std::numeric_limits<double>::infinity();
  return 2 * last / (1 - ratio);
}

}  // namespace

InfiniteDispersion dispersion_infinite(const InfiniteBDModel& model) {
  if (!model.rates) throw Error(ErrorCode::InvalidConfig, "infinite model has no rate function");
  const auto& policy = model.truncation;
  if (!(policy.tail_tol > 0) || policy.max_states < 128)
    throw Error(ErrorCode::InvalidConfig, "tail_tol must be positive and max_states at least 128");

  StateCache cache(model);
  std::size_t N = std::min<std::size_t>(policy.max_states - 1, 1023);
  for (;;) {
    cache.ensure(N + 1);
    const Horizon h = evaluate_horizon(cache, N, policy.tail_tol);
    if (h.adequate) {
      const auto& s = h.summary;
      std::vector<double> R;
      R.reserve(N);
      double sum = 0;
      for (std::size_t k = 0; k < N; ++k) {
        const auto kk = static_cast<Index>(k);
        R.push_back(r_term(h.rates, s, kk));
        const bool fired = s.P_upper[kk] < policy.tail_tol && std::abs(s.Lambda_upper[kk]) < policy.tail_tol &&
                           std::abs(R[k]) < policy.tail_tol * std::max(1.0, std::abs(sum));
        if (fired) {
          InfiniteDispersion out;
          out.D = 1 + 2 * sum;
          out.states_used = k;
          out.tail_bound = geometric_remainder(R, k, model.geometric_tail_ratio);
          out.horizon = N + 1;
          out.thinned_rate = s.thinned_rate;
          out.raw_rate = s.raw_rate;
          out.counted_fraction = s.counted_fraction;
          out.R = Eigen::Map<const Vector<double>>(R.data(), static_cast<Index>(k));
          return out;
        }
        sum += R[k];
      }
    }

    if (N + 1 >= policy.max_states) break;
    N = std::min(2 * N + 1, policy.max_states - 1);
  }

  // Weight ratio lambda_{i-1}/mu_i over the last 100 states.
  bool diverging = true;
  for (std::size_t i = N + 1 - 100; i <= N; ++i) {
    if (cache[i - 1].lambda / cache[i].mu < 1 - 1e-6) {
      diverging = false;
      break;
    }
  }
  if (diverging)
    throw Error(ErrorCode::StabilityCheckFailed, "product-form weights do not decay; the chain is not positive recurrent");
  throw Error(ErrorCode::TruncationNotConverged,
              "stopping rule did not fire within " + std::to_string(policy.max_states) + " states");
}

}  // namespace bdt
