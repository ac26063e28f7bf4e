#include "bdt/dispersion.hpp"
#include "bdt/models.hpp"
#include "helpers.hpp"

#include <random>

using namespace bdt;

TEST_CASE("M/M/s/K+M construction") {
  const auto m0 = mmsk_reneging(6, 2, 1.5, 1, 0);
  for (Index i = 1; i <= 6; ++i) CHECK(m0.q_minus[i] == 1);
  CHECK(m0.q_minus[0] == 0);
  CHECK((m0.q_plus.array() == 0).all());

  const double gamma = 0.7, mu = 1.3;
  const auto m = mmsk_reneging(8, 3, 2, mu, gamma);
  for (Index i = 1; i <= 8; ++i) {
    const double service = mu * std::min<Index>(i, 3);
    CHECK(m.mu[i] == doctest::Approx(service + gamma * std::max<Index>(i - 3, 0)));
    CHECK(m.q_minus[i] * m.mu[i] + (1 - m.q_minus[i]) * m.mu[i] == doctest::Approx(m.mu[i]));
    CHECK(1 - m.q_minus[i] == doctest::Approx(gamma * std::max<Index>(i - 3, 0) / m.mu[i]).epsilon(1e-14));
  }
  CHECK(m.lambda[8] == 0);

  CHECK_CODE(mmsk_reneging(0, 1, 1, 1, 0), ErrorCode::ParamOutOfRange);
  CHECK_CODE(mmsk_reneging(5, 6, 1, 1, 0), ErrorCode::ParamOutOfRange);
  CHECK_CODE(mmsk_reneging(5, 2, 1, 1, -1), ErrorCode::ParamOutOfRange);
  CHECK_CODE(mmsk_reneging(5, 2, 0, 1, 0), ErrorCode::ParamOutOfRange);
}

TEST_CASE("billabong construction") {
  const auto m = billabong(4, 0.5, 2);
  CHECK(m.q_plus[0] == 0);
  CHECK(m.q_plus[3] == doctest::Approx(0.75));
  CHECK(m.q_plus[4] == 0);
  CHECK(m.lambda[1] == doctest::Approx(1.5));
  CHECK(m.mu[3] == doctest::Approx(6));
  CHECK((m.q_minus.array() == 0).all());
  CHECK_CODE(billabong(1, 1, 1), ErrorCode::ParamOutOfRange);
}

TEST_CASE("constructors produce valid models over random legal parameters") {
  std::mt19937_64 rng(40);
  std::uniform_int_distribution<int> size(1, 40);
  std::uniform_real_distribution<double> u(0, 1);
  const auto rate = [&] { return std::exp(-3 + 6 * u(rng)); };
  for (int n = 0; n < 200; ++n) {
    const int K = size(rng);
    const int s = std::uniform_int_distribution<int>(1, K)(rng);
    CHECK_NOTHROW(validate(mmsk_reneging(K, s, rate(), rate(), u(rng) < 0.3 ? 0.0 : rate())));
    CHECK_NOTHROW(validate(billabong(K + 1, rate(), rate())));
    CHECK_NOTHROW(validate(mm1k(K, rate(), rate())));
  }
}

TEST_CASE("infinite constructors") {
  const auto b = mm1_busy_cycle(0.4);
  CHECK(b.geometric_tail_ratio == doctest::Approx(0.4));
  CHECK(b.rates(0).mu == 0);
  CHECK(b.rates(1).q_minus == 1);
  CHECK(b.rates(2).q_minus == 0);
  CHECK_CODE(mm1_busy_cycle(1), ErrorCode::ParamOutOfRange);

  const auto s = mms_output(3, 0.5, 0.2);
  CHECK(s.rates(7).lambda == doctest::Approx(1.5));
  CHECK(s.rates(2).mu == 2);
  CHECK(s.rates(7).mu == 3);
  CHECK_CODE(mms_output(3, 0.5, 0), ErrorCode::ParamOutOfRange);
  CHECK_CODE(mm1_two_sided(0.5, 1.5, 0.5), ErrorCode::ParamOutOfRange);
}

TEST_CASE("busy-cycle stationary tail is geometric") {
  // pi_k = (1 - rho) rho^k follows from the generated rates.
  const double rho = 0.35;
  const auto m = mm1_busy_cycle(rho);
  double w = 1, total = 0;
  std::vector<double> weights;
  for (std::size_t i = 0; i < 200; ++i) {
    if (i > 0) w *= m.rates(i - 1).lambda / m.rates(i).mu;
    weights.push_back(w);
    total += w;
  }
  for (std::size_t k = 0; k < 20; ++k) CHECK(weights[k] / total == doctest::Approx((1 - rho) * std::pow(rho, k)));
}

TEST_CASE("registry") {
  const auto any = build_model({"mmsk_reneging", {{"K", 20}, {"s", 10}, {"rho", 1.0}}});
  const auto& m = std::get<BDModel>(any);
  CHECK(m.lambda[0] == doctest::Approx(10));
  CHECK(m.mu[11] == doctest::Approx(10));

  CHECK(std::holds_alternative<InfiniteBDModel>(build_model({"mms_output", {{"s", 2}, {"rho", 0.5}}})));
  CHECK_CODE(build_model({"mm1k", {{"K", 2.5}, {"lambda", 1}}}), ErrorCode::ParamOutOfRange);
  CHECK_CODE(build_model({"mm1k", {{"K", 2}}}), ErrorCode::ParamOutOfRange);
  CHECK_CODE(build_model({"mm1k", {{"K", 2}, {"lambda", 1}, {"zeta", 1}}}), ErrorCode::ParamOutOfRange);
  CHECK_CODE(build_model({"mmsk_reneging", {{"K", 2}, {"s", 1}, {"lambda", 1}, {"rho", 1}}}), ErrorCode::ParamOutOfRange);
  CHECK_CODE(build_model({"nothing", {}}), ErrorCode::ParamOutOfRange);
  for (const auto& info : model_catalog()) CHECK(model_info(info.name).name == info.name);
}

TEST_CASE("sweep curve shapes") {
  // M/M/s/K+M: minimum at balance without abandonment.
  double best = 1e300, arg = 0;
  for (int i = 0; i <= 80; ++i) {
    const double rho = 0.5 + i / 80.0;
    const double D = dispersion_closed_form(mmsk_reneging(20, 10, 10 * rho, 1, 0)).D;
    if (D < best) best = D, arg = rho;
  }
  CHECK(arg == doctest::Approx(1.0));
  CHECK(best < 1);

  // Billabong: both sides of 1, and rising towards 1 for large lambda.
  double lo = 1e300, hi = 0, prev = 0;
  bool rising_tail = true;
  for (int i = 0; i <= 40; ++i) {
    const double lambda = std::pow(10.0, -2 + i / 10.0);
    const double D = dispersion_closed_form(billabong(10, lambda, 1)).D;
    lo = std::min(lo, D), hi = std::max(hi, D);
    if (lambda > 10 && D <= prev) rising_tail = false;
    prev = D;
  }
  CHECK(lo < 1);
  CHECK(hi > 1);
  CHECK(rising_tail);
  CHECK(prev < 1);
}
