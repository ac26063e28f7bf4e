#include "bdt/dispersion.hpp"
#include "bdt/models.hpp"
#include "bdt/oracle.hpp"
#include "bdt/random_model.hpp"
#include "helpers.hpp"
#include "oracles.hpp"

using namespace bdt;

TEST_CASE("closed form small cases") {
  // Deaths of a two-state chain form an Erlang-2 renewal process: SCV 1/2.
  CHECK(dispersion_closed_form(make({1, 0}, {0, 1}, {0, 0}, {0, 1})).D == doctest::Approx(0.5).epsilon(1e-14));

  const auto all = dispersion_closed_form(make({1, 0}, {0, 1}, {1, 0}, {0, 1}));
  CHECK(all.D == doctest::Approx(1).epsilon(1e-14));
  CHECK(std::abs(all.R[0]) < 1e-15);
  CHECK(all.R.size() == 1);
}

TEST_CASE("closed form against the dense MAP variance") {
  std::mt19937_64 rng(10);
  for (int n = 0; n < 100; ++n) {
    const auto m = random_model(rng, {1, 15});
    const auto b = dispersion_closed_form(m);
    CHECK(rel_err(b.D, oracle::map_dispersion(m)) < 1e-8);
    CHECK(b.D > 0);
    CHECK(b.D == doctest::Approx(1 + 2 * b.R.sum()).epsilon(1e-15));
  }
}

TEST_CASE("closed form against the renewal-reward oracle") {
  std::mt19937_64 rng(11);
  for (int n = 0; n < 200; ++n) {
    const auto m = random_model(rng, {25, 25});
    CHECK(rel_err(dispersion_closed_form(m).D, dispersion_renewal_reward(m)) < 1e-9);
  }
}

TEST_CASE("rescaling leaves D unchanged") {
  std::mt19937_64 rng(12);
  for (int n = 0; n < 50; ++n) {
    auto m = random_model(rng);
    const double D = dispersion_closed_form(m).D;
    m.lambda *= 7.25;
    m.mu *= 7.25;
    CHECK(rel_err(dispersion_closed_form(m).D, D) < 1e-12);
  }
}

TEST_CASE("complete counting") {
  CHECK(dispersion_complete_counting(make({1, 0}, {0, 1}, {0, 0}, {0, 1}), CountingDirection::deaths) ==
        doctest::Approx(0.5).epsilon(1e-14));

  std::mt19937_64 rng(13);
  for (int n = 0; n < 100; ++n) {
    const auto m = random_model(rng);
    const double births = dispersion_complete_counting(m, CountingDirection::births);
    const double deaths = dispersion_complete_counting(m, CountingDirection::deaths);
    CHECK(rel_err(births, deaths) < 1e-12);
    for (auto dir : {CountingDirection::births, CountingDirection::deaths})
      CHECK(rel_err(dispersion_closed_form(complete_counting_model(m, dir)).D, deaths) < 1e-12);
  }

  CHECK(std::abs(dispersion_complete_counting(mm1k(500, 1, 1), CountingDirection::deaths) - 2.0 / 3) < 0.01);
}

TEST_CASE("M/M/1/K: 1/2 at K=1, near 1 away from balance") {
  CHECK(dispersion_closed_form(mm1k(1, 1, 1)).D == doctest::Approx(0.5).epsilon(1e-14));
  const auto gap = [](double lambda) { return std::abs(dispersion_closed_form(mm1k(50, lambda, 1)).D - 1); };
  CHECK(gap(0.9) > gap(0.8));
  CHECK(gap(0.8) > gap(0.7));
  CHECK(gap(1.1) > gap(1.25));
  CHECK(gap(0.5) < 1e-6);
  CHECK(gap(2.0) < 1e-6);
}
