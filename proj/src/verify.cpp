#include "bdt/verify.hpp"

#include "bdt/dispersion.hpp"
#include "bdt/high_precision.hpp"
#include "bdt/models.hpp"
#include "bdt/oracle.hpp"
#include "bdt/random_model.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>

namespace bdt {
namespace {

std::string sci(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", x);
  return buf;
}

VerifyCheck check(std::string name, const std::function<VerifyCheck()>& body) {
  try {
    auto c = body();
    c.name = std::move(name);
    return c;
  } catch (const std::exception& e) {
    return {std::move(name), false, e.what()};
  }
}

/// max(|W W^-1 - I|, |W^-1 W - I|) evaluated in 100-digit arithmetic.
double inverse_defect(const BDModel& model) {
  const auto h = model.cast<HighPrecision>();
  const auto W = build_W(h);
  const auto inv = explicit_inverse(h);
  const Matrix<HighPrecision> I = Matrix<HighPrecision>::Identity(model.J(), model.J());
  const HighPrecision left = (W.left_product(inv) - I).cwiseAbs().maxCoeff();
  const HighPrecision right = (W.right_product(inv) - I).cwiseAbs().maxCoeff();
  return std::max(left, right).convert_to<double>();
}

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

}  // namespace

std::vector<VerifyCheck> run_verify(const VerifyOptions& options) {
  std::vector<VerifyCheck> out;

  out.push_back(check("explicit inverse identity", [&] {
    std::mt19937_64 rng(options.seed);
    RandomModelOptions ro{1, 100, 0.05, 20};
    double worst = 0;
    for (int n = 0; n < options.inverse_models; ++n) worst = std::max(worst, inverse_defect(random_model(rng, ro)));
    return VerifyCheck{"", worst < 1e-9, "max defect " + sci(worst) + " over " + std::to_string(options.inverse_models) + " models"};
  }));

  out.push_back(check("closed form vs renewal-reward", [&] {
    std::mt19937_64 rng(options.seed + 1);
    double worst = 0;
    for (int n = 0; n < options.equivalence_models; ++n) {
      const auto m = random_model(rng);
      const double D = dispersion_closed_form(m).D;
      worst = std::max(worst, rel(dispersion_renewal_reward(m), D));
    }
    return VerifyCheck{"", worst < 1e-9, "max rel diff " + sci(worst)};
  }));

  out.push_back(check("tridiagonal solve vs explicit inverse (100 digits)", [&] {
    std::mt19937_64 rng(options.seed + 2);
    double worst = 0;
    for (int n = 0; n < 100; ++n) {
      const auto m = random_model(rng);
      const double inv =
          dispersion_renewal_reward(m.cast<HighPrecision>(), SolvePath::explicit_inverse).convert_to<double>();
      worst = std::max(worst, rel(inv, dispersion_renewal_reward(m)));
    }
    return VerifyCheck{"", worst < 1e-9, "max rel diff " + sci(worst)};
  }));

  out.push_back(check("complete counting: births = deaths = closed form", [&] {
    std::mt19937_64 rng(options.seed + 3);
    double worst = 0;
    for (int n = 0; n < 100; ++n) {
      const auto m = random_model(rng);
      const double b = dispersion_complete_counting(m, CountingDirection::births);
      const double d = dispersion_complete_counting(m, CountingDirection::deaths);
      const double c = dispersion_closed_form(complete_counting_model(m, CountingDirection::deaths)).D;
      worst = std::max({worst, rel(b, d), rel(c, d)});
    }
    return VerifyCheck{"", worst < 1e-12, "max rel diff " + sci(worst)};
  }));

  out.push_back(check("M/M/1 busy cycles", [] {
    double worst = 0;
    for (double rho = 0.05; rho < 0.951; rho += 0.05) {
      auto m = mm1_busy_cycle(rho);
      m.truncation.tail_tol = 1e-12;
      worst = std::max(worst, std::abs(dispersion_infinite(m).D - (1 - 2 * rho * (1 - 2 * rho) / (1 - rho))));
    }
    auto m = mm1_busy_cycle((2 - std::sqrt(2.0)) / 2);
    m.truncation.tail_tol = 1e-12;
    const double at_min = std::abs(dispersion_infinite(m).D - (4 * std::sqrt(2.0) - 5));
    return VerifyCheck{"", worst < 1e-6 && at_min < 1e-6, "max abs diff " + sci(std::max(worst, at_min))};
  }));

  out.push_back(check("M/M/s output is Poisson", [] {
    double worst = 0;
    for (int s : {1, 5, 10})
      for (double rho : {0.3, 0.7, 0.95})
        for (double q : {1.0, 0.37}) {
          const auto r = dispersion_infinite(mms_output(s, rho, q));
          worst = std::max({worst, std::abs(r.D - 1), r.R.size() ? r.R.cwiseAbs().maxCoeff() : 0.0});
        }
    return VerifyCheck{"", worst < 1e-12, "max |D - 1|, |R_k| " + sci(worst)};
  }));

  out.push_back(check("two-sided thinning: 1 + harmonic mean", [] {
    double worst = 0;
    for (double qp : {0.1, 0.3, 0.5, 0.8, 1.0})
      for (double qm : {0.1, 0.3, 0.5, 0.8, 1.0})
        for (double rho : {0.2, 0.5, 0.8}) {
          const double D = dispersion_infinite(mm1_two_sided(rho, qp, qm)).D;
          worst = std::max(worst, std::abs(D - (1 + 2 * qp * qm / (qp + qm))));
        }
    return VerifyCheck{"", worst < 1e-8, "max abs diff " + sci(worst)};
  }));

  out.push_back(check("M/M/1/K balanced approaches 2/3", [] {
    double prev = 0;
    bool monotone = true;
    for (int K : {50, 100, 200, 500}) {
      const double D = dispersion_closed_form(mm1k(K, 1, 1)).D;
      monotone = monotone && std::abs(D - 2.0 / 3) < std::abs(prev - 2.0 / 3);
      prev = D;
    }
    return VerifyCheck{"", monotone && std::abs(prev - 2.0 / 3) < 0.01, "D(500) = " + sci(prev)};
  }));

  out.push_back(check("M/M/s/K+M minimum at balance", [] {
    double best = 1e300, arg = 0;
    for (int i = 0; i <= 80; ++i) {
      const double rho = 0.5 + i / 80.0;
      const double D = dispersion_closed_form(mmsk_reneging(20, 10, 10 * rho, 1, 0)).D;
      if (D < best) best = D, arg = rho;
    }
    return VerifyCheck{"", std::abs(arg - 1) <= 1.0 / 80 + 1e-12 && best < 1, "argmin rho " + sci(arg) + ", D " + sci(best)};
  }));

  out.push_back(check("billabong crosses 1", [] {
    bool ok = true;
    for (int J : {5, 10, 20}) {
      double lo = 1e300, hi = -1e300;
      for (int i = 0; i <= 40; ++i) {
        const double D = dispersion_closed_form(billabong(J, std::pow(10.0, -2 + i / 10.0), 1)).D;
        lo = std::min(lo, D), hi = std::max(hi, D);
      }
      ok = ok && lo < 1 && hi > 1;
    }
    return VerifyCheck{"", ok, "J in {5,10,20}, lambda in [1e-2,1e2]"};
  }));

  return out;
}

}  // namespace bdt
