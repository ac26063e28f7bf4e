// Acceptance criteria 1-12. One line per criterion; exit status 1 if any
// criterion fails.

#include "bdt/cli.hpp"
#include "bdt/dispersion.hpp"
#include "bdt/high_precision.hpp"
#include "bdt/models.hpp"
#include "bdt/oracle.hpp"
#include "bdt/random_model.hpp"
#include "bdt/simulator.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

using namespace bdt;
using HP = HighPrecision;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, x);
  return buf;
}

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// 1 -------------------------------------------------------------------------
template <typename Scalar>
Scalar inf_norm(const Matrix<Scalar>& A) {
  return A.cwiseAbs().rowwise().sum().maxCoeff();
}

Outcome inverse_identity() {
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(101);
  const RandomModelOptions opt{1, 100, 0.05, 20};
  int pass = 0, pass_double = 0;
  double worst = 0;
  for (int n = 0; n < 200; ++n) {
    const auto m = random_model(rng, opt);
    const Index J = m.J();

    const auto h = m.cast<HP>();
    const auto W = build_W(h);
    const auto inv = explicit_inverse(h);
    const Matrix<HP> I = Matrix<HP>::Identity(J, J);
    const double e = std::max(inf_norm<HP>(W.left_product(inv) - I), inf_norm<HP>(W.right_product(inv) - I))
                         .convert_to<double>();
    worst = std::max(worst, e);
    pass += e < 1e-9;

    const auto Wd = build_W(m);
    const auto invd = explicit_inverse(m);
    const Matrix<double> Id = Matrix<double>::Identity(J, J);
    const double ed = std::max(inf_norm<double>(Wd.left_product(invd) - Id), inf_norm<double>(Wd.right_product(invd) - Id));
    pass_double += ed < 1e-9;
  }
  const double t = seconds_since(t0);
  return {pass == 200 && t < 30,
          std::to_string(pass) + "/200 in 100-digit arithmetic, worst " + fmt("%.2g", worst) + "; double " +
              std::to_string(pass_double) + "/200; " + fmt("%.1f s", t)};
}

// 2 -------------------------------------------------------------------------
Outcome closed_vs_oracle() {
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(102);
  RandomModelOptions opt;
  opt.zero_q_fraction = 0.4;
  double worst = 0;
  int pass = 0;
  for (int n = 0; n < 500; ++n) {
    const auto m = random_model(rng, opt);
    const double D = dispersion_closed_form(m).D;
    const double e = rel(D, dispersion_renewal_reward(m));
    worst = std::max(worst, e);
    pass += e < 1e-9;
  }
  const double t = seconds_since(t0);
  return {pass == 500 && t < 60, std::to_string(pass) + "/500, worst rel diff " + fmt("%.2g", worst) + "; " + fmt("%.2f s", t)};
}

// 3 -------------------------------------------------------------------------
/// 1 + 2 lbar sum_k (P_k - L-_k)(P_k - L+_k) / (pi_k lambda_k), summed
/// directly in 100 digits.
double counting_direct(const BDModel& m) {
  const auto h = m.cast<HP>();
  const Index J = m.J();
  std::vector<HP> w(J + 1);
  w[0] = 1;
  for (Index i = 1; i <= J; ++i) w[i] = w[i - 1] * h.lambda[i - 1] / h.mu[i];
  HP total = 0, flow = 0;
  for (Index i = 0; i <= J; ++i) total += w[i];
  for (Index i = 0; i <= J; ++i) flow += w[i] / total * h.lambda[i];

  HP P = 0, L = 0, acc = 0;
  for (Index k = 0; k < J; ++k) {
    const HP pi = w[k] / total;
    P += pi;
    const HP L_minus = L;
    L += pi * h.lambda[k] / flow;
    acc += (P - L_minus) * (P - L) / (pi * h.lambda[k]);
  }
  return (1 + 2 * flow * acc).convert_to<double>();
}

Outcome complete_counting() {
  std::mt19937_64 rng(103);
  double worst_dir = 0, worst_direct = 0;
  for (int n = 0; n < 100; ++n) {
    const auto m = random_model(rng);
    const double births = dispersion_complete_counting(m, CountingDirection::births);
    const double deaths = dispersion_complete_counting(m, CountingDirection::deaths);
    const double direct = counting_direct(m);
    worst_dir = std::max(worst_dir, rel(births, deaths));
    worst_direct = std::max({worst_direct, rel(births, direct), rel(deaths, direct)});
  }
  return {worst_dir < 1e-12 && worst_direct < 1e-12,
          "births vs deaths " + fmt("%.2g", worst_dir) + ", vs direct sum " + fmt("%.2g", worst_direct)};
}

// 4 -------------------------------------------------------------------------
double busy_cycle_D(double rho) {
  auto m = mm1_busy_cycle(rho);
  m.truncation.tail_tol = 1e-12;
  return dispersion_infinite(m).D;
}

Outcome busy_cycles() {
  const double half = std::abs(busy_cycle_D(0.5) - 1);
  const double rho_min = (2 - std::sqrt(2.0)) / 2;
  const double at_min = std::abs(busy_cycle_D(rho_min) - (4 * std::sqrt(2.0) - 5));
  double worst = 0;
  for (int i = 0; i < 50; ++i) {
    const double rho = 0.05 + 0.9 * (i + 0.5) / 50;
    worst = std::max(worst, std::abs(busy_cycle_D(rho) - (1 - 2 * rho * (1 - 2 * rho) / (1 - rho))));
  }
  return {half < 1e-8 && at_min < 1e-6 && worst < 1e-6,
          "|D(1/2)-1| " + fmt("%.2g", half) + ", at minimizer " + fmt("%.2g", at_min) + ", grid " + fmt("%.2g", worst)};
}

// 5 -------------------------------------------------------------------------
Outcome mms_poisson() {
  double worst_R = 0, worst_D = 0;
  for (int s : {1, 5, 10})
    for (double rho : {0.3, 0.7, 0.95}) {
      const auto r = dispersion_infinite(mms_output(s, rho, 1.0));
      worst_R = std::max(worst_R, r.R.cwiseAbs().maxCoeff());
      worst_D = std::max(worst_D, std::abs(r.D - 1));
    }
  return {worst_R < 1e-14 && worst_D < 1e-12, "max |R_k| " + fmt("%.2g", worst_R) + ", max |D-1| " + fmt("%.2g", worst_D)};
}

// 6 -------------------------------------------------------------------------
Outcome two_sided() {
  const double qs[] = {0.1, 0.3, 0.5, 0.7, 1.0};
  double worst = 0, worst_equal = 0;
  for (double qp : qs)
    for (double qm : qs)
      for (double rho : {0.2, 0.5, 0.8}) {
        const double D = dispersion_infinite(mm1_two_sided(rho, qp, qm)).D;
        worst = std::max(worst, std::abs(D - (1 + 2 * qp * qm / (qp + qm))));
        if (qp == qm) worst_equal = std::max(worst_equal, std::abs(D - (1 + qp)));
      }
  return {worst < 1e-8 && worst_equal < 1e-8,
          "75 points max |err| " + fmt("%.2g", worst) + ", q+=q- vs 1+q " + fmt("%.2g", worst_equal)};
}

// 7 -------------------------------------------------------------------------
Outcome balanced_limit() {
  std::string detail;
  double prev_gap = 1e300;
  bool monotone = true;
  double D500 = 0;
  for (int K : {50, 100, 200, 500}) {
    const double D = dispersion_closed_form(mm1k(K, 1, 1)).D;
    const double gap = std::abs(D - 2.0 / 3);
    monotone = monotone && gap < prev_gap;
    prev_gap = gap;
    D500 = D;
    detail += "K=" + std::to_string(K) + ": " + fmt("%.5f", D) + " ";
  }
  return {monotone && std::abs(D500 - 2.0 / 3) < 0.01, detail + (monotone ? "(monotone)" : "(not monotone)")};
}

// 8 -------------------------------------------------------------------------
Outcome reneging_minimizer() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto argmin = [](double gamma, double* min_D) {
    double best = 1e300, arg = 0;
    for (int i = 0; i <= 80; ++i) {
      const double rho = 0.5 + i / 80.0;
      const double D = dispersion_closed_form(mmsk_reneging(20, 10, 10 * rho, 1, gamma)).D;
      if (D < best) best = D, arg = rho;
    }
    if (min_D) *min_D = best;
    return arg;
  };
  double min0 = 0;
  const double a0 = argmin(0, &min0);
  const double D1 = dispersion_closed_form(mmsk_reneging(20, 10, 10, 1, 0)).D;
  const double a05 = argmin(0.5, nullptr), a2 = argmin(2, nullptr);
  const double t = seconds_since(t0);
  const bool ok = std::abs(a0 - 1) <= 1.0 / 80 + 1e-12 && D1 < 1 && a05 >= 0.9 && a05 <= 1.1 && a2 >= 0.9 && a2 <= 1.1 && t < 10;
  return {ok, "argmin rho: gamma=0 " + fmt("%.4g", a0) + " (D(1)=" + fmt("%.4f", D1) + "), gamma=0.5 " + fmt("%.4g", a05) +
                  ", gamma=2 " + fmt("%.4g", a2) + "; " + fmt("%.2f s", t)};
}

// 9 -------------------------------------------------------------------------
Outcome billabong_crossing() {
  bool ok = true;
  std::string detail;
  for (int J : {5, 10, 20}) {
    double lo = 1e300, hi = -1e300;
    for (int i = 0; i <= 40; ++i) {
      const double D = dispersion_closed_form(billabong(J, std::pow(10.0, -2 + i / 10.0), 1)).D;
      lo = std::min(lo, D), hi = std::max(hi, D);
    }
    ok = ok && lo < 1 && hi > 1;
    detail += "J=" + std::to_string(J) + " [" + fmt("%.3f", lo) + ", " + fmt("%.3f", hi) + "] ";
  }
  return {ok, detail};
}

// 10 ------------------------------------------------------------------------
Outcome monte_carlo() {
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(110);
  const std::vector<std::pair<std::string, BDModel>> models = {
      {"erlang", BDModel{Vector<double>{{1, 0}}, Vector<double>{{0, 1}}, Vector<double>{{0, 0}}, Vector<double>{{0, 1}}}},
      {"mm1/5", mm1k(5, 1, 1)},
      {"mm3/10+M", mmsk_reneging(10, 3, 2, 1, 1)},
      {"billabong10", billabong(10, 0.5, 1)},
      {"random", random_model(rng, {8, 8, 0.5, 2})},
  };

  bool ok = true;
  std::string detail;
  for (std::size_t i = 0; i < models.size(); ++i) {
    const auto& [name, m] = models[i];
    const double D = dispersion_closed_form(m).D;

    SimConfig r;
    r.seed = 1000 + i;
    r.cycles = 1'000'000;
    const auto reg = simulate_cycles(m, r);

    SimConfig b;
    b.seed = 2000 + i;
    b.method = SimMethod::batch_means;
    b.batch_count = 1000;
    b.horizon = 1e6 / (stationary_distribution(m).pi[0] * m.lambda[0]);
    const auto bat = simulate_batches(m, b);

    const double z_reg = (reg.D_hat - D) / reg.std_err;
    const double z_pair = (bat.D_hat - reg.D_hat) / std::hypot(bat.std_err, reg.std_err);
    ok = ok && std::abs(z_reg) < 3 && std::abs(z_pair) < 3;
    detail += name + " z=" + fmt("%+.2f", z_reg) + "/" + fmt("%+.2f", z_pair) + " ";
  }
  const double t = seconds_since(t0);
  return {ok && t < 300, detail + fmt("%.1f s", t)};
}

// 11 ------------------------------------------------------------------------
Outcome initial_condition() {
  const auto m = mmsk_reneging(10, 3, 2, 1, 1);
  SimConfig zero;
  zero.method = SimMethod::batch_means;
  zero.horizon = 1e6;
  zero.batch_count = 200;
  zero.seed = 111;
  SimConfig stat = zero;
  stat.seed = 112;
  stat.initial.kind = InitialState::Kind::stationary;
  const auto a = simulate_batches(m, zero), b = simulate_batches(m, stat);
  const double z = (a.D_hat - b.D_hat) / std::hypot(a.std_err, b.std_err);
  return {std::abs(z) < 3, "zero " + fmt("%.4f", a.D_hat) + ", stationary " + fmt("%.4f", b.D_hat) + ", z=" + fmt("%+.2f", z)};
}

// 12 ------------------------------------------------------------------------
std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome determinism() {
  const auto dir = std::filesystem::temp_directory_path();
  std::vector<std::string> files;
  std::ostringstream sink;
  for (const char* threads : {"1", "1", "3"}) {
    setenv("BDT_THREADS", threads, 1);
    const std::string out = (dir / ("bdt_acceptance_" + std::to_string(files.size()) + ".csv")).string();
    const int code = run_cli({"sweep", "--model", "billabong", "--param", "J=5", "mu=1", "--sweep-var", "lambda", "--grid",
                              "0.1:2:6", "--outputs", "closed_form,oracle,simulation", "--cycles", "5000", "--seed", "42",
                              "--out", out},
                             sink, sink);
    if (code != 0) return {false, "sweep exited with " + std::to_string(code)};
    files.push_back(slurp(out));
  }
  unsetenv("BDT_THREADS");
  const bool same = files[0] == files[1] && files[1] == files[2] && !files[0].empty();
  return {same, same ? "3 runs (1, 1 and 3 threads) byte-identical" : "CSV outputs differ"};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"explicit inverse identity", inverse_identity},
      {"closed form vs renewal-reward oracle", closed_vs_oracle},
      {"complete counting: births = deaths = direct sum", complete_counting},
      {"M/M/1 busy cycles", busy_cycles},
      {"M/M/s complete death counting is Poisson", mms_poisson},
      {"two-sided constant thinning", two_sided},
      {"M/M/1/K balanced tends to 2/3", balanced_limit},
      {"M/M/s/K+M minimizer", reneging_minimizer},
      {"billabong crosses 1", billabong_crossing},
      {"Monte Carlo consistency", monte_carlo},
      {"initial-condition independence", initial_condition},
      {"determinism of sweep CSV", determinism},
  };

  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += !o.pass;
    std::printf("%s  %2zu  %-48s %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(), o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%zu/%zu criteria passed\n", criteria.size() - failed, criteria.size());
  return failed ? 1 : 0;
}
