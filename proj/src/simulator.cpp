#include "bdt/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>
#include <utility>

namespace bdt {
namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Uniform on [0,1) from the top 53 bits; the standard distributions are
/// not specified bit-for-bit across library versions.
double uniform(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

struct Jump {
  double hold;
  Index from;
  bool birth;
  bool counted;
};

/// The chain plus its random stream. Every jump draws exactly three
/// uniforms: holding time, direction, retention.
class Path {
 public:
  Path(const BDModel& model, std::mt19937_64 rng) : model_(model), rng_(std::move(rng)) {
    const Index n = model.lambda.size();
    rate_.resize(n);
    p_birth_.resize(n);
    for (Index i = 0; i < n; ++i) {
      rate_[i] = model.lambda[i] + model.mu[i];
      p_birth_[i] = model.lambda[i] / rate_[i];
    }
  }

  Index state = 0;

  Jump step() {
    const Index i = state;
    const double hold = -std::log(1.0 - uniform(rng_)) / rate_[i];
    const bool birth = uniform(rng_) < p_birth_[i];
    const double q = birth ? model_.q_plus[i] : model_.q_minus[i];
    const bool counted = uniform(rng_) < q;
    state = birth ? i + 1 : i - 1;
    return {hold, i, birth, counted};
  }

  Index draw_from(const Vector<double>& P) {
    const double u = uniform(rng_);
    const auto it = std::upper_bound(P.data(), P.data() + P.size(), u);
    return std::min<Index>(it - P.data(), P.size() - 1);
  }

  void start(const InitialState& initial) {
    switch (initial.kind) {
      case InitialState::Kind::zero: state = 0; break;
      case InitialState::Kind::fixed: state = initial.state; break;
      case InitialState::Kind::stationary: state = draw_from(stationary_distribution(model_).P); break;
    }
  }

  /// Runs until the chain leaves state 0; that jump is not reported.
  void burn_in() {
    for (;;) {
      const Jump j = step();
      if (j.from == 0) return;
    }
  }

 private:
  const BDModel& model_;
  std::mt19937_64 rng_;
  std::vector<double> rate_;
  std::vector<double> p_birth_;
};

/// Runs one cycle: from just after an exit from 0 through the next exit
/// from 0, inclusive. `on_jump` sees every jump of the cycle.
template <typename OnJump>
void run_cycle(Path& path, OnJump&& on_jump) {
  for (;;) {
    const Jump j = path.step();
    on_jump(j);
    if (j.from == 0) return;
  }
}

/// Sums over one contiguous group of cycles. Z = Y - c X with c the model's
/// thinned rate keeps the second moments free of cancellation.
struct CycleSums {
  double n = 0, X = 0, Y = 0, X2 = 0, XY = 0, Y2 = 0, Z2 = 0, ZX = 0;
  Vector<double> time;

  CycleSums& operator+=(const CycleSums& o) {
    n += o.n, X += o.X, Y += o.Y, X2 += o.X2, XY += o.XY, Y2 += o.Y2, Z2 += o.Z2, ZX += o.ZX;
    time += o.time;
    return *this;
  }
  CycleSums& operator-=(const CycleSums& o) {
    n -= o.n, X -= o.X, Y -= o.Y, X2 -= o.X2, XY -= o.XY, Y2 -= o.Y2, Z2 -= o.Z2, ZX -= o.ZX;
    time -= o.time;
    return *this;
  }
};

double cycle_dispersion(const CycleSums& s, double c) {
  const double mX = s.X / s.n;
  const double mY = s.Y / s.n;
  const double delta = (mY - c * mX) / mX;  // R - c
  return (s.Z2 / s.n - 2 * delta * s.ZX / s.n + delta * delta * s.X2 / s.n) / mY;
}

/// Jackknife standard error from leave-one-out values.
double jackknife_se(const std::vector<double>& loo) {
  const double G = static_cast<double>(loo.size());
  double mean = 0;
  for (double v : loo) mean += v;
  mean /= G;
  double ss = 0;
  for (double v : loo) ss += (v - mean) * (v - mean);
  return std::sqrt((G - 1) / G * ss);
}

void require(bool ok, const std::string& what) {
  if (!ok) throw Error(ErrorCode::InvalidConfig, what);
}

}  // namespace

std::mt19937_64 make_stream(std::uint64_t seed, std::uint64_t replication) {
  const std::uint64_t a = splitmix64(seed);
  const std::uint64_t b = splitmix64(a ^ splitmix64(replication + 0x632be59bd9b4e019ULL));
  std::seed_seq seq{static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(a >> 32), static_cast<std::uint32_t>(b),
                    static_cast<std::uint32_t>(b >> 32)};
  return std::mt19937_64(seq);
}

void validate(const SimConfig& config, const BDModel& model) {
  validate(model);
  if (config.initial.kind == InitialState::Kind::fixed)
    require(config.initial.state >= 0 && config.initial.state <= model.J(), "initial state outside 0..J");
  if (config.method == SimMethod::regenerative) {
    require(config.cycles >= 100, "cycles must be at least 100");
    require(config.replications >= 1 && config.replications <= config.cycles, "replications must lie in [1, cycles]");
  } else {
    require(config.batch_count >= 10, "batch_count must be at least 10");
    require(config.horizon > 0 && std::isfinite(config.horizon), "horizon must be positive and finite");
  }
}

struct CycleSampler::Impl {
  BDModel model;
  Path path;
  Impl(const BDModel& m, std::mt19937_64 rng) : model(m), path(model, std::move(rng)) {}
};

CycleSampler::CycleSampler(const BDModel& model, std::mt19937_64 rng, InitialState initial) {
  SimConfig config;
  config.initial = initial;
  validate(config, model);
  impl_ = std::make_unique<Impl>(model, std::move(rng));
  impl_->path.start(initial);
  impl_->path.burn_in();
}

CycleSampler::~CycleSampler() = default;

CycleTrace CycleSampler::next() {
  const Index n = impl_->model.lambda.size();
  CycleTrace t;
  t.births_from = Vector<double>::Zero(n);
  t.deaths_from = Vector<double>::Zero(n);
  run_cycle(impl_->path, [&](const Jump& j) {
    t.X += j.hold;
    t.Y += j.counted;
    (j.birth ? t.births_from : t.deaths_from)[j.from] += 1;
  });
  return t;
}

SimEstimate simulate_cycles(const BDModel& model, const SimConfig& config) {
  validate(config, model);
  require(config.method == SimMethod::regenerative, "simulate_cycles needs the regenerative method");
  const auto summary = rates_and_cdfs(model);
  const double c = summary.thinned_rate;
  const Index n_states = model.lambda.size();

  constexpr int kGroups = 50;
  std::vector<CycleSums> groups(kGroups);
  for (auto& g : groups) g.time = Vector<double>::Zero(n_states);

  const std::int64_t total = config.cycles;
  std::int64_t done = 0;
  Vector<double> time(n_states);
  for (int r = 0; r < config.replications; ++r) {
    const std::int64_t share = total / config.replications + (r < total % config.replications ? 1 : 0);
    Path path(model, make_stream(config.seed, static_cast<std::uint64_t>(r)));
    path.start(config.initial);
    path.burn_in();
    for (std::int64_t i = 0; i < share; ++i, ++done) {
      CycleSums& g = groups[static_cast<std::size_t>(done * kGroups / total)];
      double X = 0, Y = 0;
      run_cycle(path, [&](const Jump& j) {
        X += j.hold;
        Y += j.counted;
        g.time[j.from] += j.hold;
      });
      const double Z = Y - c * X;
      g.n += 1, g.X += X, g.Y += Y, g.X2 += X * X, g.XY += X * Y, g.Y2 += Y * Y, g.Z2 += Z * Z, g.ZX += Z * X;
    }
  }

  CycleSums all;
  all.time = Vector<double>::Zero(n_states);
  for (const auto& g : groups) all += g;
  if (!(all.Y > 0)) throw Error(ErrorCode::InvalidConfig, "no counted events in the simulated cycles");

  SimEstimate est;
  est.seed = config.seed;
  est.cycles_or_batches = total;
  est.D_hat = cycle_dispersion(all, c);
  est.mean_rate_hat = all.Y / all.X;
  est.raw_moments = CycleMoments{all.X / all.n, all.Y / all.n, all.X2 / all.n, all.XY / all.n, all.Y2 / all.n};
  est.occupancy = all.time / all.X;

  std::vector<double> loo_D, loo_rate;
  std::vector<Vector<double>> loo_occ;
  for (const auto& g : groups) {
    CycleSums rest = all;
    rest -= g;
    loo_D.push_back(cycle_dispersion(rest, c));
    loo_rate.push_back(rest.Y / rest.X);
    loo_occ.push_back(rest.time / rest.X);
  }
  est.std_err = jackknife_se(loo_D);
  est.rate_std_err = jackknife_se(loo_rate);
  est.occupancy_std_err.resize(n_states);
  for (Index s = 0; s < n_states; ++s) {
    std::vector<double> v;
    for (const auto& o : loo_occ) v.push_back(o[s]);
    est.occupancy_std_err[s] = jackknife_se(v);
  }
  return est;
}

namespace {

double batch_dispersion(const std::vector<double>& counts) {
  const double n = static_cast<double>(counts.size());
  double mean = 0;
  for (double x : counts) mean += x;
  mean /= n;
  double ss = 0;
  for (double x : counts) ss += (x - mean) * (x - mean);
  return ss / (n - 1) / mean;
}

}  // namespace

SimEstimate simulate_batches(const BDModel& model, const SimConfig& config) {
  validate(config, model);
  require(config.method == SimMethod::batch_means, "simulate_batches needs the batch_means method");
  const auto pi = stationary_distribution(model);
  const double cycle_mean = 1 / (pi.pi[0] * model.lambda[0]);
  const double T = config.horizon;
  const double warmup = std::max(0.05 * T, 10 * cycle_mean);
  require(warmup < T, "horizon too short for the warmup of " + std::to_string(warmup));

  const int B = config.batch_count;
  const double L = (T - warmup) / B;
  const Index n_states = model.lambda.size();
  std::vector<double> counts(static_cast<std::size_t>(B), 0.0);
  Matrix<double> occupancy = Matrix<double>::Zero(n_states, B);

  const auto batch_of = [&](double t) {
    return std::clamp(static_cast<int>(std::floor((t - warmup) / L)), 0, B - 1);
  };

  Path path(model, make_stream(config.seed, 0));
  path.start(config.initial);
  double t = 0;
  for (;;) {
    const Jump j = path.step();
    const double end = std::min(t + j.hold, T);

    // Split the holding interval over the batches it overlaps.
    double a = std::max(t, warmup);
    while (a < end) {
      const int b = batch_of(a);
      const double edge = b == B - 1 ? end : std::min(end, warmup + (b + 1) * L);
      occupancy(j.from, b) += edge - a;
      if (edge <= a) break;
      a = edge;
    }

    t += j.hold;
    if (t >= T) break;
    if (j.counted && t >= warmup) counts[static_cast<std::size_t>(batch_of(t))] += 1;
  }

  double total = 0;
  for (double x : counts) total += x;
  require(total > 0, "no counted events after warmup; increase the horizon");

  SimEstimate est;
  est.seed = config.seed;
  est.cycles_or_batches = B;
  est.warmup = warmup;
  est.D_hat = batch_dispersion(counts);

  const double mean = total / B;
  double ss = 0;
  for (double x : counts) ss += (x - mean) * (x - mean);
  est.mean_rate_hat = mean / L;
  est.rate_std_err = std::sqrt(ss / (B - 1) / B) / L;

  std::vector<double> loo;
  std::vector<double> rest;
  for (int b = 0; b < B; ++b) {
    rest.clear();
    for (int k = 0; k < B; ++k)
      if (k != b) rest.push_back(counts[static_cast<std::size_t>(k)]);
    loo.push_back(batch_dispersion(rest));
  }
  est.std_err = jackknife_se(loo);

  std::vector<double> merged;
  for (int b = 0; b + 1 < B; b += 2)
    merged.push_back(counts[static_cast<std::size_t>(b)] + counts[static_cast<std::size_t>(b + 1)]);
  est.bias_diagnostic = batch_dispersion(merged) - est.D_hat;

  const Matrix<double> frac = occupancy / L;
  est.occupancy = frac.rowwise().mean();
  est.occupancy_std_err.resize(n_states);
  for (Index s = 0; s < n_states; ++s) {
    const double m = est.occupancy[s];
    const double var = (frac.row(s).array() - m).square().sum() / (B - 1);
    est.occupancy_std_err[s] = std::sqrt(var / B);
  }
  return est;
}

SimEstimate simulate(const BDModel& model, const SimConfig& config) {
  return config.method == SimMethod::regenerative ? simulate_cycles(model, config) : simulate_batches(model, config);
}

}  // namespace bdt
