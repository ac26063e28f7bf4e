#pragma once

// Monte Carlo estimates of the dispersion index from simulated paths of the
// thinned chain: regenerative cycles between exits from state 0, or batch
// means over one long run.

#include "bdt/model.hpp"

#include <cstdint>
#include <memory>
#include <optional>
#include <random>

namespace bdt {

enum class SimMethod { regenerative, batch_means };

struct InitialState {
  enum class Kind { zero, stationary, fixed };
  Kind kind = Kind::zero;
  Index state = 0;  // used when kind == fixed
};

struct SimConfig {
  std::uint64_t seed = 1;
  SimMethod method = SimMethod::regenerative;
  std::int64_t cycles = 100'000;  // regenerative
  int replications = 1;           // regenerative: independent streams sharing the cycles
  double horizon = 1e5;           // batch means
  int batch_count = 100;          // batch means
  InitialState initial;
};

struct CycleMoments {
  double X = 0, Y = 0, X2 = 0, XY = 0, Y2 = 0;
};

struct SimEstimate {
  double D_hat = 0;
  double std_err = 0;
  double mean_rate_hat = 0;
  double rate_std_err = 0;
  std::int64_t cycles_or_batches = 0;
  std::optional<CycleMoments> raw_moments;  // regenerative only
  Vector<double> occupancy;                 // long-run fraction of time in each state
  Vector<double> occupancy_std_err;
  double warmup = 0;           // batch means: discarded initial time
  double bias_diagnostic = 0;  // batch means: D from doubled batches minus D_hat
  std::uint64_t seed = 0;
};

/// Throws InvalidConfig when the configuration does not fit the model or
/// the method.
void validate(const SimConfig& config, const BDModel& model);

SimEstimate simulate_cycles(const BDModel& model, const SimConfig& config);
SimEstimate simulate_batches(const BDModel& model, const SimConfig& config);

/// Dispatches on config.method.
SimEstimate simulate(const BDModel& model, const SimConfig& config);

/// Independent generator for replication `replication` of `seed`.
std::mt19937_64 make_stream(std::uint64_t seed, std::uint64_t replication);

/// Per-state jump counts of a single regeneration cycle.
struct CycleTrace {
  double X = 0;
  double Y = 0;
  Vector<double> births_from;  // births leaving state j
  Vector<double> deaths_from;  // deaths leaving state j
};

/// Steps one path cycle by cycle. The path starts in `initial` and is run up
/// to the first exit from 0 before the first cycle is returned.
class CycleSampler {
 public:
  CycleSampler(const BDModel& model, std::mt19937_64 rng, InitialState initial = {});
  ~CycleSampler();

  CycleTrace next();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace bdt
