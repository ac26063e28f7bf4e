#pragma once

// Parameter sweeps over a named model: one row per grid point, computed in
// parallel and emitted in grid order.

#include "bdt/infinite.hpp"
#include "bdt/models.hpp"
#include "bdt/simulator.hpp"

#include <optional>
#include <set>
#include <string>
#include <vector>

namespace bdt {

struct Grid {
  double min = 0;
  double max = 1;
  int points = 2;
  bool log = false;

  std::vector<double> values() const;
};

/// "min:max:points" or "min:max:points:log".
Grid parse_grid(const std::string& text);

enum class SweepOutput { closed_form, oracle, simulation, breakdown };

/// Comma-separated names from {closed_form, oracle, simulation, breakdown}.
std::set<SweepOutput> parse_outputs(const std::string& text);

struct SweepSpec {
  ModelSpec model;  // fixed parameters; the swept one is overwritten per point
  std::string variable;
  Grid grid;
  std::set<SweepOutput> outputs{SweepOutput::closed_form};
  SimConfig sim;  // the same seed at every point, so neighbouring points share random numbers
  TruncationPolicy truncation;
};

struct SweepRow {
  double value = 0;
  std::optional<double> D_closed, D_oracle, D_sim, D_sim_stderr, lambda_bar, varpi;
  Vector<double> R;  // filled when the breakdown is requested
};

/// Throws on an illegal spec before any work starts, and otherwise rethrows
/// the failure of the lowest failing grid index. `threads` = 0 means
/// BDT_THREADS, else the hardware concurrency.
std::vector<SweepRow> run_sweep(const SweepSpec& spec, unsigned threads = 0);

std::string format_number(double x);
std::string sweep_csv(const std::vector<SweepRow>& rows);
std::string breakdown_csv(const std::vector<SweepRow>& rows);

/// Writes `content` to a sibling temporary file and renames it over `path`.
void write_file_atomic(const std::string& path, const std::string& content);

/// Writes <out>, <out>.breakdown.csv when requested, and <out>.meta.json.
void write_sweep(const SweepSpec& spec, const std::vector<SweepRow>& rows, const std::string& out);

}  // namespace bdt
