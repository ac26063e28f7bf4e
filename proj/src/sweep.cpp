#include "bdt/sweep.hpp"

#include "bdt/dispersion.hpp"
#include "bdt/oracle.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

namespace bdt {
namespace {

double parse_double(const std::string& s, const char* what) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used == s.size()) return v;
  } catch (const std::exception&) {
  }
  throw Error(ErrorCode::ParseError, std::string("bad ") + what + " '" + s + "'");
}

unsigned thread_count(unsigned requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("BDT_THREADS")) {
    const int n = std::atoi(env);
    if (n > 0) return static_cast<unsigned>(n);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

const char* output_name(SweepOutput o) {
  switch (o) {
    case SweepOutput::closed_form: return "closed_form";
    case SweepOutput::oracle: return "oracle";
    case SweepOutput::simulation: return "simulation";
    case SweepOutput::breakdown: return "breakdown";
  }
  return "";
}

SweepRow evaluate(const SweepSpec& spec, double value) {
  ModelSpec ms = spec.model;
  ms.params[spec.variable] = value;
  const AnyModel any = build_model(ms);
  const auto& out = spec.outputs;

  SweepRow row;
  row.value = value;
  if (const auto* finite = std::get_if<BDModel>(&any)) {
    const auto s = rates_and_cdfs(*finite);
    row.lambda_bar = s.thinned_rate;
    row.varpi = s.counted_fraction;
    if (out.count(SweepOutput::closed_form) || out.count(SweepOutput::breakdown)) {
      const auto b = dispersion_closed_form(*finite);
      if (out.count(SweepOutput::closed_form)) row.D_closed = b.D;
      if (out.count(SweepOutput::breakdown)) row.R = b.R;
    }
    if (out.count(SweepOutput::oracle)) row.D_oracle = dispersion_renewal_reward(*finite);
    if (out.count(SweepOutput::simulation)) {
      const auto e = simulate(*finite, spec.sim);
      row.D_sim = e.D_hat;
      row.D_sim_stderr = e.std_err;
    }
  } else {
    auto model = std::get<InfiniteBDModel>(any);
    model.truncation = spec.truncation;
    const auto r = dispersion_infinite(model);
    row.lambda_bar = r.thinned_rate;
    row.varpi = r.counted_fraction;
    if (out.count(SweepOutput::closed_form)) row.D_closed = r.D;
    if (out.count(SweepOutput::breakdown)) row.R = r.R;
  }
  return row;
}

void check_spec(const SweepSpec& spec) {
  const ModelInfo& info = model_info(spec.model.name);
  const bool known = std::any_of(info.params.begin(), info.params.end(),
                                 [&](const ParamInfo& p) { return p.name == spec.variable; });
  if (!known) throw Error(ErrorCode::ParamOutOfRange, "'" + spec.variable + "' is not a parameter of " + info.name);
  if (spec.grid.points < 2) throw Error(ErrorCode::InvalidConfig, "a grid needs at least 2 points");
  if (spec.outputs.empty()) throw Error(ErrorCode::InvalidConfig, "no outputs requested");
  if (info.kind == ModelKind::infinite &&
      (spec.outputs.count(SweepOutput::oracle) || spec.outputs.count(SweepOutput::simulation)))
    throw Error(ErrorCode::InvalidConfig, "infinite models support only closed_form and breakdown");
  if (spec.outputs.count(SweepOutput::simulation)) {
    // Validates the method-specific fields; the model is checked per point.
    const SimConfig& c = spec.sim;
    if (c.method == SimMethod::regenerative ? c.cycles < 100 : (c.batch_count < 10 || !(c.horizon > 0)))
      throw Error(ErrorCode::InvalidConfig, "simulation settings out of range");
  }
}

}  // namespace

std::vector<double> Grid::values() const {
  std::vector<double> v(static_cast<std::size_t>(points));
  for (int i = 0; i < points; ++i) {
    const double t = static_cast<double>(i) / (points - 1);
    v[static_cast<std::size_t>(i)] = log ? std::exp(std::log(min) + t * (std::log(max) - std::log(min)))
                                         : min + t * (max - min);
  }
  v.front() = min;
  v.back() = max;
  return v;
}

Grid parse_grid(const std::string& text) {
  std::vector<std::string> parts;
  std::stringstream ss(text);
  for (std::string p; std::getline(ss, p, ':');) parts.push_back(p);
  if (parts.size() != 3 && parts.size() != 4) throw Error(ErrorCode::ParseError, "grid must be min:max:points[:log]");

  Grid g;
  g.min = parse_double(parts[0], "grid minimum");
  g.max = parse_double(parts[1], "grid maximum");
  const double points = parse_double(parts[2], "grid point count");
  if (points != std::floor(points) || points < 2 || points > 1e7)
    throw Error(ErrorCode::InvalidConfig, "grid point count must be an integer of at least 2");
  g.points = static_cast<int>(points);
  if (parts.size() == 4) {
    if (parts[3] != "log" && parts[3] != "linear") throw Error(ErrorCode::ParseError, "grid scale must be log or linear");
    g.log = parts[3] == "log";
  }
  if (!std::isfinite(g.min) || !std::isfinite(g.max) || !(g.min < g.max))
    throw Error(ErrorCode::InvalidConfig, "grid needs finite min < max");
  if (g.log && !(g.min > 0)) throw Error(ErrorCode::InvalidConfig, "log grid needs a positive minimum");
  return g;
}

std::set<SweepOutput> parse_outputs(const std::string& text) {
  std::set<SweepOutput> out;
  std::stringstream ss(text);
  for (std::string name; std::getline(ss, name, ',');) {
    if (name == "closed_form") out.insert(SweepOutput::closed_form);
    else if (name == "oracle") out.insert(SweepOutput::oracle);
    else if (name == "simulation") out.insert(SweepOutput::simulation);
    else if (name == "breakdown") out.insert(SweepOutput::breakdown);
    else throw Error(ErrorCode::ParseError, "unknown output '" + name + "'");
  }
  return out;
}

std::vector<SweepRow> run_sweep(const SweepSpec& spec, unsigned threads) {
  check_spec(spec);
  const auto values = spec.grid.values();
  const std::size_t n = values.size();
  std::vector<SweepRow> rows(n);
  std::vector<std::exception_ptr> errors(n);

  std::atomic<std::size_t> next{0};
  const auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        rows[i] = evaluate(spec, values[i]);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const unsigned t = std::min<unsigned>(thread_count(threads), static_cast<unsigned>(n));
  std::vector<std::thread> pool;
  for (unsigned k = 1; k < t; ++k) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();

  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
  return rows;
}

std::string format_number(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string sweep_csv(const std::vector<SweepRow>& rows) {
  const auto field = [](const std::optional<double>& v) { return v ? format_number(*v) : std::string(); };
  std::string csv = "sweep_value,D_closed,D_oracle,D_sim,D_sim_stderr,lambda_bar,varpi\n";
  for (const auto& r : rows) {
    csv += format_number(r.value) + ',' + field(r.D_closed) + ',' + field(r.D_oracle) + ',' + field(r.D_sim) + ',' +
           field(r.D_sim_stderr) + ',' + field(r.lambda_bar) + ',' + field(r.varpi) + '\n';
  }
  return csv;
}

std::string breakdown_csv(const std::vector<SweepRow>& rows) {
  std::string csv = "sweep_value,k,R_k\n";
  for (const auto& r : rows)
    for (Index k = 0; k < r.R.size(); ++k) csv += format_number(r.value) + ',' + std::to_string(k) + ',' + format_number(r.R[k]) + '\n';
  return csv;
}

void write_file_atomic(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw Error(ErrorCode::InvalidConfig, "cannot write " + tmp);
    f << content;
    f.flush();
    if (!f) throw Error(ErrorCode::InvalidConfig, "write to " + tmp + " failed");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw Error(ErrorCode::InvalidConfig, "cannot rename onto " + path);
  }
}

void write_sweep(const SweepSpec& spec, const std::vector<SweepRow>& rows, const std::string& out) {
  nlohmann::json meta;
  meta["model"] = spec.model.name;
  meta["fixed_params"] = spec.model.params;
  meta["sweep_var"] = spec.variable;
  meta["grid"] = {{"min", spec.grid.min}, {"max", spec.grid.max}, {"points", spec.grid.points},
                  {"scale", spec.grid.log ? "log" : "linear"}};
  std::vector<std::string> outputs;
  for (auto o : spec.outputs) outputs.push_back(output_name(o));
  meta["outputs"] = outputs;
  if (spec.outputs.count(SweepOutput::simulation)) {
    const auto& c = spec.sim;
    meta["simulation"] = {{"seed", c.seed},
                          {"method", c.method == SimMethod::regenerative ? "regen" : "batch"},
                          {"cycles", c.cycles},
                          {"horizon", c.horizon},
                          {"batches", c.batch_count}};
  }
  if (model_info(spec.model.name).kind == ModelKind::infinite)
    meta["truncation"] = {{"tail_tol", spec.truncation.tail_tol}, {"max_states", spec.truncation.max_states}};
  meta["columns"] = {"sweep_value", "D_closed", "D_oracle", "D_sim", "D_sim_stderr", "lambda_bar", "varpi"};

  write_file_atomic(out, sweep_csv(rows));
  if (spec.outputs.count(SweepOutput::breakdown)) write_file_atomic(out + ".breakdown.csv", breakdown_csv(rows));
  write_file_atomic(out + ".meta.json", meta.dump(2) + "\n");
}

}  // namespace bdt
