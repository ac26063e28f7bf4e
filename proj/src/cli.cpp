#include "bdt/cli.hpp"

#include "bdt/dispersion.hpp"
#include "bdt/model_json.hpp"
#include "bdt/models.hpp"
#include "bdt/oracle.hpp"
#include "bdt/simulator.hpp"
#include "bdt/sweep.hpp"
#include "bdt/verify.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <iomanip>
#include <map>
#include <ostream>
#include <utility>

namespace bdt {
namespace {

using nlohmann::json;

struct Options {
  std::string model;
  std::string file;
  std::vector<std::string> params;
  std::string format = "text";
  std::string out;
  bool breakdown = false;

  std::uint64_t seed = 1;
  std::string method = "regen";
  std::int64_t cycles = 100'000;
  int replications = 1;
  double horizon = 1e5;
  int batches = 100;
  std::string initial = "zero";

  double tail_tol = 1e-10;
  std::size_t max_states = 1'000'000;

  std::string sweep_var;
  std::string grid;
  std::string outputs = "closed_form";

  int inverse_models = 200;
  int equivalence_models = 500;
};

std::map<std::string, double> parse_params(const std::vector<std::string>& items) {
  std::map<std::string, double> params;
  for (const auto& item : items) {
    const auto eq = item.find('=');
    if (eq == std::string::npos || eq == 0) throw Error(ErrorCode::ParseError, "--param expects k=v, got '" + item + "'");
    const std::string key = item.substr(0, eq), value = item.substr(eq + 1);
    try {
      std::size_t used = 0;
      params[key] = std::stod(value, &used);
      if (used != value.size()) throw std::invalid_argument(value);
    } catch (const std::exception&) {
      throw Error(ErrorCode::ParseError, "parameter " + key + " is not a number: '" + value + "'");
    }
  }
  return params;
}

AnyModel load_source(const Options& o) {
  if (o.model.empty() == o.file.empty()) throw Error(ErrorCode::InvalidConfig, "give exactly one of --model or --file");
  if (!o.file.empty()) {
    if (!o.params.empty()) throw Error(ErrorCode::InvalidConfig, "--param applies to --model only");
    return load_model(o.file);
  }
  AnyModel m = build_model({o.model, parse_params(o.params)});
  if (auto* inf = std::get_if<InfiniteBDModel>(&m)) inf->truncation = {o.tail_tol, o.max_states};
  return m;
}

SimConfig sim_config(const Options& o) {
  SimConfig c;
  c.seed = o.seed;
  if (o.method == "regen") c.method = SimMethod::regenerative;
  else if (o.method == "batch") c.method = SimMethod::batch_means;
  else throw Error(ErrorCode::InvalidConfig, "--method must be regen or batch");
  c.cycles = o.cycles;
  c.replications = o.replications;
  c.horizon = o.horizon;
  c.batch_count = o.batches;
  if (o.initial == "zero") {
    c.initial.kind = InitialState::Kind::zero;
  } else if (o.initial == "stationary") {
    c.initial.kind = InitialState::Kind::stationary;
  } else {
    c.initial.kind = InitialState::Kind::fixed;
    try {
      std::size_t used = 0;
      c.initial.state = std::stoll(o.initial, &used);
      if (used != o.initial.size()) throw std::invalid_argument(o.initial);
    } catch (const std::exception&) {
      throw Error(ErrorCode::InvalidConfig, "--initial must be zero, stationary or a state index");
    }
  }
  return c;
}

std::vector<double> to_std(const Vector<double>& v) { return {v.data(), v.data() + v.size()}; }

/// Ordered scalar fields shared by the text and csv renderers.
using Fields = std::vector<std::pair<std::string, std::string>>;

void emit(std::ostream& out, const std::string& format, const Fields& fields, const json& j) {
  if (format == "json") {
    out << j.dump(2) << '\n';
  } else if (format == "csv") {
    for (std::size_t i = 0; i < fields.size(); ++i) out << (i ? "," : "") << fields[i].first;
    out << '\n';
    for (std::size_t i = 0; i < fields.size(); ++i) out << (i ? "," : "") << fields[i].second;
    out << '\n';
  } else {
    for (const auto& [k, v] : fields) out << std::left << std::setw(18) << k << v << '\n';
  }
}

std::string num(double x) { return format_number(x); }

int cmd_compute(const Options& o, std::ostream& out) {
  const AnyModel any = load_source(o);
  Fields f;
  json j;
  Vector<double> R;

  if (const auto* m = std::get_if<BDModel>(&any)) {
    const auto s = rates_and_cdfs(*m);
    const auto closed = dispersion_closed_form(*m);
    const double oracle = dispersion_renewal_reward(*m);
    R = closed.R;
    j = model_to_json(*m);
    j["D_closed"] = closed.D;
    j["D_oracle"] = oracle;
    j["difference"] = closed.D - oracle;
    j["lambda_bar"] = s.thinned_rate;
    j["varpi"] = s.counted_fraction;
    f = {{"J", std::to_string(m->J())}, {"D_closed", num(closed.D)}, {"D_oracle", num(oracle)},
         {"difference", num(closed.D - oracle)}, {"lambda_bar", num(s.thinned_rate)}, {"varpi", num(s.counted_fraction)}};
  } else {
    const auto r = dispersion_infinite(std::get<InfiniteBDModel>(any));
    R = r.R;
    j = {{"model", o.model},       {"params", parse_params(o.params)}, {"D_infinite", r.D},
         {"states_used", r.states_used}, {"tail_bound", r.tail_bound}, {"horizon", r.horizon},
         {"lambda_bar", r.thinned_rate}, {"varpi", r.counted_fraction}};
    f = {{"D_infinite", num(r.D)},        {"states_used", std::to_string(r.states_used)},
         {"tail_bound", num(r.tail_bound)}, {"horizon", std::to_string(r.horizon)},
         {"lambda_bar", num(r.thinned_rate)}, {"varpi", num(r.counted_fraction)}};
  }
  if (o.breakdown) j["R"] = to_std(R);
  emit(out, o.format, f, j);
  if (o.breakdown && o.format != "json") {
    out << (o.format == "csv" ? "k,R_k\n" : "\nk  R_k\n");
    for (Index k = 0; k < R.size(); ++k) out << k << (o.format == "csv" ? "," : "  ") << num(R[k]) << '\n';
  }
  return 0;
}

int cmd_simulate(const Options& o, std::ostream& out) {
  const AnyModel any = load_source(o);
  const auto* m = std::get_if<BDModel>(&any);
  if (!m) throw Error(ErrorCode::InvalidConfig, "simulation needs a finite model");
  const SimConfig c = sim_config(o);
  const SimEstimate e = simulate(*m, c);
  const double closed = dispersion_closed_form(*m).D;

  json j = {{"seed", e.seed},
            {"method", o.method},
            {"D_hat", e.D_hat},
            {"std_err", e.std_err},
            {"mean_rate_hat", e.mean_rate_hat},
            {"rate_std_err", e.rate_std_err},
            {"cycles_or_batches", e.cycles_or_batches},
            {"D_closed", closed},
            {"occupancy", to_std(e.occupancy)},
            {"occupancy_std_err", to_std(e.occupancy_std_err)}};
  Fields f = {{"seed", std::to_string(e.seed)},          {"method", o.method},
              {"D_hat", num(e.D_hat)},                   {"std_err", num(e.std_err)},
              {"mean_rate_hat", num(e.mean_rate_hat)},   {"rate_std_err", num(e.rate_std_err)},
              {"cycles_or_batches", std::to_string(e.cycles_or_batches)}, {"D_closed", num(closed)}};
  if (e.raw_moments) {
    const auto& r = *e.raw_moments;
    j["raw_moments"] = {{"X", r.X}, {"Y", r.Y}, {"X2", r.X2}, {"XY", r.XY}, {"Y2", r.Y2}};
    for (const auto& [k, v] : {std::pair{"EX", r.X}, {"EY", r.Y}, {"EX2", r.X2}, {"EXY", r.XY}, {"EY2", r.Y2}})
      f.emplace_back(k, num(v));
  } else {
    j["warmup"] = e.warmup;
    j["bias_diagnostic"] = e.bias_diagnostic;
    f.emplace_back("warmup", num(e.warmup));
    f.emplace_back("bias_diagnostic", num(e.bias_diagnostic));
  }
  emit(out, o.format, f, j);
  return 0;
}

int cmd_sweep(const Options& o, std::ostream& out) {
  if (!o.file.empty()) throw Error(ErrorCode::InvalidConfig, "sweep needs a named --model");
  if (o.model.empty()) throw Error(ErrorCode::InvalidConfig, "sweep needs --model");
  if (o.sweep_var.empty() || o.grid.empty()) throw Error(ErrorCode::InvalidConfig, "sweep needs --sweep-var and --grid");

  SweepSpec spec;
  spec.model = {o.model, parse_params(o.params)};
  spec.variable = o.sweep_var;
  spec.grid = parse_grid(o.grid);
  spec.outputs = parse_outputs(o.outputs);
  spec.sim = sim_config(o);
  spec.truncation = {o.tail_tol, o.max_states};

  const auto rows = run_sweep(spec);
  if (o.out.empty()) {
    out << sweep_csv(rows);
    if (spec.outputs.count(SweepOutput::breakdown)) out << '\n' << breakdown_csv(rows);
  } else {
    write_sweep(spec, rows, o.out);
  }
  return 0;
}

int cmd_verify(const Options& o, std::ostream& out) {
  VerifyOptions v;
  v.seed = o.seed;
  v.inverse_models = o.inverse_models;
  v.equivalence_models = o.equivalence_models;
  const auto checks = run_verify(v);

  bool ok = true;
  json j = json::array();
  for (const auto& c : checks) {
    ok = ok && c.pass;
    j.push_back({{"check", c.name}, {"pass", c.pass}, {"detail", c.detail}});
  }
  if (o.format == "json") {
    out << j.dump(2) << '\n';
  } else {
    for (const auto& c : checks)
      out << (c.pass ? "PASS  " : "FAIL  ") << std::left << std::setw(52) << c.name << c.detail << '\n';
  }
  return ok ? 0 : 1;
}

void add_model_flags(CLI::App* app, Options& o) {
  app->add_option("--model", o.model, "Named model");
  app->add_option("--file", o.file, "JSON model file");
  app->add_option("--param", o.params, "Model parameters k=v")->expected(1, -1);
  app->add_option("--tail-tol", o.tail_tol, "Truncation tolerance for infinite models");
  app->add_option("--max-states", o.max_states, "Truncation state limit for infinite models");
}

void add_sim_flags(CLI::App* app, Options& o) {
  app->add_option("--seed", o.seed, "Random seed");
  app->add_option("--method", o.method, "regen or batch");
  app->add_option("--cycles", o.cycles, "Regenerative cycles");
  app->add_option("--replications", o.replications, "Independent streams sharing the cycles");
  app->add_option("--horizon", o.horizon, "Batch-means run length");
  app->add_option("--batches", o.batches, "Batch count");
  app->add_option("--initial", o.initial, "zero, stationary or a state index");
}

void report_error(std::ostream& out, std::ostream& err, const std::string& format, ErrorCode code, const std::string& what) {
  if (format == "json")
    out << json{{"error", {{"code", std::string(to_string(code))}, {"message", what}}}}.dump() << '\n';
  else
    err << "error: " << what << '\n';
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Options o;
  CLI::App app{"Index of dispersion of thinned birth-death counting processes", "bdt"};
  app.require_subcommand(1);
  app.add_option("--format", o.format, "text, json or csv")->check(CLI::IsMember({"text", "json", "csv"}));

  auto* compute = app.add_subcommand("compute", "Closed form and oracle dispersion of one model");
  add_model_flags(compute, o);
  compute->add_flag("--breakdown", o.breakdown, "Also print R_k");
  compute->add_option("--format", o.format)->check(CLI::IsMember({"text", "json", "csv"}));

  auto* sweep = app.add_subcommand("sweep", "Dispersion over a parameter grid");
  add_model_flags(sweep, o);
  add_sim_flags(sweep, o);
  sweep->add_option("--sweep-var", o.sweep_var, "Parameter to vary");
  sweep->add_option("--grid", o.grid, "min:max:points[:log]");
  sweep->add_option("--outputs", o.outputs, "closed_form,oracle,simulation,breakdown");
  sweep->add_option("--out", o.out, "CSV path; stdout when absent");

  auto* sim = app.add_subcommand("simulate", "Monte Carlo estimate");
  add_model_flags(sim, o);
  add_sim_flags(sim, o);
  sim->add_option("--format", o.format)->check(CLI::IsMember({"text", "json", "csv"}));

  auto* verify = app.add_subcommand("verify", "Cross-validation suite");
  verify->add_option("--seed", o.seed, "Random seed");
  verify->add_option("--inverse-models", o.inverse_models);
  verify->add_option("--equivalence-models", o.equivalence_models);
  verify->add_option("--format", o.format)->check(CLI::IsMember({"text", "json"}));

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    report_error(out, err, o.format, ErrorCode::ParseError, e.what());
    return 2;
  }

  try {
    if (compute->parsed()) return cmd_compute(o, out);
    if (sweep->parsed()) return cmd_sweep(o, out);
    if (sim->parsed()) return cmd_simulate(o, out);
    return cmd_verify(o, out);
  } catch (const Error& e) {
    report_error(out, err, o.format, e.code(), e.what());
    return 2;
  }
}

}  // namespace bdt
