#include "fxhhw/experiment.hpp"

#include <json.hpp>

#include <chrono>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <future>
#include <iomanip>
#include <limits>
#include <sstream>

#include "fxhhw/error.hpp"

namespace fxhhw {

using json = nlohmann::json;

namespace {

using Clock = std::chrono::steady_clock;

const char* kAxisNames[4] = {"s", "v", "rd", "rf"};

// Reads typed fields from a JSON object and records every problem.
class Reader {
public:
  explicit Reader(std::vector<std::string>& errors) : errors_(errors) {}

  template <class T>
  void get(const json& obj, const std::string& path, const char* key, T& out, bool required = false) {
    if (!obj.is_object()) return;
    const auto it = obj.find(key);
    if (it == obj.end()) {
      if (required) errors_.push_back(path + key + ": missing");
      return;
    }
    try {
      out = it->template get<T>();
    } catch (const json::exception&) {
      errors_.push_back(path + key + ": wrong type");
    }
  }

  void error(const std::string& msg) { errors_.push_back(msg); }

  // Nested object under key; an empty object (and an error) for any other type.
  json section(const json& obj, const std::string& path, const char* key) {
    if (!obj.is_object()) return json::object();
    const auto it = obj.find(key);
    if (it == obj.end()) return json::object();
    if (!it->is_object()) {
      errors_.push_back(path + key + ": expected an object");
      return json::object();
    }
    return *it;
  }

private:
  std::vector<std::string>& errors_;
};

std::string join_lines(const std::vector<std::string>& v) {
  std::string out;
  for (const auto& s : v) out += "\n  - " + s;
  return out;
}

template <class F>
void try_enum(std::vector<std::string>& errors, const std::string& field, F&& f) {
  try {
    f();
  } catch (const Error& e) {
    errors.push_back(field + ": " + e.what());
  }
}

json theta_json(const ThetaParams& t) { return json::array({t.a1, t.a2, t.a3}); }

std::string format_double(double x, int precision = 17) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", precision, x);
  return buf;
}

std::string opt_double(const std::optional<double>& x, int precision = 17) {
  return x ? format_double(*x, precision) : std::string();
}

}  // namespace

std::string csv_escape(const std::string& field) {
  if (field.find_first_of(",\"\r\n") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

int axis_from_string(const std::string& s) {
  if (s == "s") return axis_s;
  if (s == "v") return axis_v;
  if (s == "rd" || s == "d") return axis_rd;
  if (s == "rf" || s == "f") return axis_rf;
  throw ConfigError("unknown axis '" + s + "' (expected s, v, rd or rf)");
}

ExperimentConfig builtin_experiment(int which) {
  ExperimentConfig c;
  ModelParams& p = c.model;
  p.s0 = 100.0;
  p.v0 = 0.04;
  p.rd0 = 0.1;
  p.rf0 = 0.1;
  p.kappa = 0.5;
  p.vbar = 0.1;
  p.gamma = 0.3;
  p.lambda_d = 0.01;
  p.lambda_f = 0.05;
  p.eta_d = 0.007;
  p.eta_f = 0.012;
  p.theta_d_params = {0.05, 0.0, 0.0};
  p.theta_f_params = {0.05, 0.0, 0.0};
  p.correlation = Correlation{-0.4, -0.15, -0.15, 0.3, 0.3, 0.25};
  c.option.strike = 100.0;
  c.queries = {{{100.0, 0.04, 0.024, 0.024}, {100.0, 0.04, 0.1, 0.1}}};
  std::array<int, 4> m{};
  switch (which) {
    case 1:
      c.name = "experiment-1";
      c.option.kind = OptionKind::call;
      c.option.maturity = 1.0;
      c.pricing.boundary = BoundaryMode::dirichlet;
      m = {28, 20, 14, 14};
      c.reference = {8.420, 7.888};
      break;
    case 2:
      c.name = "experiment-2";
      c.option.kind = OptionKind::put;
      c.option.maturity = 2.0;
      c.pricing.boundary = BoundaryMode::abc;
      m = {10, 8, 6, 6};
      c.reference = {12.528, 10.594};
      break;
    case 3:
      c.name = "experiment-3";
      c.option.kind = OptionKind::call;
      c.option.maturity = 0.25;
      c.pricing.boundary = BoundaryMode::dirichlet;
      p.theta_d_params = {0.074, 0.014, 2.10};
      p.theta_f_params = {1.0, 0.5, 0.5};
      c.pricing.solver = SolverKind::midpoint;
      c.pricing.delta_tau = 0.000625;
      m = {20, 14, 10, 10};
      c.reference = {3.999, 3.929};
      break;
    default:
      throw InvalidArgument("builtin_experiment: expected 1, 2 or 3");
  }
  c.pricing.grid = default_grid_config(m, c.option.strike, p.v0, p.rd0, p.rf0);
  return c;
}

ExperimentConfig parse_config(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("config root must be a JSON object");

  std::vector<std::string> errors;
  Reader rd(errors);
  ExperimentConfig c;
  rd.get(j, "", "name", c.name);

  const json model = rd.section(j, "", "model");
  if (!j.contains("model")) errors.push_back("model: missing");
  ModelParams& p = c.model;
  p = ModelParams{};
  for (auto [key, ptr] : {std::pair{"s0", &p.s0}, std::pair{"v0", &p.v0}, std::pair{"rd0", &p.rd0},
                          std::pair{"rf0", &p.rf0}, std::pair{"kappa", &p.kappa}, std::pair{"vbar", &p.vbar},
                          std::pair{"gamma", &p.gamma}, std::pair{"lambda_d", &p.lambda_d},
                          std::pair{"lambda_f", &p.lambda_f}, std::pair{"eta_d", &p.eta_d},
                          std::pair{"eta_f", &p.eta_f}})
    rd.get(model, "model.", key, *ptr, true);
  for (auto [key, ptr] : {std::pair{"theta_d", &p.theta_d_params}, std::pair{"theta_f", &p.theta_f_params}}) {
    std::vector<double> t;
    rd.get(model, "model.", key, t, true);
    if (model.contains(key) && t.size() != 3 && model[key].is_array())
      errors.push_back(std::string("model.") + key + ": expected 3 numbers [a1, a2, a3]");
    if (t.size() == 3) *ptr = ThetaParams{t[0], t[1], t[2]};
  }
  const json corr = rd.section(model, "model.", "correlation");
  if (!model.contains("correlation")) errors.push_back("model.correlation: missing");
  for (auto [key, ptr] :
       {std::pair{"sv", &p.correlation.sv}, std::pair{"sd", &p.correlation.sd}, std::pair{"sf", &p.correlation.sf},
        std::pair{"vd", &p.correlation.vd}, std::pair{"vf", &p.correlation.vf}, std::pair{"df", &p.correlation.df}})
    rd.get(corr, "model.correlation.", key, *ptr, true);
  for (const auto& v : p.violations()) errors.push_back("model: " + v);

  const json opt = rd.section(j, "", "option");
  if (!j.contains("option")) errors.push_back("option: missing");
  std::string kind = "call";
  rd.get(opt, "option.", "kind", kind, true);
  try_enum(errors, "option.kind", [&] { c.option.kind = option_kind_from_string(kind); });
  rd.get(opt, "option.", "strike", c.option.strike, true);
  rd.get(opt, "option.", "maturity", c.option.maturity, true);
  for (const auto& v : c.option.violations()) errors.push_back("option: " + v);

  const json grid = rd.section(j, "", "grid");
  if (!j.contains("grid")) errors.push_back("grid: missing");
  std::vector<int> m;
  rd.get(grid, "grid.", "m", m, true);
  if (grid.contains("m") && m.size() != 4) errors.push_back("grid.m: expected 4 node counts");
  std::vector<double> xi = {0.1, 50.0, 500.0, 500.0};
  rd.get(grid, "grid.", "xi", xi);
  if (xi.size() != 4) {
    errors.push_back("grid.xi: expected 4 stretch values");
    xi = {0.1, 50.0, 500.0, 500.0};
  }
  double s_max = 14.0 * c.option.strike, v_max = 10.0, r_min = -1.0, r_max = 1.0;
  rd.get(grid, "grid.", "s_max", s_max);
  rd.get(grid, "grid.", "v_max", v_max);
  rd.get(grid, "grid.", "r_min", r_min);
  rd.get(grid, "grid.", "r_max", r_max);
  bool uniform = false;
  rd.get(grid, "grid.", "uniform", uniform);
  if (m.size() == 4) {
    for (int a = 0; a < 4; ++a)
      if (m[a] < 4) errors.push_back(std::string("grid.m[") + kAxisNames[a] + "]: need at least 4 nodes");
    c.pricing.grid = default_grid_config({m[0], m[1], m[2], m[3]}, c.option.strike, p.v0, p.rd0, p.rf0);
  }
  auto& g = c.pricing.grid;
  g.s.upper = s_max;
  g.v.upper = v_max;
  g.rd.lower = g.rf.lower = r_min;
  g.rd.upper = g.rf.upper = r_max;
  for (int a = 0; a < 4; ++a) g.axis(a).xi = xi[a];
  g.uniform = uniform;
  if (!(s_max > c.option.strike)) errors.push_back("grid.s_max: must exceed the strike");
  if (!(v_max > p.v0)) errors.push_back("grid.v_max: must exceed v0");
  if (!(r_min < p.rd0 && p.rd0 < r_max && r_min < p.rf0 && p.rf0 < r_max))
    errors.push_back("grid.r_min/r_max: must bracket rd0 and rf0");
  for (int a = 0; a < 4; ++a)
    if (!(xi[a] >= 0.0)) errors.push_back(std::string("grid.xi[") + kAxisNames[a] + "]: must be >= 0");

  std::vector<double> shape = {2.0, 3.0, 3.0, 3.0};
  rd.get(j, "", "shape", shape);
  if (shape.size() != 4 || !(shape[0] > 0 && shape[1] > 0 && shape[2] > 0 && shape[3] > 0))
    errors.push_back("shape: expected 4 positive multipliers");
  else
    c.pricing.shape = rbf::ShapeMultipliers{shape[0], shape[1], shape[2], shape[3]};

  std::string method = "pm", solver = "auto", boundary = "abc", theta_mode = "time_dependent", interp = "cubic";
  rd.get(j, "", "method", method);
  rd.get(j, "", "solver", solver);
  rd.get(j, "", "boundary", boundary);
  rd.get(j, "", "theta_mode", theta_mode);
  rd.get(j, "", "interpolation", interp);
  try_enum(errors, "method", [&] { c.pricing.method = method_from_string(method); });
  try_enum(errors, "solver", [&] { c.pricing.solver = solver_kind_from_string(solver); });
  try_enum(errors, "boundary", [&] { c.pricing.boundary = boundary_mode_from_string(boundary); });
  try_enum(errors, "theta_mode", [&] { c.pricing.theta_mode = theta_mode_from_string(theta_mode); });
  try_enum(errors, "interpolation", [&] { c.interpolation = interpolation_kind_from_string(interp); });
  if (c.pricing.boundary == BoundaryMode::dirichlet && c.option.kind == OptionKind::put)
    errors.push_back("boundary: dirichlet pins V = 0 at s = 0 and is only valid for calls");
  if (c.pricing.solver == SolverKind::krylov && !is_time_independent(p, c.pricing.theta_mode))
    errors.push_back("solver: krylov needs a tau-independent operator (theta_mode constant_approx or zero theta "
                     "amplitudes)");

  rd.get(j, "", "delta_tau", c.pricing.delta_tau);
  if (c.pricing.delta_tau < 0.0) errors.push_back("delta_tau: must be >= 0");
  if (c.pricing.delta_tau > 0.0 && c.option.maturity > 0.0) {
    const double steps = c.option.maturity / c.pricing.delta_tau;
    if (std::abs(steps - std::round(steps)) > 1e-9 * steps)
      errors.push_back("delta_tau: must divide the maturity into a whole number of steps");
  }
  rd.get(j, "", "midpoint_substeps", c.pricing.midpoint_substeps);
  if (c.pricing.midpoint_substeps < 1) errors.push_back("midpoint_substeps: must be >= 1");
  rd.get(j, "", "growth_limit", c.pricing.growth_limit);

  const json kry = rd.section(j, "", "krylov");
  rd.get(kry, "krylov.", "Y", c.pricing.krylov.Y);
  rd.get(kry, "krylov.", "tol", c.pricing.krylov.tol);
  rd.get(kry, "krylov.", "breakdown_tol", c.pricing.krylov.breakdown_tol);
  rd.get(kry, "krylov.", "allow_substeps", c.pricing.krylov.allow_substeps);
  rd.get(kry, "krylov.", "max_substeps", c.pricing.krylov.max_substeps);
  if (c.pricing.krylov.Y < 1) errors.push_back("krylov.Y: must be >= 1");
  if (!(c.pricing.krylov.tol > 0.0)) errors.push_back("krylov.tol: must be > 0");

  c.queries = {{{c.option.strike, p.v0, 0.024, 0.024}, {c.option.strike, p.v0, p.rd0, p.rf0}}};
  if (j.contains("queries")) {
    std::vector<std::vector<double>> q;
    rd.get(j, "", "queries", q);
    if (q.size() != 2 || q[0].size() != 4 || q[1].size() != 4)
      errors.push_back("queries: expected two points [s, v, rd, rf]");
    else
      for (int k = 0; k < 2; ++k) c.queries[k] = {q[k][0], q[k][1], q[k][2], q[k][3]};
  }
  if (j.contains("reference")) {
    const auto& r = j["reference"];
    if (!r.is_array() || r.size() != 2) {
      errors.push_back("reference: expected [V1_ref, V2_ref] (null allowed)");
    } else {
      for (int k = 0; k < 2; ++k) {
        if (r[k].is_null()) continue;
        if (!r[k].is_number() || r[k].get<double>() == 0.0)
          errors.push_back("reference[" + std::to_string(k) + "]: must be a non-zero number or null");
        else
          c.reference[k] = r[k].get<double>();
      }
    }
  }
  rd.get(j, "", "lambda_max", c.lambda_max);
  rd.get(j, "", "greeks", c.greeks);

  const json mc = rd.section(j, "", "mc");
  rd.get(mc, "mc.", "enabled", c.mc_enabled);
  rd.get(mc, "mc.", "paths", c.mc.paths);
  rd.get(mc, "mc.", "steps_per_year", c.mc.steps_per_year);
  rd.get(mc, "mc.", "seed", c.mc.seed);
  rd.get(mc, "mc.", "antithetic", c.mc.antithetic);
  rd.get(mc, "mc.", "batch_size", c.mc.batch_size);
  if (c.mc.paths < 1) errors.push_back("mc.paths: must be >= 1");
  if (c.mc.steps_per_year < 1) errors.push_back("mc.steps_per_year: must be >= 1");
  if (c.mc.batch_size < 1) errors.push_back("mc.batch_size: must be >= 1");

  const json out = rd.section(j, "", "output");
  rd.get(out, "output.", "csv", c.output.csv);
  rd.get(out, "output.", "table", c.output.table);
  rd.get(out, "output.", "field", c.output.field);
  rd.get(out, "output.", "greeks", c.output.greeks);
  rd.get(out, "output.", "include_timing", c.include_timing_in_csv);

  if (!errors.empty()) throw ConfigError("invalid configuration:" + join_lines(errors));
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string config_to_json(const ExperimentConfig& c) {
  const auto& p = c.model;
  const auto& g = c.pricing.grid;
  json j;
  j["name"] = c.name;
  j["model"] = {{"s0", p.s0},
                {"v0", p.v0},
                {"rd0", p.rd0},
                {"rf0", p.rf0},
                {"kappa", p.kappa},
                {"vbar", p.vbar},
                {"gamma", p.gamma},
                {"lambda_d", p.lambda_d},
                {"lambda_f", p.lambda_f},
                {"eta_d", p.eta_d},
                {"eta_f", p.eta_f},
                {"theta_d", theta_json(p.theta_d_params)},
                {"theta_f", theta_json(p.theta_f_params)},
                {"correlation",
                 {{"sv", p.correlation.sv},
                  {"sd", p.correlation.sd},
                  {"sf", p.correlation.sf},
                  {"vd", p.correlation.vd},
                  {"vf", p.correlation.vf},
                  {"df", p.correlation.df}}}};
  j["option"] = {{"kind", to_string(c.option.kind)}, {"strike", c.option.strike}, {"maturity", c.option.maturity}};
  j["grid"] = {{"m", {g.s.m, g.v.m, g.rd.m, g.rf.m}},
               {"xi", {g.s.xi, g.v.xi, g.rd.xi, g.rf.xi}},
               {"s_max", g.s.upper},
               {"v_max", g.v.upper},
               {"r_min", g.rd.lower},
               {"r_max", g.rd.upper},
               {"uniform", g.uniform}};
  const auto& sh = c.pricing.shape;
  j["shape"] = {sh.s, sh.v, sh.rd, sh.rf};
  j["method"] = to_string(c.pricing.method);
  j["solver"] = to_string(c.pricing.solver);
  j["boundary"] = to_string(c.pricing.boundary);
  j["theta_mode"] = to_string(c.pricing.theta_mode);
  j["interpolation"] = to_string(c.interpolation);
  j["delta_tau"] = c.pricing.delta_tau;
  j["midpoint_substeps"] = c.pricing.midpoint_substeps;
  j["growth_limit"] = c.pricing.growth_limit;
  const auto& k = c.pricing.krylov;
  j["krylov"] = {{"Y", k.Y},
                 {"tol", k.tol},
                 {"breakdown_tol", k.breakdown_tol},
                 {"allow_substeps", k.allow_substeps},
                 {"max_substeps", k.max_substeps}};
  j["queries"] = {{c.queries[0][0], c.queries[0][1], c.queries[0][2], c.queries[0][3]},
                  {c.queries[1][0], c.queries[1][1], c.queries[1][2], c.queries[1][3]}};
  json ref = json::array();
  for (const auto& r : c.reference) ref.push_back(r ? json(*r) : json(nullptr));
  j["reference"] = ref;
  j["lambda_max"] = c.lambda_max;
  j["greeks"] = c.greeks;
  j["mc"] = {{"enabled", c.mc_enabled},
             {"paths", c.mc.paths},
             {"steps_per_year", c.mc.steps_per_year},
             {"seed", c.mc.seed},
             {"antithetic", c.mc.antithetic},
             {"batch_size", c.mc.batch_size}};
  j["output"] = {{"csv", c.output.csv},
                 {"table", c.output.table},
                 {"field", c.output.field},
                 {"greeks", c.output.greeks},
                 {"include_timing", c.include_timing_in_csv}};
  return j.dump(2);
}

std::string config_hash(const ExperimentConfig& c) {
  const std::string text = config_to_json(c);
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016" PRIx64, h);
  return buf;
}

namespace {

ConvergenceRow make_row(const ExperimentConfig& c, const SolutionField& f, double seconds) {
  ConvergenceRow row;
  const auto& g = c.pricing.grid;
  row.m = {g.s.m, g.v.m, g.rd.m, g.rf.m};
  row.v1 = interpolate(f, c.queries[0], c.interpolation);
  row.v2 = interpolate(f, c.queries[1], c.interpolation);
  if (c.reference[0]) row.eps1 = relative_error(row.v1, *c.reference[0]);
  if (c.reference[1]) row.eps2 = relative_error(row.v2, *c.reference[1]);
  row.seconds = seconds;
  return row;
}

SpectralReport spectral_for(const ExperimentConfig& c) {
  const Grid4D grid = pricing_grid(c.pricing);
  AssemblyOptions opts{pricing_shapes(grid, c.pricing), c.pricing.theta_mode};
  AffineOperator op(grid, c.model, c.option, opts, c.pricing.boundary);
  SparseMatrix a = op.at(0.0).matrix * c.option.maturity;
  return estimate_lambda_max(a);
}

ExperimentReport report_header(const ExperimentConfig& c) {
  ExperimentReport r;
  r.name = c.name;
  r.config_echo = config_to_json(c);
  r.config_hash = config_hash(c);
  r.method = to_string(c.pricing.method);
  r.boundary = to_string(c.pricing.boundary);
  r.include_timing_in_csv = c.include_timing_in_csv;
  return r;
}

}  // namespace

ExperimentReport run_experiment(const ExperimentConfig& c, SolutionField* field_out) {
  const auto t0 = Clock::now();
  ExperimentReport r = report_header(c);
  SolveStats stats;
  SolutionField f = price(c.model, c.option, c.pricing, &stats);
  r.solver = to_string(stats.solver_used);
  r.rows.push_back(make_row(c, f, stats.assembly_seconds + stats.solve_seconds));
  r.roc1.emplace_back();
  r.roc2.emplace_back();
  if (c.lambda_max) {
    r.spectral = spectral_for(c);
    r.rows.back().lambda_max = r.spectral->dominant.real();
  }
  if (c.mc_enabled) {
    for (const auto& q : c.queries) {
      ModelParams p = c.model;
      p.s0 = q[0];
      p.v0 = q[1];
      p.rd0 = q[2];
      p.rf0 = q[3];
      r.mc.push_back(McRow{q, simulate_price(p, c.option, c.mc)});
    }
  }
  r.total_seconds = std::chrono::duration<double>(Clock::now() - t0).count();
  if (field_out) *field_out = std::move(f);
  return r;
}

ExperimentReport run_sweep(const ExperimentConfig& c, int axis, const std::vector<int>& ladder) {
  if (axis < 0 || axis > 3) throw ConfigError("sweep: axis index must be 0..3");
  if (ladder.size() < 3) throw ConfigError("sweep: the refinement ladder needs at least 3 sizes");
  for (std::size_t i = 0; i < ladder.size(); ++i) {
    if (ladder[i] < 4) throw ConfigError("sweep: ladder sizes must be >= 4");
    if (i > 0 && ladder[i] <= ladder[i - 1]) throw ConfigError("sweep: ladder sizes must be strictly increasing");
    if (i > 0 && ladder[i] != 2 * ladder[i - 1])
      emit_warning("sweep.not_doubling", "sweep ladder is not a doubling sequence; ROC assumes h halves");
  }
  const auto t0 = Clock::now();
  ExperimentReport r = report_header(c);
  r.rows.resize(ladder.size());
  std::vector<std::string> solvers(ladder.size());

  auto job = [&](std::size_t i) {
    ExperimentConfig ci = c;
    ci.pricing.grid.axis(axis).m = ladder[i];
    SolveStats st;
    const SolutionField f = price(ci.model, ci.option, ci.pricing, &st);
    r.rows[i] = make_row(ci, f, st.assembly_seconds + st.solve_seconds);
    solvers[i] = to_string(st.solver_used);
  };
  const int workers = std::max(1, std::min<int>(default_worker_count(), static_cast<int>(ladder.size())));
  for (std::size_t start = 0; start < ladder.size(); start += workers) {
    std::vector<std::future<void>> batch;
    for (std::size_t i = start; i < std::min(ladder.size(), start + workers); ++i)
      batch.push_back(std::async(workers > 1 ? std::launch::async : std::launch::deferred, job, i));
    for (auto& fut : batch) fut.get();
  }
  r.solver = solvers.front();

  double sum1 = 0.0, sum2 = 0.0;
  int n1 = 0, n2 = 0;
  for (std::size_t i = 0; i < r.rows.size(); ++i) {
    if (i < 2) {
      r.roc1.emplace_back();
      r.roc2.emplace_back();
      continue;
    }
    r.roc1.push_back(roc(r.rows[i - 2].v1, r.rows[i - 1].v1, r.rows[i].v1));
    r.roc2.push_back(roc(r.rows[i - 2].v2, r.rows[i - 1].v2, r.rows[i].v2));
    if (r.roc1.back()) sum1 += *r.roc1.back(), ++n1;
    if (r.roc2.back()) sum2 += *r.roc2.back(), ++n2;
  }
  if (n1 > 0) r.mean_roc1 = sum1 / n1;
  if (n2 > 0) r.mean_roc2 = sum2 / n2;
  r.total_seconds = std::chrono::duration<double>(Clock::now() - t0).count();
  return r;
}

void write_report_csv(std::ostream& os, const ExperimentReport& r) {
  os << "config_hash,name,method,solver,boundary,m1,m2,m3,m4,V1,V2,eps1,eps2,roc1,roc2,lambda_max";
  if (r.include_timing_in_csv) os << ",seconds";
  os << "\r\n";
  for (std::size_t i = 0; i < r.rows.size(); ++i) {
    const auto& row = r.rows[i];
    os << csv_escape(r.config_hash) << ',' << csv_escape(r.name) << ',' << csv_escape(r.method) << ','
       << csv_escape(r.solver) << ',' << csv_escape(r.boundary);
    for (int a = 0; a < 4; ++a) os << ',' << row.m[a];
    os << ',' << format_double(row.v1) << ',' << format_double(row.v2) << ',' << opt_double(row.eps1) << ','
       << opt_double(row.eps2) << ',' << (i < r.roc1.size() ? opt_double(r.roc1[i]) : "") << ','
       << (i < r.roc2.size() ? opt_double(r.roc2[i]) : "") << ',' << opt_double(row.lambda_max);
    if (r.include_timing_in_csv) os << ',' << format_double(row.seconds, 6);
    os << "\r\n";
  }
}

std::string format_report_table(const ExperimentReport& r) {
  std::ostringstream os;
  os << "experiment: " << r.name << "  (config " << r.config_hash << ")\n";
  os << "method: " << r.method << "  solver: " << r.solver << "  boundary: " << r.boundary << "\n\n";
  os << std::setw(4) << "m1" << std::setw(4) << "m2" << std::setw(4) << "m3" << std::setw(4) << "m4" << std::setw(13)
     << "V1" << std::setw(13) << "V2" << std::setw(11) << "eps1" << std::setw(11) << "eps2" << std::setw(8) << "ROC1"
     << std::setw(8) << "ROC2" << std::setw(13) << "lambda_max" << std::setw(10) << "time[s]" << "\n";
  auto sci = [](const std::optional<double>& x) {
    if (!x) return std::string("-");
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2E", *x);
    return std::string(buf);
  };
  auto fix = [](const std::optional<double>& x, int prec) {
    if (!x) return std::string("-");
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.*f", prec, *x);
    return std::string(buf);
  };
  for (std::size_t i = 0; i < r.rows.size(); ++i) {
    const auto& row = r.rows[i];
    os << std::setw(4) << row.m[0] << std::setw(4) << row.m[1] << std::setw(4) << row.m[2] << std::setw(4)
       << row.m[3] << std::setw(13) << fix(row.v1, 5) << std::setw(13) << fix(row.v2, 5) << std::setw(11)
       << sci(row.eps1) << std::setw(11) << sci(row.eps2) << std::setw(8)
       << fix(i < r.roc1.size() ? r.roc1[i] : std::nullopt, 2) << std::setw(8)
       << fix(i < r.roc2.size() ? r.roc2[i] : std::nullopt, 2) << std::setw(13) << fix(row.lambda_max, 2)
       << std::setw(10) << fix(row.seconds, 2) << "\n";
  }
  if (r.mean_roc1 || r.mean_roc2)
    os << "\nmean ROC: V1 " << fix(r.mean_roc1, 2) << "  V2 " << fix(r.mean_roc2, 2) << "\n";
  if (r.spectral) {
    const auto& s = *r.spectral;
    os << "\nspectrum of T*A: dominant " << fix(s.dominant.real(), 2) << (s.dominant.imag() >= 0 ? "+" : "-")
       << fix(std::abs(s.dominant.imag()), 2) << "i, largest real part " << fix(s.re_lambda_max, 4)
       << ", symmetric part max " << fix(s.symmetric_lambda_max, 4) << (s.converged ? "" : " (not converged)")
       << "\n";
  }
  for (const auto& m : r.mc)
    os << "\nMC at (" << m.point[0] << ", " << m.point[1] << ", " << m.point[2] << ", " << m.point[3]
       << "): " << fix(m.estimate.mean, 5) << " +/- " << fix(m.estimate.std_error, 5) << " (" << m.estimate.paths
       << " paths)";
  if (!r.mc.empty()) os << "\n";
  os << "\ntotal time: " << fix(r.total_seconds, 2) << " s\n";
  return os.str();
}

void write_outputs(const ExperimentConfig& c, const ExperimentReport& r, const SolutionField* field) {
  auto open = [](const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write '" + path + "'");
    return out;
  };
  if (!c.output.csv.empty()) {
    auto out = open(c.output.csv);
    write_report_csv(out, r);
  }
  if (!c.output.table.empty()) {
    auto out = open(c.output.table);
    out << format_report_table(r) << "\nconfiguration:\n" << r.config_echo << "\n";
  }
  if (field && !c.output.field.empty()) save_field(*field, c.output.field);
  if (field && c.greeks && !c.output.greeks.empty()) {
    auto out = open(c.output.greeks);
    write_greeks_csv(out, greeks(*field, c.model.rd0, c.model.rf0, c.interpolation));
  }
}

std::string field_to_json(const SolutionField& f) {
  json j;
  j["format"] = "fxhhw-field";
  j["version"] = 1;
  j["tau"] = f.tau;
  json shapes = json::array();
  for (int a = 0; a < 4; ++a) shapes.push_back(std::isinf(f.shapes[a]) ? json(nullptr) : json(f.shapes[a]));
  j["shapes"] = shapes;
  j["anchor"] = f.anchor;
  j["axes"] = {f.grid.nodes[0], f.grid.nodes[1], f.grid.nodes[2], f.grid.nodes[3]};
  j["values"] = std::vector<double>(f.values.data(), f.values.data() + f.values.size());
  return j.dump();
}

SolutionField field_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw IoError(std::string("field file is not valid JSON: ") + e.what());
  }
  if (j.value("format", "") != "fxhhw-field") throw IoError("not an fxhhw field file");
  SolutionField f;
  try {
    f.tau = j.at("tau").get<double>();
    const auto& sh = j.at("shapes");
    double s[4];
    for (int a = 0; a < 4; ++a) s[a] = sh.at(a).is_null() ? std::numeric_limits<double>::infinity() : sh.at(a).get<double>();
    f.shapes = rbf::ShapeParams{s[0], s[1], s[2], s[3]};
    if (j.contains("anchor")) f.anchor = j.at("anchor").get<std::array<double, 4>>();
    std::array<std::vector<double>, 4> axes;
    for (int a = 0; a < 4; ++a) axes[a] = j.at("axes").at(a).get<std::vector<double>>();
    f.grid = make_grid(std::move(axes));
    const auto v = j.at("values").get<std::vector<double>>();
    if (v.size() != f.grid.size()) throw IoError("field file: value count does not match the axes");
    f.values = Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
  } catch (const json::exception& e) {
    throw IoError(std::string("malformed field file: ") + e.what());
  }
  return f;
}

void save_field(const SolutionField& f, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path + "'");
  out << field_to_json(f);
  if (!out) throw IoError("failed writing '" + path + "'");
}

SolutionField load_field(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open field file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return field_from_json(ss.str());
}

SliceSpec slice_from_string(const std::string& s, std::array<double, 4> fixed) {
  auto axis_of = [&](char ch) {
    switch (ch) {
      case 's': return int(axis_s);
      case 'v': return int(axis_v);
      case 'd': return int(axis_rd);
      case 'f': return int(axis_rf);
      default: throw RangeError("slice '" + s + "': unknown axis letter (use s, v, d, f)");
    }
  };
  if (s.size() != 2) throw RangeError("slice '" + s + "': expected two axis letters such as sv or df");
  SliceSpec spec{axis_of(s[0]), axis_of(s[1]), fixed};
  if (spec.axis_x == spec.axis_y) throw RangeError("slice '" + s + "': axes must differ");
  return spec;
}

std::vector<SurfacePoint> surface_export(const SolutionField& field, const SliceSpec& spec, InterpolationKind kind) {
  if (spec.axis_x < 0 || spec.axis_x > 3 || spec.axis_y < 0 || spec.axis_y > 3 || spec.axis_x == spec.axis_y)
    throw RangeError("surface_export: invalid slice axes");
  std::vector<SurfacePoint> out;
  const auto& xs = field.grid.nodes[spec.axis_x];
  const auto& ys = field.grid.nodes[spec.axis_y];
  out.reserve(xs.size() * ys.size());
  for (double y : ys)
    for (double x : xs) {
      auto p = spec.fixed;
      p[spec.axis_x] = x;
      p[spec.axis_y] = y;
      out.push_back(SurfacePoint{x, y, interpolate(field, p, kind)});
    }
  return out;
}

void write_surface_csv(std::ostream& os, const SliceSpec& spec, const std::vector<SurfacePoint>& pts) {
  os << kAxisNames[spec.axis_x] << ',' << kAxisNames[spec.axis_y] << ",V\r\n";
  for (const auto& p : pts) os << format_double(p.x) << ',' << format_double(p.y) << ',' << format_double(p.value) << "\r\n";
}

std::vector<SurfacePoint> read_surface_csv(std::istream& is) {
  std::vector<SurfacePoint> out;
  std::string line;
  if (!std::getline(is, line)) throw IoError("surface CSV: missing header");
  while (std::getline(is, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    SurfacePoint p;
    char* end = nullptr;
    const char* c = line.c_str();
    p.x = std::strtod(c, &end);
    if (*end != ',') throw IoError("surface CSV: malformed row '" + line + "'");
    p.y = std::strtod(end + 1, &end);
    if (*end != ',') throw IoError("surface CSV: malformed row '" + line + "'");
    p.value = std::strtod(end + 1, &end);
    out.push_back(p);
  }
  return out;
}

void write_greeks_csv(std::ostream& os, const GreeksSlice& g) {
  os << "s,v,V,delta,vega,vanna\r\n";
  for (std::size_t iv = 0; iv < g.v.size(); ++iv)
    for (std::size_t is = 0; is < g.s.size(); ++is)
      os << format_double(g.s[is]) << ',' << format_double(g.v[iv]) << ',' << format_double(g.value(is, iv)) << ','
         << format_double(g.delta(is, iv)) << ',' << format_double(g.vega(is, iv)) << ','
         << format_double(g.vanna(is, iv)) << "\r\n";
}

}  // namespace fxhhw
