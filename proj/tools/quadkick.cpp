// quadkick: command-line front end for the quadratic-kick squeezing simulator.
//
//   quadkick constants [--config PATH] [--out PATH] [--format csv|json]
//   quadkick simulate  [--config PATH] [--schedule SPEC] [--dissipation on|off] [--out PATH] [--format csv|json]
//   quadkick readout   [--config PATH] [--from PATH [--row N] | --var-p V --var-x V [--cross C]]
//                      [--x2-model free|frozen] [--out PATH] [--format csv|json]
//   quadkick sweep     [--config PATH] (--axis NAME=v1,v2,... [--axis ...] --observable OBS | --jitter p1,p2,...)
//                      [--pulses N] [--dissipation on|off] [--out PATH] [--format csv|json]
//
// Exit codes: 0 success, 2 configuration or usage error, 3 I/O error,
// 4 runtime invariant violation.

#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "quadkick/quadkick.hpp"
#include "table.hpp"

namespace {

using namespace quadkick;
using cli::Cell;
using cli::Table;
using Json = nlohmann::ordered_json;

enum ExitCode : int { kOk = 0, kConfig = 2, kIo = 3, kInvariant = 4 };

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct CommonOptions {
  std::string config;
  std::string out;
  std::string format = "csv";
};

void add_common(CLI::App* cmd, CommonOptions& opts) {
  cmd->add_option("--config", opts.config, "Parameter file (key = value); defaults built in");
  cmd->add_option("--out", opts.out, "Output path; stdout when omitted");
  cmd->add_option("--format", opts.format, "Output format")->check(CLI::IsMember({"csv", "json"}));
}

RunConfig load(const CommonOptions& opts) { return opts.config.empty() ? RunConfig{} : load_config(opts.config); }

void emit(const CommonOptions& opts, const std::string& text) {
  if (opts.out.empty()) {
    std::cout << text;
    std::cout.flush();
    return;
  }
  std::ofstream os(opts.out, std::ios::binary | std::ios::trunc);
  if (!os) throw IoError("cannot open output file '" + opts.out + "'");
  os << text;
  os.flush();
  if (!os) throw IoError("failed writing output file '" + opts.out + "'");
}

std::string render(const CommonOptions& opts, const Table& table) {
  std::ostringstream os;
  if (opts.format == "json") {
    os << cli::to_json(table).dump(2) << '\n';
  } else {
    cli::write_csv(os, table);
  }
  return os.str();
}

bool parse_switch(const std::string& value) { return value == "on"; }

// ---------------------------------------------------------------------------

int run_constants(const CommonOptions& opts) {
  const RunConfig cfg = load(opts);
  const PhysicalParams& p = cfg.physics;
  const double g_eff = effective_stiffness(p.g, p.n_p, p.omega_m);
  const double n_bar = p.occupancy();

  Table t{{"quantity", "value"}, {}};
  const auto row = [&](const char* key, double v) { t.rows.push_back({std::string(key), v}); };
  row("g_configured", p.g);
  row("g_physical", coupling_from_physical(p));
  row("g_eff", g_eff);
  row("stiffness_ratio", g_eff / p.omega_m);
  row("reduction_factor", p.omega_m / g_eff);
  row("kick_duration", optimal_kick_duration(g_eff, p.omega_m));
  row("quarter_period", quarter_period(p.omega_m));
  row("n_bar", n_bar);
  row("thermal_variance", n_bar + kVacuumVariance);
  row("one_kick_var_x", (n_bar + kVacuumVariance) * p.omega_m / g_eff);
  row("decoherence_term_half_period", decoherence_term(p.gamma, std::numbers::pi / p.omega_m, n_bar));
  row("kappa_over_2omega", p.kappa / (2.0 * p.omega_m));
  emit(opts, render(opts, t));
  return kOk;
}

// ---------------------------------------------------------------------------

struct SimulateOptions {
  std::string schedule = "kick;free;kick";
  std::string dissipation = "off";
};

int run_simulate(const CommonOptions& opts, const SimulateOptions& sim) {
  const RunConfig cfg = load(opts);
  PulseSchedule schedule = parse_schedule(sim.schedule, cfg.physics);
  if (parse_switch(sim.dissipation)) schedule = with_dissipation(schedule);

  const auto steps = apply_schedule(thermal_state(cfg.physics.occupancy()), schedule, cfg.physics);
  Table t{{"index", "segment", "duration", "var_p", "var_x", "cross", "det_cov", "x_squeezed"}, {}};
  for (std::size_t i = 0; i < steps.size(); ++i) {
    const auto& step = steps[i];
    const std::string kind =
        step.segment ? std::string(segment_kind(schedule.segments[*step.segment])) : std::string("initial");
    const double duration = step.segment ? segment_duration(schedule.segments[*step.segment]) : 0.0;
    t.rows.push_back({static_cast<std::int64_t>(i), kind, duration, step.state.var_p(), step.state.var_x(),
                      step.state.cross(), step.state.det(), is_squeezed(step.state).x_squeezed});
  }
  emit(opts, render(opts, t));
  return kOk;
}

// ---------------------------------------------------------------------------

struct ReadoutOptions {
  std::string from;
  long row = -1;
  std::optional<double> var_p;
  std::optional<double> var_x;
  double cross = 0.0;
  std::string x2_model = "free";
};

// Reads (var_p, var_x, cross) from a simulate output row; negative row counts from the end.
GaussianState state_from_simulation(const std::string& path, long row) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open state source '" + path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  const std::string text = buffer.str();

  std::vector<std::array<double, 3>> rows;
  if (const auto first = text.find_first_not_of(" \t\r\n"); first != std::string::npos && text[first] == '[') {
    const Json doc = Json::parse(text, nullptr, false);
    if (doc.is_discarded() || !doc.is_array()) throw ConfigError(0, "from", "state source is not valid JSON");
    for (const auto& r : doc) {
      if (!r.contains("var_p") || !r.contains("var_x") || !r.contains("cross")) {
        throw ConfigError(0, "from", "state source rows lack var_p/var_x/cross");
      }
      rows.push_back({r["var_p"].get<double>(), r["var_x"].get<double>(), r["cross"].get<double>()});
    }
  } else {
    std::istringstream lines(text);
    std::string line;
    std::vector<std::string> header;
    std::size_t line_no = 0;
    const auto split = [](const std::string& s) {
      std::vector<std::string> out;
      std::stringstream ss(s);
      std::string item;
      while (std::getline(ss, item, ',')) out.push_back(item);
      return out;
    };
    std::array<std::size_t, 3> col{};
    while (std::getline(lines, line)) {
      ++line_no;
      if (trim(line).empty()) continue;
      const auto fields = split(line);
      if (header.empty()) {
        header = fields;
        const char* names[3] = {"var_p", "var_x", "cross"};
        for (std::size_t k = 0; k < 3; ++k) {
          const auto it = std::find(header.begin(), header.end(), names[k]);
          if (it == header.end()) throw ConfigError(1, names[k], "column missing from state source");
          col[k] = static_cast<std::size_t>(it - header.begin());
        }
        continue;
      }
      std::array<double, 3> v{};
      for (std::size_t k = 0; k < 3; ++k) {
        const auto parsed = col[k] < fields.size() ? parse_double(fields[col[k]]) : std::nullopt;
        if (!parsed) throw ConfigError(line_no, header[col[k]], "not a number in state source");
        v[k] = *parsed;
      }
      rows.push_back(v);
    }
  }
  if (rows.empty()) throw ConfigError(0, "from", "state source has no rows");
  const long n = static_cast<long>(rows.size());
  const long index = row < 0 ? n + row : row;
  if (index < 0 || index >= n) throw ConfigError(0, "row", "row index out of range");
  const auto& r = rows[static_cast<std::size_t>(index)];
  return {{}, r[0], r[1], r[2]};
}

int run_readout(const CommonOptions& opts, const ReadoutOptions& ro) {
  const RunConfig cfg = load(opts);
  const PhysicalParams& p = cfg.physics;

  std::optional<GaussianState> state;
  if (!ro.from.empty()) {
    if (ro.var_p || ro.var_x) throw ConfigError(0, "from", "--from excludes --var-p/--var-x");
    state = state_from_simulation(ro.from, ro.row);
  } else if (ro.var_p || ro.var_x) {
    if (!ro.var_p || !ro.var_x) throw ConfigError(0, "var_p", "--var-p and --var-x must be given together");
    state = GaussianState({}, *ro.var_p, *ro.var_x, ro.cross);
  } else {
    state = thermal_state(p.occupancy());
  }

  const ReadoutConfig rc =
      make_readout_config(p.kappa, p.g, p.omega_m, cfg.probe.drive, cfg.probe.detuning, cfg.probe.periods);
  ReadoutTrace trace;
  RippleReport summary{};
  if (ro.x2_model == "frozen") {
    const double x2 = state->var_x() + state->mean().x * state->mean().x;
    trace = integrate_langevin(rc, [x2](double) { return x2; });
    summary = summarize_readout(rc, trace, p.omega_m, 0.0);
  } else {
    trace = free_readout_trace(rc, *state, p.omega_m);
    summary = summarize_readout(rc, trace, p.omega_m, x2_ripple_amplitude(*state));
  }

  Table t{{"t", "intensity", "intensity_shift", "inferred_x2"}, {}};
  for (std::size_t k = 0; k < trace.times.size(); ++k) {
    t.rows.push_back({trace.times[k], trace.intensity[k], trace.shift[k], trace.inferred_x2[k]});
  }
  Table s{{"quantity", "value"}, {}};
  const auto row = [&](const char* key, double v) { s.rows.push_back({std::string(key), v}); };
  row("baseline", summary.baseline);
  row("dc_shift", summary.dc_shift);
  row("fractional_shift", summary.dc_shift / summary.baseline);
  row("ripple_amplitude", summary.ripple_amplitude);
  row("adiabatic_ripple", summary.adiabatic_ripple);
  row("kappa_over_2omega", summary.kappa_over_2omega);
  row("inferred_x2", summary.inferred_x2);
  row("state_var_x", state->var_x());
  row("state_var_p", state->var_p());

  std::ostringstream os;
  if (opts.format == "json") {
    Json doc = Json::object();
    Json summary_obj = Json::object();
    for (const auto& r : s.rows) summary_obj[std::get<std::string>(r[0])] = std::get<double>(r[1]);
    doc["summary"] = summary_obj;
    doc["trace"] = cli::to_json(t);
    os << doc.dump(2) << '\n';
  } else {
    cli::write_csv(os, t);
    os << '\n';
    cli::write_csv(os, s);
  }
  emit(opts, os.str());
  return kOk;
}

// ---------------------------------------------------------------------------

struct SweepOptions {
  std::vector<std::string> axes;
  std::string observable = "var_x";
  std::string jitter;
  int pulses = 2;
  std::string dissipation = "off";
  double threshold = kVacuumVariance;
};

std::vector<double> parse_list(const std::string& text, const std::string& field) {
  std::vector<double> values;
  std::string_view rest = text;
  while (true) {
    const auto comma = rest.find(',');
    const auto v = parse_double(rest.substr(0, comma));
    if (!v) throw ConfigError(0, field, "invalid number in list '" + text + "'");
    values.push_back(*v);
    if (comma == std::string_view::npos) break;
    rest.remove_prefix(comma + 1);
  }
  return values;
}

int run_sweep(const CommonOptions& opts, const SweepOptions& so) {
  const RunConfig cfg = load(opts);
  Table t;

  if (!so.jitter.empty()) {
    if (!so.axes.empty()) throw ConfigError(0, "jitter", "--jitter excludes --axis");
    const std::vector<double> phases = parse_list(so.jitter, "jitter");
    std::vector<double> offsets;
    for (double ph : phases) offsets.push_back(ph / cfg.physics.omega_m);
    const auto rows = jitter_sensitivity(cfg.physics, cfg.physics.occupancy(), offsets);
    t.columns = {"phase_error", "delta_tau", "var_x", "var_p"};
    for (std::size_t i = 0; i < rows.size(); ++i) {
      t.rows.push_back({phases[i], rows[i].delta_tau, rows[i].var_x, rows[i].var_p});
    }
    emit(opts, render(opts, t));
    return kOk;
  }

  SweepSpec spec;
  spec.base = cfg.physics;
  spec.pulses = so.pulses;
  spec.include_dissipation = parse_switch(so.dissipation);
  spec.threshold = so.threshold;
  const auto obs = parse_observable(so.observable);
  if (!obs) throw ConfigError(0, "observable", "unknown observable '" + so.observable + "'");
  spec.observable = *obs;
  if (so.axes.empty() || so.axes.size() > 2) throw ConfigError(0, "axis", "expected one or two --axis options");
  for (const std::string& a : so.axes) {
    const auto eq = a.find('=');
    if (eq == std::string::npos) throw ConfigError(0, "axis", "expected NAME=v1,v2,... in '" + a + "'");
    SweepAxis axis{std::string(trim(a.substr(0, eq))), parse_list(a.substr(eq + 1), "axis")};
    PhysicalParams probe;
    if (!set_parameter(probe, axis.parameter, 1.0)) {
      throw ConfigError(0, axis.parameter, "unknown sweep parameter");
    }
    spec.axes.push_back(std::move(axis));
  }

  const auto cells = sweep(spec);
  for (const auto& axis : spec.axes) t.columns.push_back(axis.parameter);
  t.columns.push_back(std::string(observable_name(spec.observable)));
  t.columns.push_back("status");
  for (const auto& cell : cells) {
    std::vector<Cell> row(cell.coordinates.begin(), cell.coordinates.end());
    if (cell.value) {
      row.emplace_back(*cell.value);
      row.emplace_back(std::string("ok"));
    } else {
      row.emplace_back(std::string("ERROR"));
      row.emplace_back("error: " + cell.error);
    }
    t.rows.push_back(std::move(row));
  }
  emit(opts, render(opts, t));
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Quadratic-kick squeezing simulator"};
  app.require_subcommand(1);

  CommonOptions common;
  SimulateOptions sim;
  ReadoutOptions ro;
  SweepOptions so;

  auto* constants = app.add_subcommand("constants", "Print derived quantities of the configuration");
  add_common(constants, common);

  auto* simulate = app.add_subcommand("simulate", "Evolve the thermal state through a pulse schedule");
  add_common(simulate, common);
  simulate->add_option("--schedule", sim.schedule, "Segments, e.g. 'kick;free;kick'");
  simulate->add_option("--dissipation", sim.dissipation, "Add thermal relaxation to free intervals")
      ->check(CLI::IsMember({"on", "off"}));

  auto* readout = app.add_subcommand("readout", "Integrate the probe cavity response to <x^2>(t)");
  add_common(readout, common);
  readout->add_option("--from", ro.from, "simulate output (CSV or JSON) supplying the state");
  readout->add_option("--row", ro.row, "Row of --from to use; negative counts from the end");
  readout->add_option("--var-p", ro.var_p, "Explicit momentum variance");
  readout->add_option("--var-x", ro.var_x, "Explicit position variance");
  readout->add_option("--cross", ro.cross, "Explicit symmetrised covariance");
  readout->add_option("--x2-model", ro.x2_model, "free: state rotates during the probe; frozen: <x^2> held fixed")
      ->check(CLI::IsMember({"free", "frozen"}));

  auto* sweep_cmd = app.add_subcommand("sweep", "Evaluate an observable over a parameter grid");
  add_common(sweep_cmd, common);
  sweep_cmd->add_option("--axis", so.axes, "NAME=v1,v2,... (at most two)");
  sweep_cmd->add_option("--observable", so.observable, "var_x | var_p | pulses_needed | decoherence_term");
  sweep_cmd->add_option("--jitter", so.jitter, "Free-interval phase errors omega_m*dtau, comma separated");
  sweep_cmd->add_option("--pulses", so.pulses, "Pulse count for var_x/var_p")->check(CLI::NonNegativeNumber);
  sweep_cmd->add_option("--threshold", so.threshold, "Squeezing target for pulses_needed")
      ->check(CLI::PositiveNumber);
  sweep_cmd->add_option("--dissipation", so.dissipation, "Include thermal relaxation")
      ->check(CLI::IsMember({"on", "off"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kConfig;
  }

  try {
    if (*constants) return run_constants(common);
    if (*simulate) return run_simulate(common, sim);
    if (*readout) return run_readout(common, ro);
    if (*sweep_cmd) return run_sweep(common, so);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfig;
  } catch (const ParameterError& e) {
    std::cerr << "config error: field '" << e.field() << "': " << e.what() << '\n';
    return kConfig;
  } catch (const IoError& e) {
    std::cerr << "io error: " << e.what() << '\n';
    return kIo;
  } catch (const ScheduleError& e) {
    std::cerr << "invariant violation at " << e.what() << '\n';
    return kInvariant;
  } catch (const InvariantError& e) {
    std::cerr << "invariant violation: " << e.what() << '\n';
    return kInvariant;
  } catch (const std::domain_error& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfig;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfig;
  }
  return kConfig;
}
