#pragma once

#include <charconv>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <istream>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "quadkick/errors.hpp"
#include "quadkick/kick_engine.hpp"

namespace quadkick {

/// Malformed configuration text or schedule; `line` is 0 when not line-specific.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::size_t line, std::string field, const std::string& what)
      : std::runtime_error(format(line, field, what)), line_(line), field_(std::move(field)) {}

  std::size_t line() const noexcept { return line_; }
  const std::string& field() const noexcept { return field_; }

 private:
  static std::string format(std::size_t line, const std::string& field, const std::string& what) {
    std::string out;
    if (line > 0) out += "line " + std::to_string(line) + ": ";
    if (!field.empty()) out += "field '" + field + "': ";
    return out + what;
  }

  std::size_t line_;
  std::string field_;
};

/// Probe settings for the readout command.
struct ProbeOptions {
  double drive = 1e5;     // s^-1
  double detuning = 0.0;  // omega_c - omega_p, rad/s
  double periods = 4.0;   // ripple periods after settling
};

struct RunConfig {
  PhysicalParams physics;
  ProbeOptions probe;
};

inline std::string_view trim(std::string_view s) {
  constexpr std::string_view ws = " \t\r\n";
  const auto first = s.find_first_not_of(ws);
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(ws);
  return s.substr(first, last - first + 1);
}

/// Whole-string decimal/scientific double; rejects trailing junk and non-finite values.
inline std::optional<double> parse_double(std::string_view text) {
  text = trim(text);
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  double value = 0.0;
  const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || end != text.data() + text.size() || text.empty() || !std::isfinite(value)) {
    return std::nullopt;
  }
  return value;
}

/**
 * Parses the flat `key = value` format. `#` starts a comment; blank lines are
 * ignored. Keys are the PhysicalParams field names plus probe_drive,
 * probe_detuning and probe_periods. Unknown or repeated keys are errors, and
 * the resulting parameters are validated.
 */
inline RunConfig parse_config(std::istream& in) {
  RunConfig cfg;
  std::set<std::string, std::less<>> seen;
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string_view line = raw;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;

    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ConfigError(line_no, "", "expected 'key = value'");
    const std::string key{trim(line.substr(0, eq))};
    if (key.empty()) throw ConfigError(line_no, "", "missing key");
    const auto value = parse_double(line.substr(eq + 1));
    if (!value) throw ConfigError(line_no, key, "value is not a finite number");
    if (!seen.insert(key).second) throw ConfigError(line_no, key, "duplicate key");

    if (key == "probe_drive") cfg.probe.drive = *value;
    else if (key == "probe_detuning") cfg.probe.detuning = *value;
    else if (key == "probe_periods") cfg.probe.periods = *value;
    else if (!set_parameter(cfg.physics, key, *value)) throw ConfigError(line_no, key, "unknown key");
  }

  try {
    cfg.physics.validate();
  } catch (const ParameterError& e) {
    throw ConfigError(0, e.field(), e.what());
  }
  if (!(cfg.probe.periods >= 1.0)) throw ConfigError(0, "probe_periods", "must be at least 1");
  return cfg;
}

inline RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(0, "", "cannot open config file '" + path + "'");
  return parse_config(in);
}

/**
 * Schedule mini-language: `;`-separated segments `kick[:photons]`,
 * `free[:seconds]`, `diss[:seconds]`. A kick without photons uses params.n_p;
 * every kick lasts the optimal duration for its photon number. free/diss
 * default to a quarter mechanical period. An empty spec is the identity.
 */
inline PulseSchedule parse_schedule(std::string_view spec, const PhysicalParams& params) {
  PulseSchedule schedule;
  schedule.label = std::string(trim(spec));
  if (trim(spec).empty()) return schedule;

  std::size_t index = 0;
  while (true) {
    const auto sep = spec.find(';');
    const std::string_view token = trim(spec.substr(0, sep));
    const std::string where = "schedule segment " + std::to_string(index);
    if (token.empty()) throw ConfigError(0, "schedule", where + " is empty");

    const auto colon = token.find(':');
    const std::string_view kind = trim(token.substr(0, colon));
    std::optional<double> arg;
    if (colon != std::string_view::npos) {
      arg = parse_double(token.substr(colon + 1));
      if (!arg || *arg < 0.0) throw ConfigError(0, "schedule", where + " has an invalid argument");
    }

    if (kind == "kick") {
      const double photons = arg.value_or(params.n_p);
      const double g_eff = effective_stiffness(params.g, photons, params.omega_m);
      schedule.segments.emplace_back(Kick{optimal_kick_duration(g_eff, params.omega_m), photons});
    } else if (kind == "free") {
      schedule.segments.emplace_back(Free{arg.value_or(quarter_period(params.omega_m))});
    } else if (kind == "diss") {
      schedule.segments.emplace_back(Dissipate{arg.value_or(quarter_period(params.omega_m))});
    } else {
      throw ConfigError(0, "schedule", where + ": unknown segment '" + std::string(kind) + "'");
    }

    if (sep == std::string_view::npos) break;
    spec.remove_prefix(sep + 1);
    ++index;
  }
  return schedule;
}

/// Inserts a Dissipate of equal length after every Free segment.
inline PulseSchedule with_dissipation(const PulseSchedule& schedule) {
  PulseSchedule out;
  out.label = schedule.label;
  for (const Segment& s : schedule.segments) {
    out.segments.push_back(s);
    if (const auto* f = std::get_if<Free>(&s)) out.segments.emplace_back(Dissipate{f->duration});
  }
  return out;
}

}  // namespace quadkick
