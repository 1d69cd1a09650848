// Copyright 2026 The phonsim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <istream>
#include <map>
#include <string>

#include <json.hpp>

#include "phonsim/scenarios.hpp"

namespace phonsim {

/// A scalar from the key/value config file.
struct ConfigValue {
  enum class Kind { Bool, Int, Float, Str };
  Kind kind = Kind::Str;
  bool b = false;
  long long i = 0;
  double f = 0.0;
  std::string s;

  double number(const std::string& key) const {
    if (kind == Kind::Int) return static_cast<double>(i);
    if (kind == Kind::Float) return f;
    throw ValidationError("config: key '" + key + "' must be a number");
  }
  long long integer(const std::string& key) const {
    if (kind != Kind::Int) throw ValidationError("config: key '" + key + "' must be an integer");
    return i;
  }
  bool boolean(const std::string& key) const {
    if (kind != Kind::Bool) throw ValidationError("config: key '" + key + "' must be a boolean");
    return b;
  }
  const std::string& str(const std::string& key) const {
    if (kind != Kind::Str) throw ValidationError("config: key '" + key + "' must be a string");
    return s;
  }
};

using ConfigTable = std::map<std::string, ConfigValue>;

namespace detail {

inline std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

}  // namespace detail

/// Parses the structured key/value config format (a TOML subset): [section]
/// headers, key = value lines, # comments, and scalar values (booleans,
/// integers, floats, "quoted strings"). Keys flatten to section.key.
inline ConfigTable parse_config(std::istream& in) {
  ConfigTable table;
  std::string line, section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string where = " (line " + std::to_string(lineno) + ")";
    std::string text = detail::trim(line);
    if (text.empty() || text[0] == '#') continue;
    if (text.front() == '[') {
      if (text.back() != ']') throw ValidationError("config: malformed section header" + where);
      section = detail::trim(text.substr(1, text.size() - 2));
      if (section.empty()) throw ValidationError("config: empty section name" + where);
      continue;
    }
    const auto eq = text.find('=');
    if (eq == std::string::npos) throw ValidationError("config: expected key = value" + where);
    const std::string key = detail::trim(text.substr(0, eq));
    std::string raw = detail::trim(text.substr(eq + 1));
    if (key.empty() || raw.empty()) throw ValidationError("config: empty key or value" + where);

    ConfigValue value;
    if (raw.front() == '"') {
      const auto close = raw.find('"', 1);
      if (close == std::string::npos) throw ValidationError("config: unterminated string" + where);
      value.kind = ConfigValue::Kind::Str;
      value.s = raw.substr(1, close - 1);
    } else {
      const auto hash = raw.find('#');
      if (hash != std::string::npos) raw = detail::trim(raw.substr(0, hash));
      if (raw == "true" || raw == "false") {
        value.kind = ConfigValue::Kind::Bool;
        value.b = raw == "true";
      } else {
        try {
          size_t used = 0;
          if (raw.find_first_of(".eE") == std::string::npos ||
              (raw.size() > 1 && (raw.rfind("0x", 0) == 0))) {
            value.kind = ConfigValue::Kind::Int;
            value.i = std::stoll(raw, &used, 0);
          } else {
            value.kind = ConfigValue::Kind::Float;
            value.f = std::stod(raw, &used);
          }
          if (used != raw.size()) throw std::invalid_argument(raw);
        } catch (const std::exception&) {
          throw ValidationError("config: cannot parse value '" + raw + "'" + where);
        }
      }
    }
    const std::string full = section.empty() ? key : section + "." + key;
    if (!table.emplace(full, value).second) {
      throw ValidationError("config: duplicate key '" + full + "'" + where);
    }
  }
  return table;
}

/// Builds a ScenarioConfig from the parsed file. The scenario name (and hence
/// the per-scenario defaults) comes from `scenario_override` when non-empty,
/// else from the file's `scenario` key, else fig2_free. Unknown keys are
/// rejected.
inline ScenarioConfig scenario_config_from_table(const ConfigTable& table,
                                                 const std::string& scenario_override = "") {
  std::string name = scenario_override;
  if (name.empty()) {
    const auto it = table.find("scenario");
    name = it != table.end() ? it->second.str("scenario") : "fig2_free";
  }
  ScenarioConfig cfg = ScenarioConfig::defaults_for(parse_scenario(name));

  for (const auto& [key, v] : table) {
    if (key == "scenario") {
      continue;  // consumed above (possibly overridden)
    } else if (key == "trap.ion_count") {
      cfg.trap.ion_count = static_cast<int>(v.integer(key));
      cfg.hilbert.ion_count = cfg.trap.ion_count;
    } else if (key == "trap.mass") {
      cfg.trap.mass_kg = v.number(key);
    } else if (key == "trap.charge") {
      cfg.trap.charge_c = v.number(key);
    } else if (key == "trap.nu_x") {
      cfg.trap.nu_x_hz = v.number(key);
    } else if (key == "trap.nu_y") {
      cfg.trap.nu_y_hz = v.number(key);
    } else if (key == "trap.nu_z") {
      cfg.trap.nu_z_hz = v.number(key);
    } else if (key == "hilbert.n_max") {
      cfg.hilbert.n_max = static_cast<int>(v.integer(key));
    } else if (key == "hilbert.internal_levels") {
      cfg.hilbert.internal_levels = static_cast<int>(v.integer(key));
    } else if (key == "blockade.site") {
      cfg.blockade.site = static_cast<int>(v.integer(key));
    } else if (key == "blockade.g") {
      cfg.blockade.g = v.number(key);
    } else if (key == "blockade.detuning") {
      cfg.blockade.detuning = v.number(key);
    } else if (key == "blockade.sideband") {
      const std::string& s = v.str(key);
      if (s == "bsb") {
        cfg.blockade.sideband = Sideband::Blue;
      } else if (s == "rsb") {
        cfg.blockade.sideband = Sideband::Red;
      } else {
        throw ValidationError("config: blockade.sideband must be \"bsb\" or \"rsb\"");
      }
    } else if (key == "blockade.phase") {
      cfg.blockade.phase = v.number(key);
    } else if (key == "pulse_g") {
      cfg.pulse_g = v.number(key);
    } else if (key == "time.start") {
      cfg.time.start = v.number(key);
    } else if (key == "time.stop") {
      cfg.time.stop = v.number(key);
    } else if (key == "time.step") {
      cfg.time.step = v.number(key);
    } else if (key == "shots") {
      cfg.shots = v.integer(key);
    } else if (key == "seed") {
      cfg.seed = static_cast<std::uint64_t>(v.integer(key));
    } else if (key == "noise.enabled") {
      cfg.noise.enabled = v.boolean(key);
    } else if (key == "noise.pulse_infidelity_target") {
      cfg.noise.pulse_infidelity_target = v.number(key);
    } else if (key == "noise.rsb_infidelity_target") {
      cfg.noise.rsb_infidelity_target = v.number(key);
    } else if (key == "noise.nbar") {
      cfg.noise.nbar = v.number(key);
    } else if (key == "ideal_mode") {
      cfg.ideal_mode = v.boolean(key);
    } else if (key == "hop_during_pulses") {
      cfg.hop_during_pulses = v.boolean(key);
    } else if (key == "probe.points") {
      cfg.probe.points = static_cast<int>(v.integer(key));
    } else if (key == "probe.periods") {
      cfg.probe.periods = v.number(key);
    } else if (key == "readout.stage1_flip") {
      cfg.readout.stage1_flip = v.number(key);
    } else if (key == "readout.stage2_flip") {
      cfg.readout.stage2_flip = v.number(key);
    } else {
      throw ValidationError("config: unknown key '" + key + "'");
    }
  }
  cfg.validate();
  return cfg;
}

inline nlohmann::json scenario_config_to_json(const ScenarioConfig& cfg) {
  nlohmann::json j;
  j["scenario"] = scenario_name(cfg.scenario);
  j["trap"] = {{"ion_count", cfg.trap.ion_count}, {"mass", cfg.trap.mass_kg},
               {"charge", cfg.trap.charge_c},     {"nu_x", cfg.trap.nu_x_hz},
               {"nu_y", cfg.trap.nu_y_hz},        {"nu_z", cfg.trap.nu_z_hz}};
  j["hilbert"] = {{"n_max", cfg.hilbert.n_max},
                  {"internal_levels", cfg.hilbert.internal_levels}};
  j["blockade"] = {{"site", cfg.blockade.site},
                   {"g", cfg.blockade.g},
                   {"detuning", cfg.blockade.detuning},
                   {"sideband", cfg.blockade.sideband == Sideband::Blue ? "bsb" : "rsb"},
                   {"phase", cfg.blockade.phase}};
  j["pulse_g"] = cfg.pulse_g;
  j["time"] = {{"start", cfg.time.start}, {"stop", cfg.time.stop}, {"step", cfg.time.step}};
  j["shots"] = cfg.shots;
  j["seed"] = cfg.seed;
  j["noise"] = {{"enabled", cfg.noise.enabled},
                {"pulse_infidelity_target", cfg.noise.pulse_infidelity_target},
                {"rsb_infidelity_target", cfg.noise.rsb_infidelity_target},
                {"nbar", cfg.noise.nbar}};
  j["ideal_mode"] = cfg.ideal_mode;
  j["hop_during_pulses"] = cfg.hop_during_pulses;
  j["probe"] = {{"points", cfg.probe.points}, {"periods", cfg.probe.periods}};
  j["readout"] = {{"stage1_flip", cfg.readout.stage1_flip},
                  {"stage2_flip", cfg.readout.stage2_flip}};
  return j;
}

inline nlohmann::json geometry_to_json(const TrapConfig& trap, const ChainGeometry& geom) {
  nlohmann::json j;
  j["ion_count"] = trap.ion_count;
  j["positions_m"] = geom.positions_m;
  std::vector<std::vector<double>> kappa(geom.size(), std::vector<double>(geom.size(), 0.0));
  for (int a = 0; a < geom.size(); ++a) {
    for (int b = 0; b < geom.size(); ++b) kappa[a][b] = geom.kappa(a, b);
  }
  j["kappa_rad_s"] = kappa;
  j["site_shift_rad_s"] = geom.site_shift;
  if (geom.size() == 2) {
    j["separation_m"] = geom.positions_m[1] - geom.positions_m[0];
    j["kappa_hz"] = geom.kappa(0, 1) / constants::two_pi;
  }
  return j;
}

inline nlohmann::json sequence_to_json(const PulseSequence& seq) {
  nlohmann::json steps = nlohmann::json::array();
  for (const auto& step : seq.steps) {
    nlohmann::json js;
    if (const auto* w = std::get_if<WaitEvent>(&step)) {
      js["type"] = "wait";
      js["duration_s"] = w->duration;
    } else {
      js["type"] = "pulses";
      nlohmann::json events = nlohmann::json::array();
      for (const auto& e : std::get<std::vector<PulseEvent>>(step)) {
        events.push_back({{"ion", e.ion},
                          {"transition", transition_name(e.transition)},
                          {"theta", e.theta},
                          {"phi", e.phi},
                          {"g", e.g},
                          {"detuning", e.detuning},
                          {"duration_s", e.duration()}});
      }
      js["events"] = events;
    }
    steps.push_back(js);
  }
  nlohmann::json j;
  j["steps"] = steps;
  j["total_duration_s"] = seq.total_duration();
  return j;
}

inline Transition parse_transition(const std::string& name) {
  for (Transition t : {Transition::CarrierDnUp, Transition::ShelveDnE0, Transition::Bsb,
                       Transition::Rsb}) {
    if (name == transition_name(t)) return t;
  }
  throw ValidationError("unknown transition: " + name);
}

inline PulseSequence sequence_from_json(const nlohmann::json& j) {
  PulseSequence seq;
  for (const auto& js : j.at("steps")) {
    const std::string type = js.at("type").get<std::string>();
    if (type == "wait") {
      seq.push(WaitEvent{js.at("duration_s").get<double>()});
    } else if (type == "pulses") {
      std::vector<PulseEvent> events;
      for (const auto& je : js.at("events")) {
        PulseEvent e;
        e.ion = je.at("ion").get<int>();
        e.transition = parse_transition(je.at("transition").get<std::string>());
        e.theta = je.at("theta").get<double>();
        e.phi = je.at("phi").get<double>();
        e.g = je.at("g").get<double>();
        e.detuning = je.value("detuning", 0.0);
        events.push_back(e);
      }
      seq.push(std::move(events));
    } else {
      throw ValidationError("sequence: unknown step type " + type);
    }
  }
  return seq;
}

}  // namespace phonsim
