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

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "phonsim/config.hpp"

namespace {

using namespace phonsim;

ConfigTable load_table(const std::string& path) {
  if (path.empty()) return {};
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open config file: " + path);
  return parse_config(in);
}

void write_text(const std::string& path, const std::string& text) {
  if (path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot open output file: " + path);
  out << text;
}

std::string resolve_scenario_name(std::string name, bool blockade_flag) {
  for (const char* base : {"fig2", "fig3", "fig4"}) {
    if (name == base) return name + std::string(blockade_flag ? "_blockade" : "_free");
  }
  if (blockade_flag) {
    const auto pos = name.rfind("_free");
    if (pos != std::string::npos) return name.substr(0, pos) + "_blockade";
  }
  return name;
}

int run_geometry(const std::string& config_path, const std::string& out_path) {
  const ConfigTable table = load_table(config_path);
  const ScenarioConfig cfg = scenario_config_from_table(table);
  const ChainGeometry geom = ChainGeometry::from_trap(cfg.trap);
  write_text(out_path, geometry_to_json(cfg.trap, geom).dump(2) + "\n");
  return 0;
}

int run_scenario_cmd(const std::string& name, bool blockade, bool ideal,
                     const std::string& config_path, std::string out_path,
                     std::optional<std::uint64_t> seed) {
  const ConfigTable table = load_table(config_path);
  ScenarioConfig cfg = scenario_config_from_table(table, resolve_scenario_name(name, blockade));
  if (ideal) cfg.ideal_mode = true;
  if (seed) cfg.seed = *seed;
  cfg.validate();

  const TimeSeries ts = run_scenario(cfg);
  if (out_path.empty()) out_path = std::string(scenario_name(cfg.scenario)) + ".csv";
  write_text(out_path, ts.to_csv());

  if (out_path != "-") {
    nlohmann::json meta;
    meta["config"] = scenario_config_to_json(cfg);
    meta["geometry"] = geometry_to_json(cfg.trap, ChainGeometry::from_trap(cfg.trap));
    meta["output"] = out_path;
    nlohmann::json cols = nlohmann::json::array();
    cols.push_back("time_s");
    for (const auto& [n, v] : ts.columns) cols.push_back(n);
    meta["columns"] = cols;
    meta["max_cutoff_population"] = ts.max_cutoff_population;
    write_text(out_path + ".meta.json", meta.dump(2) + "\n");
    std::cout << "wrote " << out_path << " (" << ts.times.size() << " rows) and " << out_path
              << ".meta.json\n";
  }
  return 0;
}

int run_sweep(const std::vector<double>& g_values, const std::string& config_path,
              std::string out_path, std::optional<std::uint64_t> seed) {
  const ConfigTable table = load_table(config_path);
  ScenarioConfig cfg = scenario_config_from_table(table);
  if (seed) cfg.seed = *seed;
  const auto points = sweep_blockade(cfg, g_values);
  std::ostringstream csv;
  csv << "g_rad_s,max_leakage,mean_leakage\n";
  for (const auto& p : points) {
    csv << format_double(p.g) << "," << format_double(p.max_leakage) << ","
        << format_double(p.mean_leakage) << "\n";
  }
  if (out_path.empty()) out_path = "sweep.csv";
  write_text(out_path, csv.str());
  if (out_path != "-") std::cout << "wrote " << out_path << "\n";
  return 0;
}

int run_fit(const std::string& in_path, int levels, const std::string& out_path) {
  RabiTrace trace;
  if (in_path == "-") {
    trace = RabiTrace::from_csv(std::cin);
  } else {
    std::ifstream in(in_path);
    if (!in) throw ValidationError("cannot open trace file: " + in_path);
    trace = RabiTrace::from_csv(in);
  }
  const RabiFitResult fit = rabi_fit(trace, levels);
  nlohmann::json j;
  j["p"] = fit.dist.p;
  j["g_rad_s"] = fit.g;
  j["gamma_1_s"] = fit.gamma;
  j["rms_residual"] = fit.rms_residual;
  j["identifiable"] = fit.identifiable;
  j["note"] = fit.note;
  write_text(out_path, j.dump(2) + "\n");
  return 0;
}

int run_sequence(const std::string& name, double g, const std::string& out_path) {
  PulseSequence seq;
  if (name == "composite_cp") {
    seq = composite_cp(0, g);
  } else if (name == "fig2_prep") {
    seq = prep_sequence(PrepKind::Fig2, HilbertSpec{2, 4, 2}, g);
  } else if (name == "fig3_prep") {
    seq = prep_sequence(PrepKind::Fig3, HilbertSpec{2, 4, 2}, g);
  } else if (name == "pnr_map") {
    seq = pnr_map_sequence(std::vector<int>{0, 1}, g);
  } else {
    throw ValidationError("unknown sequence: " + name +
                          " (expected composite_cp, fig2_prep, fig3_prep or pnr_map)");
  }
  write_text(out_path, sequence_to_json(seq).dump(2) + "\n");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Local-phonon dynamics simulator for trapped-ion chains"};
  app.require_subcommand(1);

  std::string config_path, out_path, name, in_path;
  bool blockade = false, ideal = false, dump = false;
  std::optional<std::uint64_t> seed;
  std::vector<double> g_values;
  int levels = 3;
  double seq_g = phonsim::constants::two_pi * 20e3;

  auto* geometry = app.add_subcommand("geometry", "Equilibrium positions and hopping rates");
  geometry->add_option("--config", config_path, "Config file (TOML-style key/value)");
  geometry->add_option("--out", out_path, "Output file, or - for stdout")->default_val("-");

  auto* scenario = app.add_subcommand("scenario", "Run an experiment pipeline");
  scenario->add_option("name", name, "fig2|fig3|fig4|custom or a full name like fig3_blockade")
      ->required();
  scenario->add_flag("--blockade", blockade, "Enable the blockade beam variant");
  scenario->add_flag("--ideal", ideal, "Skip noise and shot sampling");
  scenario->add_option("--config", config_path, "Config file");
  scenario->add_option("--out", out_path, "Output CSV (default <scenario>.csv, - for stdout)");
  scenario->add_option("--seed", seed, "Override the sampling seed");

  auto* sweep = app.add_subcommand("sweep", "Blockade-strength leakage sweep");
  sweep->add_option("--g-list", g_values, "Blockade strengths in rad/s")
      ->required()
      ->delimiter(',');
  sweep->add_option("--config", config_path, "Config file");
  sweep->add_option("--out", out_path, "Output CSV (default sweep.csv)");
  sweep->add_option("--seed", seed, "Override the base seed");

  auto* fit = app.add_subcommand("fit-rabi", "Fit Fock populations from a Rabi trace CSV");
  fit->add_option("--in", in_path, "Trace CSV (time_s,p_down,sigma), - for stdin")->required();
  fit->add_option("--levels", levels, "Number of Fock levels to fit")->default_val(3);
  fit->add_option("--out", out_path, "Output JSON, - for stdout")->default_val("-");

  auto* sequence = app.add_subcommand("sequence", "Dump a built-in pulse sequence as JSON");
  sequence->add_option("name", name, "composite_cp|fig2_prep|fig3_prep|pnr_map")->required();
  sequence->add_flag("--dump", dump, "Dump the sequence (default action)");
  sequence->add_option("--g", seq_g, "Half-Rabi frequency in rad/s");
  sequence->add_option("--out", out_path, "Output file, or - for stdout")->default_val("-");

  try {
    app.parse(argc, argv);
    if (geometry->parsed()) return run_geometry(config_path, out_path);
    if (scenario->parsed()) {
      return run_scenario_cmd(name, blockade, ideal, config_path, out_path, seed);
    }
    if (sweep->parsed()) return run_sweep(g_values, config_path, out_path, seed);
    if (fit->parsed()) return run_fit(in_path, levels, out_path);
    if (sequence->parsed()) return run_sequence(name, seq_g, out_path);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
