// bubblectl: scenario runs, replay, experiment sweeps, gain calibration and the
// pneumatics command console.

#include <CLI11.hpp>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "bubble/frame_io.hpp"
#include "bubble/harness.hpp"
#include "bubble/keyvalue.hpp"
#include "bubble/protocol.hpp"

namespace fs = std::filesystem;
using namespace bubble;

namespace {

harness::Scenario resolve_scenario(const std::string& arg) {
  if (fs::exists(arg)) return harness::Scenario::load(arg);
  return harness::scenario_preset(arg);
}

void write_text(const fs::path& path, const std::string& text) {
  io::write_file(path.string(), text);
  std::cout << "wrote " << path.string() << "\n";
}

int cmd_run(const std::string& scenario_arg, const std::string& out, const std::string& plant_file,
            int flow_window) {
  const auto scenario = resolve_scenario(scenario_arg);
  harness::RunOptions opt;
  if (!plant_file.empty()) opt.plant = pneumatics::PlantProfile::load(plant_file);
  opt.pipeline.flow.window = flow_window;
  const auto run = harness::run_scenario(scenario, opt);
  for (const auto& l : run.log) std::cout << "  " << l << "\n";
  for (const auto& a : run.audits) std::cout << (a.passed ? "PASS " : "FAIL ") << a.name << ": " << a.detail << "\n";
  std::cout << run.frames << " frames, " << run.references << " references\n";
  if (!out.empty()) harness::write_run(run, out);
  return run.ok() ? 0 : 1;
}

int cmd_replay(const std::string& record, const std::string& out, int flow_window, const std::string& compare) {
  perception::PipelineConfig cfg;
  cfg.flow.window = flow_window;
  const std::string csv = harness::replay(io::read_file(record), cfg);
  if (out.empty())
    std::cout << csv;
  else
    write_text(out, csv);
  if (!compare.empty()) {
    const bool same = io::read_file(compare) == csv;
    std::cerr << (same ? "telemetry identical to " : "telemetry differs from ") << compare << "\n";
    return same ? 0 : 1;
  }
  return 0;
}

int cmd_sweep(const std::string& which, const std::string& out, const std::string& plant_file, bool wide) {
  harness::SweepOptions opt;
  if (!plant_file.empty()) opt.plant = pneumatics::PlantProfile::load(plant_file);
  const sim::BubbleConfig config;
  const fs::path dir = out.empty() ? fs::path(".") : fs::path(out);
  fs::create_directories(dir);
  bool ok = true;
  auto emit = [&](const std::string& name, const std::string& csv) {
    write_text(dir / (name + ".csv"), csv);
    write_text(dir / (name + ".gp"), harness::gnuplot_script(name));
  };
  if (which == "fig6" || which == "all") {
    const auto r = harness::fig6_sweep(config, opt);
    emit("fig6", harness::fig6_csv(r));
    std::printf("fig6: c2 = %.4e mm/hPa^2 (configured %.4e), monotone %s, noisy monotone %s\n", r.fit.c2,
                config.geometry_quad_mm_per_hpa2, r.monotone ? "yes" : "no", r.noisy_monotone ? "yes" : "no");
    ok = ok && r.monotone && r.noisy_monotone;
  }
  if (which == "fig7" || which == "all") {
    const auto r = harness::fig7_sweep(config, opt);
    emit("fig7", harness::fig7_csv(r));
    std::printf("fig7: c2 = %.5f N/hPa^2 (configured %.5f), width std %.2e mm\n", r.fit.c2,
                config.force_quad_n_per_hpa2, r.width_stddev_mm);
  }
  if (which == "fig8" || which == "all") {
    auto r = harness::fig8_sweep(config, opt);
    const std::string keep = wide ? "wide-grasp" : "standard";
    harness::Fig8Result shown = r;
    std::erase_if(shown.cells, [&](const harness::Fig8Cell& c) { return c.variant != keep; });
    emit("fig8", harness::fig8_csv(shown));
    for (const auto& c : shown.cells)
      std::printf("fig8 %-10s %-10s %.0f hPa: truth %zu px, mask %zu px\n", c.object.c_str(), c.variant.c_str(),
                  c.setpoint_hpa, c.truth_area_px, c.mask_area_px);
    std::printf("fig8: monotone %s, pen empty at low pressure on wide grasp %s\n",
                r.monotone_truth && r.monotone_mask ? "yes" : "no", r.pen_empty_wide_low ? "yes" : "no");
    ok = ok && r.monotone_truth && r.pen_empty_wide_low;
  }
  if (which != "fig6" && which != "fig7" && which != "fig8" && which != "all")
    throw ConfigError("unknown sweep '" + which + "'");
  return ok ? 0 : 1;
}

// CSV rows: fx,fy,ft,sum_dx,sum_dy,torsion (a header line is skipped).
int cmd_calibrate(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path);
  std::vector<perception::CalibrationSample> samples;
  std::string row;
  while (std::getline(in, row)) {
    const std::string t = trim(row);
    if (t.empty() || t[0] == '#' || !(std::isdigit(static_cast<unsigned char>(t[0])) || t[0] == '-' || t[0] == '.'))
      continue;
    std::stringstream ss(t);
    std::string cell;
    double v[6];
    int n = 0;
    while (n < 6 && std::getline(ss, cell, ',')) v[n++] = parse_double(cell, "calibration value");
    if (n != 6) throw ConfigError("calibration rows need six columns");
    samples.push_back({{v[0], v[1], v[2]}, {v[3], v[4], v[5]}});
  }
  const auto r = perception::calibrate_gain(samples);
  std::printf("K =\n");
  for (int i = 0; i < 3; ++i) std::printf("  %12.6g %12.6g %12.6g\n", r.gain.k[3 * i], r.gain.k[3 * i + 1], r.gain.k[3 * i + 2]);
  std::printf("rms residual %.6g over %zu scenarios\n", r.rms_residual, samples.size());
  return 0;
}

int cmd_protocol(const std::string& plant_file, double tick, std::uint64_t seed) {
  pneumatics::PlantProfile plant;
  if (!plant_file.empty()) plant = pneumatics::PlantProfile::load(plant_file);
  pneumatics::PneumaticSystem system(plant, {}, 2, 1050.0, seed);
  protocol::CommandConsole console(system, tick);
  std::string l;
  while (std::getline(std::cin, l)) {
    std::cout << console.handle(l + "\n") << std::flush;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Soft-bubble shear estimation toolkit"};
  app.require_subcommand(1);

  std::string out, plant_file;
  int flow_window = 15;

  auto* run = app.add_subcommand("run", "Run a scenario file or preset (" +
                                            [] {
                                              std::string s;
                                              for (const auto& n : harness::scenario_preset_names())
                                                s += (s.empty() ? "" : ", ") + n;
                                              return s;
                                            }() +
                                            ")");
  std::string scenario_arg;
  run->add_option("scenario", scenario_arg, "Scenario file or preset name")->required();
  run->add_option("--out", out, "Directory for record, telemetry and audit output");
  run->add_option("--plant-profile", plant_file, "key=value plant constants");
  run->add_option("--flow-window", flow_window, "Flow averaging window (odd)");

  auto* rep = app.add_subcommand("replay", "Re-run perception over a stored record");
  std::string record, compare;
  rep->add_option("record", record, "Record file")->required()->check(CLI::ExistingFile);
  rep->add_option("--out", out, "Telemetry CSV output (stdout when omitted)");
  rep->add_option("--flow-window", flow_window, "Flow averaging window (odd)");
  rep->add_option("--compare", compare, "Telemetry CSV that must match exactly")->check(CLI::ExistingFile);

  auto* sweep = app.add_subcommand("sweep", "Experiment sweeps: fig6, fig7, fig8 or all");
  std::string which;
  bool wide = false;
  sweep->add_option("which", which, "fig6 | fig7 | fig8 | all")->required();
  sweep->add_option("--out", out, "Output directory for CSV and gnuplot scripts");
  sweep->add_option("--plant-profile", plant_file, "key=value plant constants");
  sweep->add_flag("--wide-grasp", wide, "fig8: report the wide-grasp variant");

  auto* cal = app.add_subcommand("calibrate", "Fit the shear gain from fx,fy,ft,sum_dx,sum_dy,torsion rows");
  std::string cal_file;
  cal->add_option("csv", cal_file, "Calibration CSV")->required()->check(CLI::ExistingFile);

  auto* proto = app.add_subcommand("protocol", "Pressure command console on stdin/stdout");
  double tick = 1.0;
  std::uint64_t seed = 1;
  proto->add_option("--plant-profile", plant_file, "key=value plant constants");
  proto->add_option("--tick", tick, "Simulated seconds advanced per command line");
  proto->add_option("--seed", seed, "Sensor noise seed");

  CLI11_PARSE(app, argc, argv);
  try {
    if (*run) return cmd_run(scenario_arg, out, plant_file, flow_window);
    if (*rep) return cmd_replay(record, out, flow_window, compare);
    if (*sweep) return cmd_sweep(which, out, plant_file, wide);
    if (*cal) return cmd_calibrate(cal_file);
    if (*proto) return cmd_protocol(plant_file, tick, seed);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
