#pragma once

// Closed-loop runs: pneumatics drive the simulated membrane, frames are encoded into a
// run record, and the perception pipeline consumes the decoded bytes.

#include <string>
#include <string_view>
#include <vector>

#include "bubble/fit.hpp"
#include "bubble/perception.hpp"
#include "bubble/pneumatics.hpp"
#include "bubble/scenario.hpp"

namespace bubble::harness {

struct RunOptions {
  perception::PipelineConfig pipeline;
  pneumatics::PlantProfile plant;  // sensor noise is taken from the scenario
  pneumatics::ControllerConfig controller;
  double settle_timeout_s = 60.0;
};

struct AuditResult {
  std::string name;
  bool passed = true;
  std::string detail;
};

struct RunRecord {
  std::string record;            // BBLR1 entries
  std::string contact_truth;     // one BBLC1 grid per F entry
  std::string perception_csv;
  std::string pneumatics_csv;
  std::vector<AuditResult> audits;
  std::vector<std::string> log;
  std::string abort_reason;      // non-empty when the run stopped early
  int frames = 0;
  int references = 0;
  std::vector<std::size_t> mask_areas;
  std::vector<double> mask_iou;  // per frame, against the simulator contact set

  bool ok() const;
};

RunRecord run_scenario(const Scenario& scenario, const RunOptions& options = {});

/// Re-runs perception over a stored record and returns the telemetry CSV.
std::string replay(std::string_view record, const perception::PipelineConfig& config = {});

/// Intersection over union of two binary grids (1 when both are empty).
double mask_iou(const Grid<std::uint8_t>& a, const Grid<std::uint8_t>& b);

/// Writes record.bbl, contact.bblc, perception.csv, pneumatics.csv and audit.txt into `dir`.
void write_run(const RunRecord& run, const std::string& dir);

// ---------------------------------------------------------------- experiment sweeps

struct SweepOptions {
  pneumatics::PlantProfile plant;
  double depth_noise_mm = 0.5;  // only for the noisy monotonicity check in fig6
  std::uint64_t seed = 7;
  double grasp_force_n = 25.0;
  perception::PipelineConfig pipeline;
};

struct Fig6Result {
  std::vector<double> setpoints, pressures, mean_depth_mm, noisy_mean_depth_mm;
  QuadraticFit fit;
  bool monotone = false;
  bool noisy_monotone = false;
};

struct Fig7Result {
  std::vector<double> setpoints, pressures, force_n, widths_mm;
  double partner_pressure_hpa = 0.0;
  QuadraticFit fit;
  double width_stddev_mm = 0.0;
};

struct Fig8Cell {
  std::string object;
  std::string variant;  // standard | wide-grasp
  double setpoint_hpa = 0.0;
  double pressure_hpa = 0.0;
  double width_mm = 0.0;
  std::size_t truth_area_px = 0;
  std::size_t mask_area_px = 0;
  double iou = 0.0;
};

struct Fig8Result {
  std::vector<Fig8Cell> cells;
  bool monotone_truth = false;     // standard variant, every object
  bool monotone_mask = false;      // standard variant, every object
  bool pen_empty_wide_low = false;
};

Fig6Result fig6_sweep(const sim::BubbleConfig& config, const SweepOptions& options = {});
Fig7Result fig7_sweep(const sim::BubbleConfig& config, const SweepOptions& options = {});
Fig8Result fig8_sweep(const sim::BubbleConfig& config, const SweepOptions& options = {});

std::string fig6_csv(const Fig6Result& r);
std::string fig7_csv(const Fig7Result& r);
std::string fig8_csv(const Fig8Result& r);
/// gnuplot script reading `<name>.csv` from the same directory.
std::string gnuplot_script(const std::string& name);

}  // namespace bubble::harness
