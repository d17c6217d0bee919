#pragma once

// Scenario files: flat `key = value` settings plus schedule lines
//
//   at <t> set setpoint <hPa>
//   at <t> set shear <dx>,<dy>      (cumulative object displacement, mm)
//
// Times are seconds after the initial reference capture.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "bubble/common.hpp"
#include "bubble/membrane.hpp"

namespace bubble::harness {

struct ScheduleEvent {
  enum class Kind { setpoint, shear };
  Kind kind = Kind::setpoint;
  double time_s = 0.0;
  double hpa = 0.0;
  Vec2 shear_mm{};
  int line = 0;  // source line, 0 for programmatic events

  std::string describe() const;
};

struct Scenario {
  std::string name = "unnamed";
  std::string object = "none";  // preset name, see object_preset()
  double grasp_force_n = 25.0;
  std::uint64_t seed = 1;
  double frame_period_s = 0.5;
  double duration_s = 2.0;
  double initial_pressure_hpa = 1050.0;
  double depth_noise_mm = 0.5;
  double sensor_noise_hpa = 0.3;
  std::string bubble_file;  // optional key=value BubbleConfig overrides
  std::vector<ScheduleEvent> events;

  /// Throws ConfigError for unsorted schedules, out-of-band setpoints and bad settings.
  void validate() const;
  sim::BubbleConfig bubble_config() const;

  static Scenario parse(const std::string& text, const std::string& base_dir = ".");
  static Scenario load(const std::string& path);
};

/// Object presets: none, mug (44 mm cylinder), sanitizer (30 mm cylinder), pen (10 mm
/// cylinder), plate-edge (large flat disc whose edge crosses the sensor), ball (40 mm sphere).
std::optional<sim::ObjectPrimitive> object_preset(const std::string& name);
std::vector<std::string> object_preset_names();

/// Reads BubbleConfig overrides from a key=value file (field names as in BubbleConfig).
sim::BubbleConfig load_bubble_config(const std::string& path);

/// Built-in scenarios: `empty`, `mug-shear`, `pen-shear`, `reinflate`.
Scenario scenario_preset(const std::string& name);
std::vector<std::string> scenario_preset_names();

}  // namespace bubble::harness
