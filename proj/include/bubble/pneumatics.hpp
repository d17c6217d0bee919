#pragma once

// Pneumatic plant, tubing-offset correction and bang-bang setpoint control for the
// bubble pair. Everything advances on an explicit simulated clock.

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "bubble/common.hpp"

namespace bubble::pneumatics {

/// Plant constants. The bubble relaxes exponentially towards the supply ceiling while
/// the pump runs and towards ambient while the exhaust valve is open.
struct PlantProfile {
  double supply_ceiling_hpa = 1175.0;
  double inflate_rate_per_s = 0.16;
  double ambient_hpa = kAmbientHpa;
  double exhaust_rate_per_s = 0.12;
  double inflate_gradient_hpa = 6.0;  // line above bubble while pumping
  double deflate_gradient_hpa = 4.0;  // line below bubble while exhausting
  double bubble_volume_ml = 150.0;
  double sensor_noise_hpa = 0.3;      // standard deviation of the line sensor

  void validate() const;
  /// Reads any subset of the fields above (same names) from a key=value file.
  static PlantProfile load(const std::string& path);
  static PlantProfile parse(const std::string& text);
};

struct PlantState {
  double bubble_pressure_hpa = kAmbientHpa;
  double line_pressure_hpa = kAmbientHpa;
  bool pump_on = false;
  bool valve_open = false;
  double bubble_volume_ml = 150.0;
  double time_s = 0.0;
};

PlantState make_plant(double pressure_hpa, const PlantProfile& profile = {});

/// Signed line-minus-bubble gradient for an actuation.
double line_gradient(bool pump_on, bool valve_open, const PlantProfile& profile);

/// Exact integration of the first-order plant over dt with the state's actuation held.
PlantState step_plant(const PlantState& state, double dt, const PlantProfile& profile = {});

enum class FlowRegime { inflating, deflating, at_rest };

struct OffsetTable {
  std::vector<std::pair<FlowRegime, double>> entries;

  /// Table that exactly cancels the plant's tubing gradient.
  static OffsetTable matched(const PlantProfile& profile);
  std::optional<double> find(FlowRegime regime) const;
  /// Throws ConfigError unless all three regimes are present and at_rest is zero.
  void validate() const;
};

FlowRegime regime_of(bool pump_on, bool valve_open);

/// Bubble-pressure estimate from a line reading: line minus the regime's correction.
double offset_correct(double line_pressure_hpa, bool pump_on, bool valve_open, const OffsetTable& table);

struct ControllerConfig {
  double setpoint_hpa = 1050.0;
  double deadband_hpa = 2.0;
  double sample_period_s = 0.01;
  OffsetTable offset_table = OffsetTable::matched(PlantProfile{});
  double settle_hold_s = 0.5;         // time inside the band before reporting settled
  double deflate_extra_delay_s = 1.0;  // added to the hold after any deflation

  void validate() const;
};

struct Actuation {
  bool pump_on = false;
  bool valve_open = false;
  friend bool operator==(Actuation, Actuation) = default;
};

/// Bang-bang with deadband; never commands both actuators.
Actuation controller_step(double estimate_hpa, const ControllerConfig& config);

struct TelemetryRow {
  double time_s;
  int bubble_id;
  double true_hpa;
  double est_hpa;
  bool pump;
  bool valve;
};

std::string telemetry_csv_header();
std::string telemetry_csv_row(const TelemetryRow& row);

/// Independent controller + plant per bubble on one shared clock.
class PneumaticSystem {
 public:
  PneumaticSystem(PlantProfile profile, ControllerConfig controller, int channels, double initial_pressure_hpa,
                  std::uint64_t seed);

  int channels() const { return static_cast<int>(channels_.size()); }
  double time_s() const { return time_s_; }

  /// Throws DomainError for setpoints outside the band and ContractError for bad ids.
  void set_setpoint(int id, double hpa);
  /// Opens the exhaust and suspends control until the next setpoint.
  void vent(int id);

  /// Advances every channel by one sample period.
  void step();
  /// Advances by whole sample periods covering `seconds`.
  void advance(double seconds);
  /// Steps until every channel reports settled; returns false on timeout.
  bool run_until_settled(double timeout_s);

  bool settled(int id) const;
  bool all_settled() const;
  double setpoint(int id) const { return channel(id).config.setpoint_hpa; }
  double estimate(int id) const { return channel(id).estimate_hpa; }
  double true_pressure(int id) const { return channel(id).plant.bubble_pressure_hpa; }
  const PlantState& plant(int id) const { return channel(id).plant; }
  bool venting(int id) const { return channel(id).venting; }

  /// Called once per channel per step, after the actuation for the step is chosen.
  void set_telemetry_sink(std::function<void(const TelemetryRow&)> sink) { sink_ = std::move(sink); }

 private:
  struct Channel {
    PlantState plant;
    ControllerConfig config;
    double estimate_hpa = 0.0;
    double in_band_s = 0.0;
    bool deflated_since_setpoint = false;
    bool venting = false;
  };

  const Channel& channel(int id) const;
  Channel& channel(int id);

  PlantProfile profile_;
  std::vector<Channel> channels_;
  std::mt19937_64 rng_;
  std::normal_distribution<double> noise_{0.0, 1.0};
  double time_s_ = 0.0;
  std::function<void(const TelemetryRow&)> sink_;
};

}  // namespace bubble::pneumatics
