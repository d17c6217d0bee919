#include "bubble/pneumatics.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "bubble/keyvalue.hpp"

namespace bubble::pneumatics {

void PlantProfile::validate() const {
  if (!(inflate_rate_per_s > 0.0) || !(exhaust_rate_per_s > 0.0)) throw ConfigError("plant rates must be positive");
  if (!(supply_ceiling_hpa > kBandHighHpa)) throw ConfigError("supply ceiling must exceed the operating band");
  if (!(ambient_hpa < kBandLowHpa)) throw ConfigError("ambient must lie below the operating band");
  if (inflate_gradient_hpa < 0.0 || deflate_gradient_hpa < 0.0) throw ConfigError("line gradients must be >= 0");
  if (!(bubble_volume_ml > 0.0)) throw ConfigError("bubble volume must be positive");
  if (sensor_noise_hpa < 0.0) throw ConfigError("sensor noise must be >= 0");
}

PlantProfile PlantProfile::parse(const std::string& text) {
  const auto kv = KeyValueFile::parse(text);
  kv.reject_unknown({"supply_ceiling_hpa", "inflate_rate_per_s", "ambient_hpa", "exhaust_rate_per_s",
                     "inflate_gradient_hpa", "deflate_gradient_hpa", "bubble_volume_ml", "sensor_noise_hpa"});
  PlantProfile p;
  p.supply_ceiling_hpa = kv.get_double("supply_ceiling_hpa", p.supply_ceiling_hpa);
  p.inflate_rate_per_s = kv.get_double("inflate_rate_per_s", p.inflate_rate_per_s);
  p.ambient_hpa = kv.get_double("ambient_hpa", p.ambient_hpa);
  p.exhaust_rate_per_s = kv.get_double("exhaust_rate_per_s", p.exhaust_rate_per_s);
  p.inflate_gradient_hpa = kv.get_double("inflate_gradient_hpa", p.inflate_gradient_hpa);
  p.deflate_gradient_hpa = kv.get_double("deflate_gradient_hpa", p.deflate_gradient_hpa);
  p.bubble_volume_ml = kv.get_double("bubble_volume_ml", p.bubble_volume_ml);
  p.sensor_noise_hpa = kv.get_double("sensor_noise_hpa", p.sensor_noise_hpa);
  p.validate();
  return p;
}

PlantProfile PlantProfile::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open plant profile " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

PlantState make_plant(double pressure_hpa, const PlantProfile& profile) {
  PlantState s;
  s.bubble_pressure_hpa = pressure_hpa;
  s.line_pressure_hpa = pressure_hpa;
  s.bubble_volume_ml = profile.bubble_volume_ml;
  return s;
}

double line_gradient(bool pump_on, bool valve_open, const PlantProfile& profile) {
  return (pump_on ? profile.inflate_gradient_hpa : 0.0) - (valve_open ? profile.deflate_gradient_hpa : 0.0);
}

PlantState step_plant(const PlantState& state, double dt, const PlantProfile& profile) {
  if (!(dt > 0.0)) throw DomainError("plant step requires dt > 0");
  PlantState next = state;
  const double k_in = state.pump_on ? profile.inflate_rate_per_s : 0.0;
  const double k_out = state.valve_open ? profile.exhaust_rate_per_s : 0.0;
  const double k = k_in + k_out;
  if (k > 0.0) {
    const double target = (k_in * profile.supply_ceiling_hpa + k_out * profile.ambient_hpa) / k;
    next.bubble_pressure_hpa = target + (state.bubble_pressure_hpa - target) * std::exp(-k * dt);
  }
  next.bubble_pressure_hpa = std::max(next.bubble_pressure_hpa, profile.ambient_hpa);
  next.line_pressure_hpa = next.bubble_pressure_hpa + line_gradient(state.pump_on, state.valve_open, profile);
  next.time_s = state.time_s + dt;
  return next;
}

OffsetTable OffsetTable::matched(const PlantProfile& profile) {
  return {{{FlowRegime::inflating, profile.inflate_gradient_hpa},
           {FlowRegime::deflating, -profile.deflate_gradient_hpa},
           {FlowRegime::at_rest, 0.0}}};
}

std::optional<double> OffsetTable::find(FlowRegime regime) const {
  for (const auto& [r, v] : entries)
    if (r == regime) return v;
  return std::nullopt;
}

void OffsetTable::validate() const {
  for (auto r : {FlowRegime::inflating, FlowRegime::deflating, FlowRegime::at_rest})
    if (!find(r)) throw ConfigError("offset table is missing a flow regime");
  if (*find(FlowRegime::at_rest) != 0.0) throw ConfigError("offset table must not correct the static regime");
}

FlowRegime regime_of(bool pump_on, bool valve_open) {
  if (pump_on && valve_open) throw ContractError("pump and exhaust valve both active");
  if (pump_on) return FlowRegime::inflating;
  if (valve_open) return FlowRegime::deflating;
  return FlowRegime::at_rest;
}

double offset_correct(double line_pressure_hpa, bool pump_on, bool valve_open, const OffsetTable& table) {
  const FlowRegime regime = regime_of(pump_on, valve_open);
  const auto entry = table.find(regime);
  if (!entry) throw ConfigError("offset table has no entry for the active flow regime");
  if (regime == FlowRegime::at_rest) return line_pressure_hpa;
  return line_pressure_hpa - *entry;
}

void ControllerConfig::validate() const {
  if (!(deadband_hpa > 0.0)) throw ConfigError("deadband must be positive");
  if (!(sample_period_s > 0.0)) throw ConfigError("sample period must be positive");
  if (!in_operating_band(setpoint_hpa)) throw ConfigError("setpoint outside operating band");
  if (settle_hold_s < 0.0 || deflate_extra_delay_s < 0.0) throw ConfigError("settle delays must be >= 0");
  offset_table.validate();
}

Actuation controller_step(double estimate_hpa, const ControllerConfig& config) {
  if (estimate_hpa < config.setpoint_hpa - config.deadband_hpa) return {true, false};
  if (estimate_hpa > config.setpoint_hpa + config.deadband_hpa) return {false, true};
  return {false, false};
}

std::string telemetry_csv_header() { return "time_s,bubble_id,true_hpa,est_hpa,pump,valve\n"; }

std::string telemetry_csv_row(const TelemetryRow& r) {
  char buf[160];
  std::snprintf(buf, sizeof buf, "%.3f,%d,%.4f,%.4f,%d,%d\n", r.time_s, r.bubble_id, r.true_hpa, r.est_hpa,
                r.pump ? 1 : 0, r.valve ? 1 : 0);
  return buf;
}

// ---------------------------------------------------------------- system

PneumaticSystem::PneumaticSystem(PlantProfile profile, ControllerConfig controller, int channels,
                                 double initial_pressure_hpa, std::uint64_t seed)
    : profile_(profile), rng_(seed) {
  profile_.validate();
  controller.validate();
  if (channels <= 0) throw ConfigError("need at least one pneumatic channel");
  if (initial_pressure_hpa < profile_.ambient_hpa || initial_pressure_hpa > profile_.supply_ceiling_hpa)
    throw DomainError("initial pressure outside the plant's reachable range");
  channels_.resize(static_cast<std::size_t>(channels));
  for (auto& c : channels_) {
    c.plant = make_plant(initial_pressure_hpa, profile_);
    c.config = controller;
    c.estimate_hpa = initial_pressure_hpa;
  }
}

const PneumaticSystem::Channel& PneumaticSystem::channel(int id) const {
  if (id < 0 || id >= channels()) throw ContractError("unknown bubble id " + std::to_string(id));
  return channels_[static_cast<std::size_t>(id)];
}

PneumaticSystem::Channel& PneumaticSystem::channel(int id) {
  if (id < 0 || id >= channels()) throw ContractError("unknown bubble id " + std::to_string(id));
  return channels_[static_cast<std::size_t>(id)];
}

void PneumaticSystem::set_setpoint(int id, double hpa) {
  auto& c = channel(id);
  if (!in_operating_band(hpa)) throw DomainError("setpoint outside operating band");
  c.config.setpoint_hpa = hpa;
  c.venting = false;
  c.in_band_s = 0.0;
  c.deflated_since_setpoint = false;
}

void PneumaticSystem::vent(int id) {
  auto& c = channel(id);
  c.venting = true;
  c.in_band_s = 0.0;
}

void PneumaticSystem::step() {
  const double dt = channels_.front().config.sample_period_s;
  for (std::size_t i = 0; i < channels_.size(); ++i) {
    auto& c = channels_[i];
    const double line = c.plant.line_pressure_hpa + profile_.sensor_noise_hpa * noise_(rng_);
    c.estimate_hpa = offset_correct(line, c.plant.pump_on, c.plant.valve_open, c.config.offset_table);
    const Actuation act = c.venting ? Actuation{false, true} : controller_step(c.estimate_hpa, c.config);
    if (act.valve_open) c.deflated_since_setpoint = true;
    const bool in_band = std::abs(c.estimate_hpa - c.config.setpoint_hpa) <= c.config.deadband_hpa;
    c.in_band_s = (!c.venting && in_band && !act.pump_on && !act.valve_open) ? c.in_band_s + dt : 0.0;
    c.plant.pump_on = act.pump_on;
    c.plant.valve_open = act.valve_open;
    if (sink_) sink_({time_s_, static_cast<int>(i), c.plant.bubble_pressure_hpa, c.estimate_hpa, act.pump_on,
                      act.valve_open});
    c.plant = step_plant(c.plant, dt, profile_);
  }
  time_s_ = channels_.front().plant.time_s;
}

void PneumaticSystem::advance(double seconds) {
  const double dt = channels_.front().config.sample_period_s;
  const auto steps = static_cast<long>(std::llround(seconds / dt));
  for (long s = 0; s < steps; ++s) step();
}

bool PneumaticSystem::run_until_settled(double timeout_s) {
  const double dt = channels_.front().config.sample_period_s;
  const auto max_steps = static_cast<long>(std::ceil(timeout_s / dt));
  for (long s = 0; s < max_steps; ++s) {
    if (all_settled()) return true;
    step();
  }
  return all_settled();
}

bool PneumaticSystem::settled(int id) const {
  const auto& c = channel(id);
  if (c.venting) return false;
  const double hold = c.config.settle_hold_s + (c.deflated_since_setpoint ? c.config.deflate_extra_delay_s : 0.0);
  return c.in_band_s >= hold - 1e-9;
}

bool PneumaticSystem::all_settled() const {
  for (int i = 0; i < channels(); ++i)
    if (!settled(i)) return false;
  return true;
}

}  // namespace bubble::pneumatics
