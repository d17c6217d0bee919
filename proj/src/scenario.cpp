#include "bubble/scenario.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "bubble/keyvalue.hpp"

namespace bubble::harness {

namespace {

ScheduleEvent parse_event(const KeyValueLine& l) {
  std::istringstream in(l.key);
  std::string at, t, set, key, value, extra;
  const std::string where = "line " + std::to_string(l.line_number);
  if (!(in >> at >> t >> set >> key >> value) || (in >> extra) || at != "at" || set != "set")
    throw ConfigError(where + ": expected 'at <t> set <key> <value>'");
  ScheduleEvent e;
  e.line = l.line_number;
  e.time_s = parse_double(t, "schedule time (" + where + ")");
  if (key == "setpoint") {
    e.kind = ScheduleEvent::Kind::setpoint;
    e.hpa = parse_double(value, "setpoint (" + where + ")");
  } else if (key == "shear") {
    e.kind = ScheduleEvent::Kind::shear;
    const auto comma = value.find(',');
    if (comma == std::string::npos) throw ConfigError(where + ": shear value must be <dx>,<dy>");
    e.shear_mm = {parse_double(value.substr(0, comma), "shear dx (" + where + ")"),
                  parse_double(value.substr(comma + 1), "shear dy (" + where + ")")};
  } else {
    throw ConfigError(where + ": unknown schedule key '" + key + "'");
  }
  return e;
}

}  // namespace

std::string ScheduleEvent::describe() const {
  char buf[160];
  const char* src = line > 0 ? " (line " : "";
  if (kind == Kind::setpoint)
    std::snprintf(buf, sizeof buf, "at %.3f set setpoint %.1f%s", time_s, hpa, src);
  else
    std::snprintf(buf, sizeof buf, "at %.3f set shear %.3f,%.3f%s", time_s, shear_mm.x, shear_mm.y, src);
  std::string s = buf;
  if (line > 0) s += std::to_string(line) + ")";
  return s;
}

void Scenario::validate() const {
  if (!object_preset(object) && object != "none") throw ConfigError("unknown object preset '" + object + "'");
  if (grasp_force_n < 0.0) throw ConfigError("grasp_force must be >= 0");
  if (!(frame_period_s > 0.0)) throw ConfigError("frame_period must be positive");
  if (duration_s < 0.0) throw ConfigError("duration must be >= 0");
  if (!in_operating_band(initial_pressure_hpa)) throw ConfigError("initial_pressure outside operating band");
  if (depth_noise_mm < 0.0 || sensor_noise_hpa < 0.0) throw ConfigError("noise levels must be >= 0");
  double last = -1e300;
  for (const auto& e : events) {
    if (e.time_s < 0.0) throw ConfigError(e.describe() + ": negative time");
    if (e.time_s < last) throw ConfigError(e.describe() + ": schedule not time-sorted");
    last = e.time_s;
    if (e.kind == ScheduleEvent::Kind::setpoint && !in_operating_band(e.hpa))
      throw ConfigError(e.describe() + ": setpoint outside operating band");
  }
}

sim::BubbleConfig Scenario::bubble_config() const {
  return bubble_file.empty() ? sim::BubbleConfig{} : load_bubble_config(bubble_file);
}

Scenario Scenario::parse(const std::string& text, const std::string& base_dir) {
  std::vector<KeyValueLine> schedule;
  const auto kv = KeyValueFile::parse(text, &schedule);
  kv.reject_unknown({"name", "object", "grasp_force", "seed", "frame_period", "duration", "initial_pressure",
                     "depth_noise", "sensor_noise", "bubble"});
  Scenario s;
  s.name = kv.get_string("name", s.name);
  s.object = kv.get_string("object", s.object);
  s.grasp_force_n = kv.get_double("grasp_force", s.grasp_force_n);
  const long seed = kv.get_int("seed", static_cast<long>(s.seed));
  if (seed < 0) throw ConfigError("seed must be >= 0");
  s.seed = static_cast<std::uint64_t>(seed);
  s.frame_period_s = kv.get_double("frame_period", s.frame_period_s);
  s.duration_s = kv.get_double("duration", s.duration_s);
  s.initial_pressure_hpa = kv.get_double("initial_pressure", s.initial_pressure_hpa);
  s.depth_noise_mm = kv.get_double("depth_noise", s.depth_noise_mm);
  s.sensor_noise_hpa = kv.get_double("sensor_noise", s.sensor_noise_hpa);
  const std::string bubble = kv.get_string("bubble", "");
  if (!bubble.empty()) {
    const std::filesystem::path p(bubble);
    s.bubble_file = p.is_absolute() ? bubble : (std::filesystem::path(base_dir) / p).string();
  }
  for (const auto& l : schedule) s.events.push_back(parse_event(l));
  s.validate();
  return s;
}

Scenario Scenario::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open scenario " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str(), std::filesystem::path(path).parent_path().string());
}

std::optional<sim::ObjectPrimitive> object_preset(const std::string& name) {
  using sim::ObjectPrimitive;
  if (name == "mug") return ObjectPrimitive::cylinder(22.0);
  if (name == "sanitizer") return ObjectPrimitive::cylinder(15.0);
  if (name == "pen") return ObjectPrimitive::cylinder(5.0);
  if (name == "ball") return ObjectPrimitive::sphere(20.0);
  if (name == "plate-edge") {
    // Disc of radius 130 mm whose edge crosses the sensor 20 mm left of centre.
    return ObjectPrimitive::plane(130.0, {110.0, 0.0});
  }
  return std::nullopt;
}

std::vector<std::string> object_preset_names() { return {"none", "mug", "sanitizer", "pen", "plate-edge", "ball"}; }

sim::BubbleConfig load_bubble_config(const std::string& path) {
  const auto kv = KeyValueFile::load(path);
  kv.reject_unknown({"semi_axis_major_mm", "semi_axis_minor_mm", "rest_pressure_hpa", "rest_apex_height_mm",
                     "geometry_gain_mm_per_hpa", "geometry_quad_mm_per_hpa2", "profile_exponent", "marker_count",
                     "marker_seed", "marker_min_separation_px", "marker_sigma_px", "marker_radius_px", "image_width",
                     "image_height", "camera_standoff_mm", "field_margin", "grasp_stiffness_n_per_mm",
                     "force_quad_n_per_hpa2"});
  sim::BubbleConfig c;
  c.semi_axis_major_mm = kv.get_double("semi_axis_major_mm", c.semi_axis_major_mm);
  c.semi_axis_minor_mm = kv.get_double("semi_axis_minor_mm", c.semi_axis_minor_mm);
  c.rest_pressure_hpa = kv.get_double("rest_pressure_hpa", c.rest_pressure_hpa);
  c.rest_apex_height_mm = kv.get_double("rest_apex_height_mm", c.rest_apex_height_mm);
  c.geometry_gain_mm_per_hpa = kv.get_double("geometry_gain_mm_per_hpa", c.geometry_gain_mm_per_hpa);
  c.geometry_quad_mm_per_hpa2 = kv.get_double("geometry_quad_mm_per_hpa2", c.geometry_quad_mm_per_hpa2);
  c.profile_exponent = kv.get_double("profile_exponent", c.profile_exponent);
  c.marker_count = static_cast<int>(kv.get_int("marker_count", c.marker_count));
  c.marker_seed = static_cast<std::uint64_t>(kv.get_int("marker_seed", static_cast<long>(c.marker_seed)));
  c.marker_min_separation_px = kv.get_double("marker_min_separation_px", c.marker_min_separation_px);
  c.marker_sigma_px = kv.get_double("marker_sigma_px", c.marker_sigma_px);
  c.marker_radius_px = static_cast<int>(kv.get_int("marker_radius_px", c.marker_radius_px));
  c.image_width = static_cast<int>(kv.get_int("image_width", c.image_width));
  c.image_height = static_cast<int>(kv.get_int("image_height", c.image_height));
  c.camera_standoff_mm = kv.get_double("camera_standoff_mm", c.camera_standoff_mm);
  c.field_margin = kv.get_double("field_margin", c.field_margin);
  c.grasp_stiffness_n_per_mm = kv.get_double("grasp_stiffness_n_per_mm", c.grasp_stiffness_n_per_mm);
  c.force_quad_n_per_hpa2 = kv.get_double("force_quad_n_per_hpa2", c.force_quad_n_per_hpa2);
  c.validate();
  return c;
}

Scenario scenario_preset(const std::string& name) {
  Scenario s;
  s.name = name;
  using K = ScheduleEvent::Kind;
  if (name == "empty") {
    s.object = "none";
    s.duration_s = 2.0;
  } else if (name == "mug-shear") {
    s.object = "mug";
    s.duration_s = 3.0;
    s.events = {{K::shear, 1.0, 0.0, {1.0, 0.0}, 0}, {K::shear, 2.0, 0.0, {2.0, 0.0}, 0}};
  } else if (name == "pen-shear") {
    s.object = "pen";
    s.initial_pressure_hpa = 1070.0;
    s.duration_s = 2.0;
    s.events = {{K::shear, 1.0, 0.0, {0.0, 1.5}, 0}};
  } else if (name == "reinflate") {
    s.object = "sanitizer";
    s.duration_s = 4.0;
    s.events = {{K::shear, 1.0, 0.0, {1.0, 0.0}, 0},
                {K::setpoint, 2.0, 1070.0, {}, 0},
                {K::shear, 3.0, 0.0, {1.0, 0.0}, 0}};
  } else {
    throw ConfigError("unknown scenario preset '" + name + "'");
  }
  s.validate();
  return s;
}

std::vector<std::string> scenario_preset_names() { return {"empty", "mug-shear", "pen-shear", "reinflate"}; }

}  // namespace bubble::harness
