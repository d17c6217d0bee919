#include "bubble/membrane.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "bubble/morphology.hpp"
#include "kernel_detail.hpp"

namespace bubble::sim {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kGripperMaxWidthMm = 66.0;
constexpr double kMarkerMaxRho = 0.98;

void require_band(double pressure_hpa) {
  if (!in_operating_band(pressure_hpa))
    throw DomainError("pressure " + std::to_string(pressure_hpa) + " hPa outside operating band [1010, 1090]");
}

// Dart throwing with a radial density falloff and a hard minimum separation.
std::vector<Vec2> place_markers(const BubbleConfig& c, double scale) {
  std::mt19937_64 rng(c.marker_seed);
  std::uniform_real_distribution<double> ux(-c.semi_axis_major_mm, c.semi_axis_major_mm);
  std::uniform_real_distribution<double> uy(-c.semi_axis_minor_mm, c.semi_axis_minor_mm);
  std::uniform_real_distribution<double> u01(0.0, 1.0);

  const double sep = c.marker_min_separation_px * scale;
  const double cell = std::max(sep, 1.0);
  const int gw = static_cast<int>(std::ceil(2 * c.semi_axis_major_mm / cell)) + 1;
  const int gh = static_cast<int>(std::ceil(2 * c.semi_axis_minor_mm / cell)) + 1;
  std::vector<std::vector<int>> buckets(static_cast<std::size_t>(gw) * gh);
  auto bucket_of = [&](Vec2 p) {
    return std::pair{std::clamp(static_cast<int>((p.x + c.semi_axis_major_mm) / cell), 0, gw - 1),
                     std::clamp(static_cast<int>((p.y + c.semi_axis_minor_mm) / cell), 0, gh - 1)};
  };

  std::vector<Vec2> out;
  out.reserve(c.marker_count);
  const long max_attempts = 2000L * c.marker_count;
  for (long attempt = 0; attempt < max_attempts && static_cast<int>(out.size()) < c.marker_count; ++attempt) {
    const Vec2 p{ux(rng), uy(rng)};
    const double rho2 = (p.x / c.semi_axis_major_mm) * (p.x / c.semi_axis_major_mm) +
                        (p.y / c.semi_axis_minor_mm) * (p.y / c.semi_axis_minor_mm);
    if (rho2 >= kMarkerMaxRho * kMarkerMaxRho) continue;
    if (u01(rng) > 1.0 - 0.5 * rho2) continue;
    const auto [bx, by] = bucket_of(p);
    bool clear = true;
    for (int j = std::max(0, by - 1); clear && j <= std::min(gh - 1, by + 1); ++j)
      for (int i = std::max(0, bx - 1); clear && i <= std::min(gw - 1, bx + 1); ++i)
        for (int idx : buckets[static_cast<std::size_t>(j) * gw + i])
          if ((out[idx] - p).norm() < sep) {
            clear = false;
            break;
          }
    if (!clear) continue;
    buckets[static_cast<std::size_t>(by) * gw + bx].push_back(static_cast<int>(out.size()));
    out.push_back(p);
  }
  if (static_cast<int>(out.size()) < c.marker_count)
    throw ConfigError("cannot place " + std::to_string(c.marker_count) + " markers at the requested separation");
  return out;
}

double rim_distance_mm(const BubbleModel& m, Vec2 p) {
  const double rho = m.elliptic_radius(p);
  if (rho >= 1.0) return 0.0;
  if (rho <= 0.0) return std::min(m.config().semi_axis_major_mm, m.config().semi_axis_minor_mm);
  return p.norm() * (1.0 / rho - 1.0);
}

}  // namespace

// ---------------------------------------------------------------- configuration

void BubbleConfig::validate() const {
  if (!(semi_axis_minor_mm > 0.0) || semi_axis_major_mm < semi_axis_minor_mm)
    throw ConfigError("semi axes must satisfy major >= minor > 0");
  if (!(rest_apex_height_mm > 0.0)) throw ConfigError("rest apex height must be positive");
  if (!in_operating_band(rest_pressure_hpa)) throw ConfigError("rest pressure outside operating band");
  if (marker_count <= 0) throw ConfigError("marker_count must be positive");
  if (image_width < 8 || image_height < 8) throw ConfigError("image too small");
  if (!(camera_standoff_mm > 0.0)) throw ConfigError("camera standoff must be positive");
  if (!(profile_exponent > 1.0)) throw ConfigError("profile exponent must exceed 1");
  if (!(field_margin >= 1.0)) throw ConfigError("field margin must be >= 1");
  if (!(marker_sigma_px > 0.0) || marker_radius_px < 1 || marker_min_separation_px < 0.0)
    throw ConfigError("invalid marker splat parameters");
  if (!(grasp_stiffness_n_per_mm > 0.0)) throw ConfigError("grasp stiffness must be positive");
}

double BubbleConfig::mm_per_pixel() const {
  return field_margin * std::max(2.0 * semi_axis_major_mm / image_width, 2.0 * semi_axis_minor_mm / image_height);
}

// ---------------------------------------------------------------- objects

ObjectPrimitive ObjectPrimitive::plane(double plate_radius_mm, Vec2 center_mm) {
  ObjectPrimitive o;
  o.shape = Shape::plane;
  o.plate_radius_mm = plate_radius_mm;
  o.center_mm = center_mm;
  return o;
}

ObjectPrimitive ObjectPrimitive::cylinder(double radius_mm, Vec2 center_mm, double yaw_rad) {
  ObjectPrimitive o;
  o.shape = Shape::cylinder;
  o.radius_mm = radius_mm;
  o.center_mm = center_mm;
  o.yaw_rad = yaw_rad;
  return o;
}

ObjectPrimitive ObjectPrimitive::sphere(double radius_mm, Vec2 center_mm) {
  ObjectPrimitive o;
  o.shape = Shape::sphere;
  o.radius_mm = radius_mm;
  o.center_mm = center_mm;
  return o;
}

void ObjectPrimitive::validate() const {
  if (shape == Shape::plane) {
    if (!(plate_radius_mm > 0.0) || !(plate_thickness_mm > 0.0)) throw DomainError("plate dimensions must be positive");
  } else if (!(radius_mm > 0.0)) {
    throw DomainError("object radius must be positive");
  }
}

double ObjectPrimitive::thickness_mm() const {
  return shape == Shape::plane ? plate_thickness_mm : 2.0 * radius_mm;
}

double ObjectPrimitive::relief_mm(Vec2 p) const {
  const Vec2 d = p - center_mm;
  switch (shape) {
    case Shape::plane:
      return d.norm() <= plate_radius_mm ? 0.0 : kInf;
    case Shape::cylinder: {
      const double u = d.x * std::cos(yaw_rad) - d.y * std::sin(yaw_rad);
      if (std::abs(u) >= radius_mm) return kInf;
      return radius_mm - std::sqrt(radius_mm * radius_mm - u * u);
    }
    case Shape::sphere: {
      const double r2 = d.x * d.x + d.y * d.y;
      if (r2 >= radius_mm * radius_mm) return kInf;
      return radius_mm - std::sqrt(radius_mm * radius_mm - r2);
    }
  }
  return kInf;
}

// ---------------------------------------------------------------- model

BubbleModel::BubbleModel(BubbleConfig config) : config_(std::move(config)) {
  config_.validate();
  scale_ = config_.mm_per_pixel();
  unit_profile_ = Grid<double>(config_.image_width, config_.image_height);
  double sum = 0.0;
  for (int y = 0; y < config_.image_height; ++y)
    for (int x = 0; x < config_.image_width; ++x) {
      const double s = unit_profile(pixel_to_mm(x, y));
      unit_profile_(x, y) = s;
      sum += s;
    }
  profile_mean_ = sum / static_cast<double>(unit_profile_.size());
  if (!(profile_mean_ > 0.0)) throw ConfigError("membrane does not cover any pixel");
  markers_ = place_markers(config_, scale_);
}

Vec2 BubbleModel::pixel_to_mm(double px, double py) const {
  return {(px + 0.5 - 0.5 * config_.image_width) * scale_, (py + 0.5 - 0.5 * config_.image_height) * scale_};
}

Vec2 BubbleModel::mm_to_pixel(Vec2 p) const {
  return {p.x / scale_ + 0.5 * config_.image_width - 0.5, p.y / scale_ + 0.5 * config_.image_height - 0.5};
}

double BubbleModel::elliptic_radius(Vec2 p) const {
  const double u = p.x / config_.semi_axis_major_mm, v = p.y / config_.semi_axis_minor_mm;
  return std::sqrt(u * u + v * v);
}

double BubbleModel::unit_profile(Vec2 p) const {
  const double rho = elliptic_radius(p);
  if (rho >= 1.0) return 0.0;
  const double k = config_.profile_exponent;
  return std::pow(1.0 - std::pow(rho, k), 1.0 / k);
}

double BubbleModel::apex_height_mm(double pressure_hpa) const {
  const double dp = pressure_hpa - config_.rest_pressure_hpa;
  return config_.rest_apex_height_mm +
         (config_.geometry_gain_mm_per_hpa * dp + config_.geometry_quad_mm_per_hpa2 * dp * dp) / profile_mean_;
}

double BubbleModel::free_height_mm(double pressure_hpa, Vec2 p) const {
  return apex_height_mm(pressure_hpa) * unit_profile(p);
}

// ---------------------------------------------------------------- state

Vec2 MembraneState::marker_pixel(std::size_t i) const { return model->mm_to_pixel(markers.at(i).position_mm()); }

Vec3 MembraneState::marker_point(std::size_t i) const {
  const auto& m = markers.at(i);
  const Vec2 p = m.position_mm();
  return {p.x, p.y, m.height_mm};
}

std::size_t MembraneState::contact_area_px() const {
  std::size_t n = 0;
  for (auto v : contact.values()) n += v != 0;
  return n;
}

MembraneState inflate_shape(std::shared_ptr<const BubbleModel> model, double pressure_hpa) {
  if (!model) throw ContractError("null bubble model");
  require_band(pressure_hpa);
  MembraneState s;
  s.pressure_hpa = pressure_hpa;
  const int w = model->width(), h = model->height();
  const double apex = model->apex_height_mm(pressure_hpa);
  const double standoff = model->config().camera_standoff_mm;
  s.range_mm = Grid<double>(w, h);
  const auto& prof = model->unit_profile_grid();
  for (std::size_t i = 0; i < prof.size(); ++i) s.range_mm[i] = standoff + apex * prof[i];
  s.contact = Grid<std::uint8_t>(w, h, 0);
  s.markers.reserve(model->rest_markers_mm().size());
  for (const Vec2& q : model->rest_markers_mm()) s.markers.push_back({q, {}, apex * model->unit_profile(q)});
  s.model = std::move(model);
  return s;
}

MembraneState inflate_shape(const BubbleConfig& config, double pressure_hpa) {
  return inflate_shape(std::make_shared<const BubbleModel>(config), pressure_hpa);
}

std::optional<double> first_contact_bottom_mm(const MembraneState& free_state, const ObjectPrimitive& object) {
  const auto& m = *free_state.model;
  const double apex = m.apex_height_mm(free_state.pressure_hpa);
  const auto& prof = m.unit_profile_grid();
  std::optional<double> best;
  for (int y = 0; y < m.height(); ++y)
    for (int x = 0; x < m.width(); ++x) {
      if (prof(x, y) <= 0.0) continue;
      const double r = object.relief_mm(m.pixel_to_mm(x, y));
      if (!std::isfinite(r)) continue;
      const double top = apex * prof(x, y) - r;
      if (!best || top > *best) best = top;
    }
  return best;
}

MembraneState place_object(const MembraneState& state, const ObjectPrimitive& object, double bottom_mm) {
  object.validate();
  const auto& m = *state.model;
  MembraneState out = inflate_shape(state.model, state.pressure_hpa);
  PlacedObject placed{object, bottom_mm, 0.0, 0.0};
  const double standoff = m.config().camera_standoff_mm;
  for (int y = 0; y < m.height(); ++y)
    for (int x = 0; x < m.width(); ++x) {
      const double surf = placed.surface_mm(m.pixel_to_mm(x, y));
      if (out.range_mm(x, y) - standoff > surf) {
        out.range_mm(x, y) = standoff + surf;
        out.contact(x, y) = 1;
      }
    }
  for (auto& mk : out.markers) mk.height_mm = std::min(mk.height_mm, placed.surface_mm(mk.position_mm()));
  out.object = placed;
  return out;
}

double overlap_for_force(const BubbleModel& model, double pressure_a_hpa, double pressure_b_hpa, double force_n) {
  const auto& c = model.config();
  const double k = c.grasp_stiffness_n_per_mm;
  const double r = c.force_quad_n_per_hpa2 - k * c.geometry_quad_mm_per_hpa2 / model.profile_mean();
  const double da = pressure_a_hpa - c.rest_pressure_hpa, db = pressure_b_hpa - c.rest_pressure_hpa;
  return (force_n - r * (da * da + db * db)) / k;
}

double pair_grasp_force(const BubbleModel& model, double pressure_a_hpa, double pressure_b_hpa, double width_mm,
                        double object_thickness_mm) {
  const auto& c = model.config();
  const double rest = c.rest_apex_height_mm;
  const double overlap = object_thickness_mm - width_mm + (model.apex_height_mm(pressure_a_hpa) - rest) +
                         (model.apex_height_mm(pressure_b_hpa) - rest);
  if (overlap <= 0.0) return 0.0;
  const double k = c.grasp_stiffness_n_per_mm;
  const double r = c.force_quad_n_per_hpa2 - k * c.geometry_quad_mm_per_hpa2 / model.profile_mean();
  const double da = pressure_a_hpa - c.rest_pressure_hpa, db = pressure_b_hpa - c.rest_pressure_hpa;
  return std::max(0.0, k * overlap + r * (da * da + db * db));
}

double grasp_force_model(const BubbleConfig& config, double pressure_hpa, double width_mm,
                         double object_thickness_mm) {
  if (!(width_mm >= 0.0 && width_mm <= kGripperMaxWidthMm))
    throw DomainError("gripper width " + std::to_string(width_mm) + " mm outside [0, 66]");
  require_band(pressure_hpa);
  config.validate();
  // Only the profile mean is needed; skip marker placement.
  BubbleConfig light = config;
  light.marker_count = 1;
  light.marker_min_separation_px = 0.0;
  const BubbleModel model(light);
  return pair_grasp_force(model, pressure_hpa, config.rest_pressure_hpa, width_mm, object_thickness_mm);
}

MembraneState press_object(const MembraneState& state, const ObjectPrimitive& object, double grasp_force_n) {
  if (!(grasp_force_n > 0.0)) throw DomainError("grasp force must be positive");
  object.validate();
  const auto& m = *state.model;
  const MembraneState free_state = inflate_shape(state.model, state.pressure_hpa);
  const auto touch = first_contact_bottom_mm(free_state, object);
  if (!touch) {
    MembraneState out = free_state;
    out.object = PlacedObject{object, kInf, 0.0, grasp_force_n};
    return out;
  }
  // Symmetric pair: each bubble takes half the overlap.
  const double overlap = overlap_for_force(m, state.pressure_hpa, state.pressure_hpa, grasp_force_n);
  const double bottom = *touch - 0.5 * overlap;
  MembraneState out = place_object(free_state, object, bottom);
  out.object->grasp_force_n = grasp_force_n;
  out.object->width_mm =
      object.thickness_mm() + 2.0 * (m.apex_height_mm(state.pressure_hpa) - m.config().rest_apex_height_mm) - overlap;
  return out;
}

double shear_decay(double distance_to_patch_mm, double distance_to_rim_mm) {
  if (distance_to_patch_mm <= 0.0) return 1.0;
  if (distance_to_rim_mm <= 0.0) return 0.0;
  const double t = distance_to_patch_mm / (distance_to_patch_mm + distance_to_rim_mm);
  return 0.5 * (1.0 + std::cos(std::numbers::pi * t));
}

MembraneState apply_shear(const MembraneState& state, Vec2 displacement_mm) {
  if (state.contact_area_px() == 0) throw DomainError("shear requires a nonempty contact patch");
  const auto& m = *state.model;
  const double scale = m.mm_per_pixel();
  const int w = m.width(), h = m.height();
  const Grid<double> dist_px = morphology::distance_to_foreground(state.contact);
  MembraneState out = state;

  auto nearest_pixel = [&](Vec2 p_mm) {
    const Vec2 px = m.mm_to_pixel(p_mm);
    return std::pair{std::clamp(static_cast<int>(std::lround(px.x)), 0, w - 1),
                     std::clamp(static_cast<int>(std::lround(px.y)), 0, h - 1)};
  };

  // Weights follow the material point, so repeated shears compose exactly.
  for (auto& mk : out.markers) {
    const Vec2 p = mk.rest_mm;
    const auto [px, py] = nearest_pixel(p);
    const double f = state.contact(px, py) ? 1.0 : shear_decay(dist_px(px, py) * scale, rim_distance_mm(m, p));
    mk.offset_mm = mk.offset_mm + f * displacement_mm;
  }

  const double standoff = m.config().camera_standoff_mm;
  const Vec2 d_px{displacement_mm.x / scale, displacement_mm.y / scale};
#pragma omp parallel for schedule(static)
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      if (state.contact(x, y)) continue;
      const Vec2 p = m.pixel_to_mm(x, y);
      const double f = shear_decay(dist_px(x, y) * scale, rim_distance_mm(m, p));
      if (f <= 0.0) continue;
      const double src = kernels::detail::bilinear_clamped(state.range_mm, x - f * d_px.x, y - f * d_px.y);
      const double surf = state.object ? standoff + state.object->surface_mm(p) : kInf;
      out.range_mm(x, y) = std::min(src, surf);
    }
  out.object_shear_offset_mm = state.object_shear_offset_mm + displacement_mm;
  return out;
}

// ---------------------------------------------------------------- rendering

DepthImage render_depth(const MembraneState& state, const RenderOptions& options) {
  DepthImage img;
  img.range_mm = state.range_mm;
  img.timestamp_s = options.timestamp_s;
  img.pressure_hpa = state.pressure_hpa;
  if (options.depth_noise_sigma_mm > 0.0) {
    const double half_width = options.depth_noise_sigma_mm * std::sqrt(3.0);
    const auto n = static_cast<std::ptrdiff_t>(img.range_mm.size());
    auto& r = img.range_mm;
    const auto seed = options.noise_seed;
    const auto stream = options.frame_index;
    auto noisy = [&](std::ptrdiff_t i) {
      const double u = hashed_unit(seed, stream, static_cast<std::uint64_t>(i));
      r[i] = std::max(r[i] + (2.0 * u - 1.0) * half_width, 1e-3);
    };
    if (options.backend == kernels::Backend::omp) {
#pragma omp parallel for schedule(static)
      for (std::ptrdiff_t i = 0; i < n; ++i) noisy(i);
    } else {
      for (std::ptrdiff_t i = 0; i < n; ++i) noisy(i);
    }
  }
  return img;
}

IrImage render_ir(const MembraneState& state, const RenderOptions& options) {
  const auto& m = *state.model;
  const auto& c = m.config();
  IrImage img;
  img.timestamp_s = options.timestamp_s;
  img.intensity = Grid<double>(m.width(), m.height(), 0.0);
  const int r = c.marker_radius_px;
  const double inv2s2 = 1.0 / (2.0 * c.marker_sigma_px * c.marker_sigma_px);
  for (std::size_t i = 0; i < state.markers.size(); ++i) {
    const Vec2 p = state.marker_pixel(i);
    const int cx = static_cast<int>(std::lround(p.x)), cy = static_cast<int>(std::lround(p.y));
    for (int y = cy - r; y <= cy + r; ++y)
      for (int x = cx - r; x <= cx + r; ++x) {
        if (!img.intensity.contains(x, y)) continue;
        const double dx = x - p.x, dy = y - p.y;
        const double d2 = dx * dx + dy * dy;
        if (d2 > r * r) continue;
        img.intensity(x, y) += std::exp(-d2 * inv2s2);
      }
  }
  for (auto& v : img.intensity.values()) v = std::min(v, 1.0);
  return img;
}

double mean_range_mm(const DepthImage& depth) {
  double s = 0.0;
  for (double v : depth.range_mm.values()) s += v;
  return depth.range_mm.empty() ? 0.0 : s / static_cast<double>(depth.range_mm.size());
}

}  // namespace bubble::sim
