#pragma once

// Synthetic Soft-bubble sensor: an air-filled membrane over an elliptical base, seen
// from inside by a ToF camera. Produces ground-truth geometry, contact patches and
// marker motion, and renders depth / IR frames from them.
//
// Frames: the base plane is z = 0, the membrane bulges towards +z, and the camera sits
// `camera_standoff_mm` behind the base looking along +z, so the range of a membrane
// point is standoff + height. Pixels map orthographically onto the base plane.

#include <cstdint>
#include <memory>
#include <optional>
#include <vector>

#include "bubble/common.hpp"
#include "bubble/images.hpp"
#include "bubble/kernels.hpp"

namespace bubble::sim {

struct BubbleConfig {
  double semi_axis_major_mm = 52.4;
  double semi_axis_minor_mm = 40.0;
  double rest_pressure_hpa = 1050.0;
  double rest_apex_height_mm = 40.0;
  // Coefficients of the frame-mean range versus (p - rest_pressure). The apex moves by
  // the same polynomial divided by the mean of the unit cap profile over the frame.
  double geometry_gain_mm_per_hpa = 0.18;
  double geometry_quad_mm_per_hpa2 = 1.3e-4;
  double profile_exponent = 2.5;  // superellipsoid exponent of the cap profile
  int marker_count = 600;
  std::uint64_t marker_seed = 1;
  double marker_min_separation_px = 3.0;
  double marker_sigma_px = 1.0;
  int marker_radius_px = 3;
  int image_width = 224;
  int image_height = 171;
  double camera_standoff_mm = 25.0;
  double field_margin = 1.04;  // frame size relative to the base ellipse
  // Grasp force law, see grasp_force_model().
  double grasp_stiffness_n_per_mm = 0.93;
  double force_quad_n_per_hpa2 = -0.00127;

  /// Throws ConfigError / DomainError on an inconsistent configuration.
  void validate() const;
  double mm_per_pixel() const;
};

enum class Shape { plane, cylinder, sphere };

struct ObjectPrimitive {
  Shape shape = Shape::cylinder;
  double radius_mm = 22.0;          // cylinder / sphere
  double plate_radius_mm = 130.0;   // plane: the plate is a disc of this radius
  double plate_thickness_mm = 4.0;  // plane
  Vec2 center_mm{};                 // in-plane pose in the bubble frame
  double yaw_rad = 0.0;             // cylinder axis angle, 0 = along the image y axis

  static ObjectPrimitive plane(double plate_radius_mm, Vec2 center_mm = {});
  static ObjectPrimitive cylinder(double radius_mm, Vec2 center_mm = {}, double yaw_rad = 0.0);
  static ObjectPrimitive sphere(double radius_mm, Vec2 center_mm = {});

  void validate() const;
  /// Extent along the grasp axis (what the gripper closes on).
  double thickness_mm() const;
  /// Height of the object's lower surface above its lowest point at in-plane position p;
  /// +inf where the object does not cover p.
  double relief_mm(Vec2 p) const;
};

/// Derived, immutable geometry shared by all states of one simulated bubble.
class BubbleModel {
 public:
  explicit BubbleModel(BubbleConfig config);

  const BubbleConfig& config() const { return config_; }
  double mm_per_pixel() const { return scale_; }
  int width() const { return config_.image_width; }
  int height() const { return config_.image_height; }

  Vec2 pixel_to_mm(double px, double py) const;
  Vec2 mm_to_pixel(Vec2 p) const;
  /// Elliptic radius: 1 on the rim of the base.
  double elliptic_radius(Vec2 p) const;
  /// Cap profile in [0, 1]: 1 at the apex, 0 on and outside the rim.
  double unit_profile(Vec2 p) const;
  /// Frame mean of unit_profile over pixel centres.
  double profile_mean() const { return profile_mean_; }

  double apex_height_mm(double pressure_hpa) const;
  double free_height_mm(double pressure_hpa, Vec2 p) const;

  const std::vector<Vec2>& rest_markers_mm() const { return markers_; }
  /// unit_profile sampled at every pixel centre.
  const Grid<double>& unit_profile_grid() const { return unit_profile_; }

 private:
  BubbleConfig config_;
  double scale_;
  double profile_mean_;
  Grid<double> unit_profile_;
  std::vector<Vec2> markers_;
};

struct Marker {
  Vec2 rest_mm;
  Vec2 offset_mm;  // accumulated in-plane displacement
  double height_mm = 0.0;

  Vec2 position_mm() const { return rest_mm + offset_mm; }
};

struct PlacedObject {
  ObjectPrimitive object;
  double bottom_mm = 0.0;  // height of the object's lowest point above the base plane
  double width_mm = 0.0;   // gripper width that holds the object at this depth
  double grasp_force_n = 0.0;

  double surface_mm(Vec2 p) const { return bottom_mm + object.relief_mm(p); }
};

struct MembraneState {
  std::shared_ptr<const BubbleModel> model;
  double pressure_hpa = 0.0;
  Grid<double> range_mm;         // per-pixel camera range to the membrane
  Grid<std::uint8_t> contact;    // ground-truth contact flags
  std::vector<Marker> markers;
  std::optional<PlacedObject> object;
  Vec2 object_shear_offset_mm{};

  Vec2 marker_pixel(std::size_t i) const;
  Vec3 marker_point(std::size_t i) const;
  std::size_t contact_area_px() const;
};

/// Free (contact-less) membrane at a pressure inside the operating band.
MembraneState inflate_shape(std::shared_ptr<const BubbleModel> model, double pressure_hpa);
MembraneState inflate_shape(const BubbleConfig& config, double pressure_hpa);

/// Presses `object` into the bubble with the grasp force of a symmetric bubble pair at the
/// state's pressure. A pose that never reaches the membrane yields an empty contact set.
MembraneState press_object(const MembraneState& state, const ObjectPrimitive& object, double grasp_force_n);

/// Places `object` with its lowest point at `bottom_mm` above the base plane (a grasp held at
/// fixed gripper width) on the free membrane at the state's pressure.
MembraneState place_object(const MembraneState& state, const ObjectPrimitive& object, double bottom_mm);

/// Highest point on the free membrane under the object's footprint, i.e. the bottom height at
/// first touch. Empty when the footprint misses the membrane.
std::optional<double> first_contact_bottom_mm(const MembraneState& free_state, const ObjectPrimitive& object);

/// Gripper force with one bubble at `pressure_hpa` and its partner at rest pressure, closing
/// to `width_mm` (0 = rest apexes touching) on an object of the given thickness.
/// Width must lie in the gripper range [0, 66] mm.
double grasp_force_model(const BubbleConfig& config, double pressure_hpa, double width_mm,
                         double object_thickness_mm = 0.0);

/// Force law for a bubble pair at pressures (a, b):
///   overlap  = thickness - width + e(a) + e(b),   e(p) = apex(p) - rest apex
///   force    = max(0, k * overlap + r * ((a - rest)^2 + (b - rest)^2))  when overlap > 0
/// with r chosen so the single-bubble quadratic coefficient equals force_quad_n_per_hpa2.
double pair_grasp_force(const BubbleModel& model, double pressure_a_hpa, double pressure_b_hpa, double width_mm,
                        double object_thickness_mm);

/// Total pair overlap that produces `force_n` at pressures (a, b).
double overlap_for_force(const BubbleModel& model, double pressure_a_hpa, double pressure_b_hpa, double force_n);

/// Tangential displacement of a grasped object. The contact patch moves with the object
/// (stiction); free membrane follows with a cosine falloff that reaches zero at the rim.
MembraneState apply_shear(const MembraneState& state, Vec2 displacement_mm);

/// Marker displacement weight used by apply_shear: 1 inside the patch, cosine decay to 0 at the rim.
double shear_decay(double distance_to_patch_mm, double distance_to_rim_mm);

struct RenderOptions {
  double depth_noise_sigma_mm = 0.5;  // zero-mean uniform noise with this standard deviation
  std::uint64_t noise_seed = 0;
  std::uint64_t frame_index = 0;
  double timestamp_s = 0.0;
  kernels::Backend backend = kernels::Backend::omp;
};

DepthImage render_depth(const MembraneState& state, const RenderOptions& options = {});
IrImage render_ir(const MembraneState& state, const RenderOptions& options = {});

double mean_range_mm(const DepthImage& depth);

}  // namespace bubble::sim
