#pragma once

// Contact-patch segmentation from depth differencing and gain-scaled shear from masked
// IR flow, with an explicit reference reset tied to the pressure controller.

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "bubble/flow.hpp"
#include "bubble/images.hpp"
#include "bubble/kernels.hpp"

namespace bubble::perception {

inline constexpr double kDefaultThresholdMm = 1.5;
/// Twice the controller deadband.
inline constexpr double kDefaultPressureToleranceHpa = 4.0;
/// Patches smaller than this are sensor speckle, not contact.
inline constexpr std::size_t kDefaultMinPatchAreaPx = 16;

struct MaskParams {
  double threshold_mm = kDefaultThresholdMm;
  double pressure_tolerance_hpa = kDefaultPressureToleranceHpa;
  std::size_t min_patch_area_px = kDefaultMinPatchAreaPx;
  kernels::Backend backend = kernels::Backend::omp;
};

/// Indentation (reference minus current range) above the threshold, reduced to its largest
/// 8-connected component with holes filled; dropped entirely below the minimum patch area.
/// Throws ContractError on size mismatch and StaleReferenceError when the capture pressures
/// differ by more than the tolerance.
ContactMask compute_mask(const DepthImage& reference, const DepthImage& current, const MaskParams& params = {});
ContactMask compute_mask(const DepthImage& reference, const DepthImage& current, double threshold_mm);

/// Per-pixel product of intensity and mask.
IrImage mask_ir(const IrImage& image, const ContactMask& mask);

/// 3x3 gain mapping [sum_dx, sum_dy, torsion] to [fx, fy, torque].
struct GainMatrix {
  std::array<double, 9> k{1, 0, 0, 0, 1, 0, 0, 0, 1};  // row-major
  bool calibrated = false;

  static GainMatrix identity() { return {}; }
  std::array<double, 3> apply(const std::array<double, 3>& v) const;
};

struct ShearEstimate {
  std::array<double, 3> force{};  // fx, fy, torsional component
  Vec2 raw_displacement_sum{};    // px
  double torsion = 0.0;           // px^2
  std::size_t patch_area = 0;     // px
  Vec2 patch_centroid{};          // px
  bool calibrated = false;
};

ShearEstimate aggregate_shear(const FlowField& flow, const ContactMask& mask, const GainMatrix& gain);

struct ReferenceState {
  DepthImage depth;
  IrImage ir;
  double pressure_hpa = 0.0;
};

enum class ResetStatus { accepted, retry };

struct PipelineConfig {
  MaskParams mask;
  flow::FlowParams flow;
  GainMatrix gain;
};

struct FrameResult {
  ContactMask mask;
  FlowField flow;
  ShearEstimate estimate;
};

/// Single-writer per-sensor pipeline.
class ShearPipeline {
 public:
  explicit ShearPipeline(PipelineConfig config = {}) : config_(std::move(config)) {}

  /// Stores a new reference when the controller reports settled, otherwise asks for a retry.
  /// An accepted reset clears the shear history.
  ResetStatus reset_reference(const DepthImage& depth, const IrImage& ir, double pressure_hpa, bool settled);

  bool has_reference() const { return reference_.has_value(); }
  const ReferenceState& reference() const;
  const PipelineConfig& config() const { return config_; }
  void set_gain(const GainMatrix& gain) { config_.gain = gain; }

  /// Throws ContractError without a reference and StaleReferenceError from the mask guard.
  FrameResult process(const DepthImage& depth, const IrImage& ir);

  const std::vector<ShearEstimate>& history() const { return history_; }
  std::uint64_t resets() const { return resets_; }

 private:
  PipelineConfig config_;
  std::optional<ReferenceState> reference_;
  std::vector<ShearEstimate> history_;
  std::uint64_t resets_ = 0;
};

std::string telemetry_csv_header();
std::string telemetry_csv_row(long frame, const ShearEstimate& estimate);

struct CalibrationSample {
  std::array<double, 3> applied_force{};
  std::array<double, 3> raw{};  // sum_dx, sum_dy, torsion
};

struct CalibrationResult {
  GainMatrix gain;
  double rms_residual = 0.0;  // force units
};

/// Least-squares K with applied ~ K * raw. Needs at least three linearly independent samples.
CalibrationResult calibrate_gain(const std::vector<CalibrationSample>& samples);

}  // namespace bubble::perception
