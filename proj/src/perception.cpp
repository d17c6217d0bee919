#include "bubble/perception.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "bubble/morphology.hpp"

namespace bubble::perception {

ContactMask compute_mask(const DepthImage& reference, const DepthImage& current, const MaskParams& params) {
  if (!reference.range_mm.same_shape(current.range_mm)) throw ContractError("depth images differ in size");
  if (std::abs(reference.pressure_hpa - current.pressure_hpa) > params.pressure_tolerance_hpa)
    throw StaleReferenceError(reference.pressure_hpa, current.pressure_hpa);
  ContactMask m;
  kernels::indentation_threshold(reference.range_mm, current.range_mm, params.threshold_mm, m.on, params.backend);
  m.on = morphology::fill_holes(morphology::largest_component(m.on));
  if (m.count() < params.min_patch_area_px) std::fill(m.on.values().begin(), m.on.values().end(), 0);
  return m;
}

ContactMask compute_mask(const DepthImage& reference, const DepthImage& current, double threshold_mm) {
  MaskParams p;
  p.threshold_mm = threshold_mm;
  return compute_mask(reference, current, p);
}

IrImage mask_ir(const IrImage& image, const ContactMask& mask) {
  if (!image.intensity.same_shape(mask.on)) throw ContractError("IR image and mask differ in size");
  IrImage out = image;
  for (std::size_t i = 0; i < out.intensity.size(); ++i) out.intensity[i] *= mask.on[i] ? 1.0 : 0.0;
  return out;
}

std::array<double, 3> GainMatrix::apply(const std::array<double, 3>& v) const {
  return {k[0] * v[0] + k[1] * v[1] + k[2] * v[2], k[3] * v[0] + k[4] * v[1] + k[5] * v[2],
          k[6] * v[0] + k[7] * v[1] + k[8] * v[2]};
}

ShearEstimate aggregate_shear(const FlowField& flow, const ContactMask& mask, const GainMatrix& gain) {
  if (!flow.displacement.same_shape(mask.on)) throw ContractError("flow and mask differ in size");
  ShearEstimate e;
  e.calibrated = gain.calibrated;
  const int w = mask.width(), h = mask.height();
  double sx = 0.0, sy = 0.0;
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      if (mask.on(x, y)) {
        ++e.patch_area;
        sx += x;
        sy += y;
      }
  if (e.patch_area == 0) return e;
  e.patch_centroid = {sx / e.patch_area, sy / e.patch_area};
  const Vec2 c = e.patch_centroid;
  double dx = 0.0, dy = 0.0, tq = 0.0;
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      if (!flow.valid(x, y) || !mask.on(x, y)) continue;
      const Vec2 v = flow.displacement(x, y);
      dx += v.x;
      dy += v.y;
      tq += (x - c.x) * v.y - (y - c.y) * v.x;
    }
  e.raw_displacement_sum = {dx, dy};
  e.torsion = tq;
  e.force = gain.apply({dx, dy, tq});
  return e;
}

ResetStatus ShearPipeline::reset_reference(const DepthImage& depth, const IrImage& ir, double pressure_hpa,
                                           bool settled) {
  if (!settled) return ResetStatus::retry;
  if (!depth.range_mm.same_shape(ir.intensity)) throw ContractError("reference depth and IR differ in size");
  reference_ = ReferenceState{depth, ir, pressure_hpa};
  reference_->depth.pressure_hpa = pressure_hpa;
  history_.clear();
  ++resets_;
  return ResetStatus::accepted;
}

const ReferenceState& ShearPipeline::reference() const {
  if (!reference_) throw ContractError("no reference captured");
  return *reference_;
}

FrameResult ShearPipeline::process(const DepthImage& depth, const IrImage& ir) {
  const auto& ref = reference();
  FrameResult r;
  r.mask = compute_mask(ref.depth, depth, config_.mask);
  r.flow = flow::dense_flow(mask_ir(ref.ir, r.mask), mask_ir(ir, r.mask), r.mask, config_.flow);
  r.estimate = aggregate_shear(r.flow, r.mask, config_.gain);
  history_.push_back(r.estimate);
  return r;
}

std::string telemetry_csv_header() { return "frame,patch_area_px,centroid_x,centroid_y,sum_dx,sum_dy,torsion,fx,fy,ft\n"; }

std::string telemetry_csv_row(long frame, const ShearEstimate& e) {
  char buf[320];
  std::snprintf(buf, sizeof buf, "%ld,%zu,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f\n", frame, e.patch_area,
                e.patch_centroid.x, e.patch_centroid.y, e.raw_displacement_sum.x, e.raw_displacement_sum.y, e.torsion,
                e.force[0], e.force[1], e.force[2]);
  return buf;
}

}  // namespace bubble::perception
