#pragma once

// Pyramidal polynomial-expansion dense optical flow.

#include "bubble/images.hpp"
#include "bubble/kernels.hpp"

namespace bubble::flow {

struct FlowParams {
  int levels = 3;
  double pyramid_scale = 0.5;
  int window = 15;          // displacement-solve averaging window, odd
  int iterations = 3;       // warp iterations per level
  int poly_neighborhood = 7;
  double poly_sigma = 1.5;
  kernels::Backend backend = kernels::Backend::omp;

  void validate() const;
};

/// Displacement d per pixel such that second(x + d) ~ first(x). Flow is marked valid on
/// the mask eroded by window / 2; everything else is zero and invalid.
FlowField dense_flow(const IrImage& first, const IrImage& second, const ContactMask& mask,
                     const FlowParams& params = {});

/// Full-frame mask variant.
FlowField dense_flow(const IrImage& first, const IrImage& second, const FlowParams& params = {});

}  // namespace bubble::flow
