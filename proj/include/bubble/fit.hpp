#pragma once

#include <span>

namespace bubble {

struct QuadraticFit {
  double c0 = 0.0;
  double c1 = 0.0;
  double c2 = 0.0;
  double residual = 0.0;  // root-mean-square
};

/// Least-squares y ~ c0 + c1 x + c2 x^2. Needs at least four points and three distinct xs.
QuadraticFit fit_quadratic(std::span<const double> xs, std::span<const double> ys);

}  // namespace bubble
