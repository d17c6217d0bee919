#pragma once

// Per-pixel image kernels behind the dense flow solver, the mask threshold and the
// frame renderer. Each kernel exists twice:
//   reference:: a plain single-threaded implementation written for clarity
//               (direct 2-D windows where the fast path is separable);
//   omp::       the production path, separable where possible, rows split across
//               OpenMP threads.
// Both are deterministic: every output pixel is computed by a fixed sequence of
// operations regardless of thread count. They agree to rounding; kernels whose
// arithmetic is identical in both paths agree bit-for-bit.

#include <array>
#include <cstdint>
#include <vector>

#include "bubble/common.hpp"

namespace bubble::kernels {

enum class Backend { reference, omp };

/// Quadratic local signal model per pixel: f(x) ~ x'Ax + b'x + c.
/// Layout: {b_x, b_y, a_xx, a_yy, a_xy} where a_xy is the full coefficient of x*y.
using PolyCoeffs = std::array<double, 5>;
using PolyField = Grid<PolyCoeffs>;

/// Per-pixel normal equations of the displacement solve: {g11, g12, g22, h1, h2}.
using FlowSystem = Grid<std::array<double, 5>>;

/// Gaussian-weighted least-squares basis {1, x, y, x^2, y^2, xy} on a (2n+1)^2 window.
class PolyBasis {
 public:
  PolyBasis(int neighborhood, double sigma);

  int half() const { return half_; }
  int neighborhood() const { return 2 * half_ + 1; }
  double sigma() const { return sigma_; }

  // 1-D separable factors, indexed 0..2n for offsets -n..n.
  const std::vector<double>& g() const { return g_; }
  const std::vector<double>& xg() const { return xg_; }
  const std::vector<double>& xxg() const { return xxg_; }

  /// Inverse Gram matrix (row-major 6x6) mapping the six weighted moments
  /// {m00, m10, m01, m20, m02, m11} to the coefficients {c, b_x, b_y, a_xx, a_yy, a_xy}.
  const std::array<double, 36>& inverse_gram() const { return inverse_gram_; }

 private:
  int half_;
  double sigma_;
  std::vector<double> g_, xg_, xxg_;
  std::array<double, 36> inverse_gram_{};
};

namespace reference {
void poly_expand(const Grid<double>& image, const PolyBasis& basis, PolyField& out);
void flow_system(const PolyField& first, const PolyField& second, const Grid<Vec2>& flow, FlowSystem& out);
void box_average(const FlowSystem& in, int window, FlowSystem& out);
void solve_flow(const FlowSystem& system, Grid<Vec2>& flow);
void gaussian_blur(const Grid<double>& in, double sigma, Grid<double>& out);
void resize_bilinear(const Grid<double>& in, int width, int height, Grid<double>& out);
void resize_flow(const Grid<Vec2>& in, int width, int height, Grid<Vec2>& out);
void indentation_threshold(const Grid<double>& reference_mm, const Grid<double>& current_mm, double threshold_mm,
                           Grid<std::uint8_t>& out);
}  // namespace reference

namespace omp {
void poly_expand(const Grid<double>& image, const PolyBasis& basis, PolyField& out);
void flow_system(const PolyField& first, const PolyField& second, const Grid<Vec2>& flow, FlowSystem& out);
void box_average(const FlowSystem& in, int window, FlowSystem& out);
void solve_flow(const FlowSystem& system, Grid<Vec2>& flow);
void gaussian_blur(const Grid<double>& in, double sigma, Grid<double>& out);
void resize_bilinear(const Grid<double>& in, int width, int height, Grid<double>& out);
void resize_flow(const Grid<Vec2>& in, int width, int height, Grid<Vec2>& out);
void indentation_threshold(const Grid<double>& reference_mm, const Grid<double>& current_mm, double threshold_mm,
                           Grid<std::uint8_t>& out);
}  // namespace omp

// Backend dispatch.
void poly_expand(const Grid<double>& image, const PolyBasis& basis, PolyField& out, Backend backend);
void flow_system(const PolyField& first, const PolyField& second, const Grid<Vec2>& flow, FlowSystem& out,
                 Backend backend);
void box_average(const FlowSystem& in, int window, FlowSystem& out, Backend backend);
void solve_flow(const FlowSystem& system, Grid<Vec2>& flow, Backend backend);
void gaussian_blur(const Grid<double>& in, double sigma, Grid<double>& out, Backend backend);
void resize_bilinear(const Grid<double>& in, int width, int height, Grid<double>& out, Backend backend);
void resize_flow(const Grid<Vec2>& in, int width, int height, Grid<Vec2>& out, Backend backend);
void indentation_threshold(const Grid<double>& reference_mm, const Grid<double>& current_mm, double threshold_mm,
                           Grid<std::uint8_t>& out, Backend backend);

}  // namespace bubble::kernels
