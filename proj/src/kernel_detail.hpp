#pragma once

// Per-pixel helpers shared by the reference and OpenMP kernels. Anything here is
// evaluated identically by both backends.

#include <algorithm>
#include <cmath>
#include <type_traits>

#include "bubble/kernels.hpp"

namespace bubble::kernels::detail {

inline int clamp_index(int i, int n) { return std::clamp(i, 0, n - 1); }

inline constexpr double kSolveRegularizer = 1e-3;

template <typename T>
T bilinear_clamped(const Grid<T>& g, double fx, double fy) {
  fx = std::clamp(fx, 0.0, static_cast<double>(g.width() - 1));
  fy = std::clamp(fy, 0.0, static_cast<double>(g.height() - 1));
  const int x0 = std::min(static_cast<int>(fx), std::max(g.width() - 2, 0));
  const int y0 = std::min(static_cast<int>(fy), std::max(g.height() - 2, 0));
  const int x1 = std::min(x0 + 1, g.width() - 1);
  const int y1 = std::min(y0 + 1, g.height() - 1);
  const double ax = fx - x0;
  const double ay = fy - y0;
  if constexpr (std::is_same_v<T, PolyCoeffs>) {
    PolyCoeffs r{};
    for (std::size_t k = 0; k < r.size(); ++k) {
      r[k] = (1 - ay) * ((1 - ax) * g(x0, y0)[k] + ax * g(x1, y0)[k]) +
             ay * ((1 - ax) * g(x0, y1)[k] + ax * g(x1, y1)[k]);
    }
    return r;
  } else if constexpr (std::is_same_v<T, Vec2>) {
    auto lerp = [&](auto get) {
      return (1 - ay) * ((1 - ax) * get(g(x0, y0)) + ax * get(g(x1, y0))) +
             ay * ((1 - ax) * get(g(x0, y1)) + ax * get(g(x1, y1)));
    };
    return Vec2{lerp([](Vec2 v) { return v.x; }), lerp([](Vec2 v) { return v.y; })};
  } else {
    return (1 - ay) * ((1 - ax) * g(x0, y0) + ax * g(x1, y0)) + ay * ((1 - ax) * g(x0, y1) + ax * g(x1, y1));
  }
}

/// Maps the six windowed moments to the five non-constant polynomial coefficients.
inline PolyCoeffs moments_to_coeffs(const std::array<double, 36>& inv, const std::array<double, 6>& m) {
  PolyCoeffs c{};
  for (int k = 0; k < 5; ++k) {
    const double* row = inv.data() + (k + 1) * 6;
    double s = 0.0;
    for (int j = 0; j < 6; ++j) s += row[j] * m[j];
    c[k] = s;
  }
  return c;
}

/// Normal equations for one pixel given both expansions and the current displacement.
inline std::array<double, 5> displacement_system(const PolyCoeffs& r0, const PolyField& second, int x, int y,
                                                 Vec2 d) {
  const PolyCoeffs r1 = bilinear_clamped(second, x + d.x, y + d.y);
  const double a11 = 0.5 * (r0[2] + r1[2]);
  const double a22 = 0.5 * (r0[3] + r1[3]);
  const double a12 = 0.25 * (r0[4] + r1[4]);
  const double db1 = 0.5 * (r0[0] - r1[0]) + a11 * d.x + a12 * d.y;
  const double db2 = 0.5 * (r0[1] - r1[1]) + a12 * d.x + a22 * d.y;
  return {a11 * a11 + a12 * a12, a12 * (a11 + a22), a12 * a12 + a22 * a22, a11 * db1 + a12 * db2,
          a12 * db1 + a22 * db2};
}

inline Vec2 solve_2x2(const std::array<double, 5>& m) {
  const double det = m[0] * m[2] - m[1] * m[1] + kSolveRegularizer;
  return {(m[2] * m[3] - m[1] * m[4]) / det, (m[0] * m[4] - m[1] * m[3]) / det};
}

inline std::vector<double> gaussian_taps(double sigma) {
  const int radius = std::max(1, static_cast<int>(std::ceil(3.0 * sigma)));
  std::vector<double> taps(2 * radius + 1);
  double sum = 0.0;
  for (int i = -radius; i <= radius; ++i) {
    taps[i + radius] = std::exp(-0.5 * i * i / (sigma * sigma));
    sum += taps[i + radius];
  }
  for (auto& t : taps) t /= sum;
  return taps;
}

/// Source coordinate of destination pixel `i` when resampling n_src -> n_dst (pixel-centre aligned).
inline double resample_coord(int i, int n_src, int n_dst) {
  return (i + 0.5) * static_cast<double>(n_src) / n_dst - 0.5;
}

}  // namespace bubble::kernels::detail
