#include "bubble/kernels.hpp"
#include "kernel_detail.hpp"

namespace bubble::kernels::omp {

namespace {

// Horizontal pass into `tmp`, then a vertical pass that writes the output itself.
template <typename T, typename RowPass, typename ColPass>
void separable(int w, int h, Grid<T>& tmp, RowPass row_pass, ColPass col_pass) {
#pragma omp parallel for schedule(static)
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) tmp(x, y) = row_pass(x, y);
#pragma omp parallel for schedule(static)
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) col_pass(x, y);
}

}  // namespace

void poly_expand(const Grid<double>& image, const PolyBasis& basis, PolyField& out) {
  const int w = image.width(), h = image.height(), n = basis.half();
  const auto& g = basis.g();
  const auto& xg = basis.xg();
  const auto& xxg = basis.xxg();
  out = PolyField(w, h);
  Grid<std::array<double, 3>> rows(w, h);
  separable(
      w, h, rows,
      [&](int x, int y) {
        std::array<double, 3> t{};
        for (int i = -n; i <= n; ++i) {
          const double f = image(detail::clamp_index(x + i, w), y);
          t[0] += g[i + n] * f;
          t[1] += xg[i + n] * f;
          t[2] += xxg[i + n] * f;
        }
        return t;
      },
      [&](int x, int y) {
        std::array<double, 6> m{};
        for (int j = -n; j <= n; ++j) {
          const auto& t = rows(x, detail::clamp_index(y + j, h));
          m[0] += g[j + n] * t[0];
          m[1] += g[j + n] * t[1];
          m[2] += xg[j + n] * t[0];
          m[3] += g[j + n] * t[2];
          m[4] += xxg[j + n] * t[0];
          m[5] += xg[j + n] * t[1];
        }
        out(x, y) = detail::moments_to_coeffs(basis.inverse_gram(), m);
      });
}

void flow_system(const PolyField& first, const PolyField& second, const Grid<Vec2>& flow, FlowSystem& out) {
  const int w = first.width(), h = first.height();
  out = FlowSystem(w, h);
#pragma omp parallel for schedule(static)
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) out(x, y) = detail::displacement_system(first(x, y), second, x, y, flow(x, y));
}

void box_average(const FlowSystem& in, int window, FlowSystem& out) {
  const int w = in.width(), h = in.height(), r = window / 2;
  const double norm = 1.0 / (double(2 * r + 1) * (2 * r + 1));
  out = FlowSystem(w, h);
  FlowSystem rows(w, h);
  separable(
      w, h, rows,
      [&](int x, int y) {
        std::array<double, 5> acc{};
        for (int i = -r; i <= r; ++i) {
          const auto& v = in(detail::clamp_index(x + i, w), y);
          for (int k = 0; k < 5; ++k) acc[k] += v[k];
        }
        return acc;
      },
      [&](int x, int y) {
        std::array<double, 5> acc{};
        for (int j = -r; j <= r; ++j) {
          const auto& v = rows(x, detail::clamp_index(y + j, h));
          for (int k = 0; k < 5; ++k) acc[k] += v[k];
        }
        for (int k = 0; k < 5; ++k) acc[k] *= norm;
        out(x, y) = acc;
      });
}

void solve_flow(const FlowSystem& system, Grid<Vec2>& flow) {
  flow = Grid<Vec2>(system.width(), system.height());
  const auto n = static_cast<std::ptrdiff_t>(system.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) flow[i] = detail::solve_2x2(system[i]);
}

void gaussian_blur(const Grid<double>& in, double sigma, Grid<double>& out) {
  const int w = in.width(), h = in.height();
  const auto taps = detail::gaussian_taps(sigma);
  const int r = static_cast<int>(taps.size() / 2);
  out = Grid<double>(w, h);
  Grid<double> rows(w, h);
  separable(
      w, h, rows,
      [&](int x, int y) {
        double s = 0.0;
        for (int i = -r; i <= r; ++i) s += taps[i + r] * in(detail::clamp_index(x + i, w), y);
        return s;
      },
      [&](int x, int y) {
        double s = 0.0;
        for (int j = -r; j <= r; ++j) s += taps[j + r] * rows(x, detail::clamp_index(y + j, h));
        out(x, y) = s;
      });
}

void resize_bilinear(const Grid<double>& in, int width, int height, Grid<double>& out) {
  out = Grid<double>(width, height);
#pragma omp parallel for schedule(static)
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x)
      out(x, y) = detail::bilinear_clamped(in, detail::resample_coord(x, in.width(), width),
                                           detail::resample_coord(y, in.height(), height));
}

void resize_flow(const Grid<Vec2>& in, int width, int height, Grid<Vec2>& out) {
  out = Grid<Vec2>(width, height);
  const double sx = static_cast<double>(width) / in.width();
  const double sy = static_cast<double>(height) / in.height();
#pragma omp parallel for schedule(static)
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x) {
      const Vec2 v = detail::bilinear_clamped(in, detail::resample_coord(x, in.width(), width),
                                              detail::resample_coord(y, in.height(), height));
      out(x, y) = {v.x * sx, v.y * sy};
    }
}

void indentation_threshold(const Grid<double>& reference_mm, const Grid<double>& current_mm, double threshold_mm,
                           Grid<std::uint8_t>& out) {
  if (!reference_mm.same_shape(current_mm)) throw ContractError("depth grids differ in size");
  out = Grid<std::uint8_t>(reference_mm.width(), reference_mm.height());
  const auto n = static_cast<std::ptrdiff_t>(reference_mm.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) out[i] = (reference_mm[i] - current_mm[i]) > threshold_mm ? 1 : 0;
}

}  // namespace bubble::kernels::omp
