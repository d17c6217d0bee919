#include <Eigen/Dense>

#include "bubble/kernels.hpp"
#include "kernel_detail.hpp"

namespace bubble::kernels {

PolyBasis::PolyBasis(int neighborhood, double sigma) : half_(neighborhood / 2), sigma_(sigma) {
  if (neighborhood < 3 || neighborhood % 2 == 0) throw ConfigError("polynomial neighborhood must be odd and >= 3");
  if (!(sigma > 0.0)) throw ConfigError("polynomial sigma must be positive");
  const int n = half_;
  g_.resize(2 * n + 1);
  xg_.resize(2 * n + 1);
  xxg_.resize(2 * n + 1);
  double sum = 0.0;
  for (int i = -n; i <= n; ++i) {
    g_[i + n] = std::exp(-0.5 * i * i / (sigma * sigma));
    sum += g_[i + n];
  }
  for (int i = -n; i <= n; ++i) {
    g_[i + n] /= sum;
    xg_[i + n] = i * g_[i + n];
    xxg_[i + n] = i * i * g_[i + n];
  }

  Eigen::Matrix<double, 6, 6> gram = Eigen::Matrix<double, 6, 6>::Zero();
  for (int j = -n; j <= n; ++j) {
    for (int i = -n; i <= n; ++i) {
      const double w = g_[i + n] * g_[j + n];
      Eigen::Matrix<double, 6, 1> phi;
      phi << 1.0, i, j, double(i) * i, double(j) * j, double(i) * j;
      gram += w * phi * phi.transpose();
    }
  }
  const Eigen::Matrix<double, 6, 6> inv = gram.inverse();
  for (int r = 0; r < 6; ++r)
    for (int c = 0; c < 6; ++c) inverse_gram_[r * 6 + c] = inv(r, c);
}

namespace reference {

void poly_expand(const Grid<double>& image, const PolyBasis& basis, PolyField& out) {
  const int w = image.width(), h = image.height(), n = basis.half();
  out = PolyField(w, h);
  const auto& g = basis.g();
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      std::array<double, 6> m{};
      for (int j = -n; j <= n; ++j) {
        for (int i = -n; i <= n; ++i) {
          const double f = image(detail::clamp_index(x + i, w), detail::clamp_index(y + j, h));
          const double wf = g[i + n] * g[j + n] * f;
          m[0] += wf;
          m[1] += i * wf;
          m[2] += j * wf;
          m[3] += i * i * wf;
          m[4] += j * j * wf;
          m[5] += i * j * wf;
        }
      }
      out(x, y) = detail::moments_to_coeffs(basis.inverse_gram(), m);
    }
  }
}

void flow_system(const PolyField& first, const PolyField& second, const Grid<Vec2>& flow, FlowSystem& out) {
  out = FlowSystem(first.width(), first.height());
  for (int y = 0; y < first.height(); ++y)
    for (int x = 0; x < first.width(); ++x)
      out(x, y) = detail::displacement_system(first(x, y), second, x, y, flow(x, y));
}

void box_average(const FlowSystem& in, int window, FlowSystem& out) {
  const int w = in.width(), h = in.height(), r = window / 2;
  const double norm = 1.0 / (double(2 * r + 1) * (2 * r + 1));
  out = FlowSystem(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      std::array<double, 5> acc{};
      for (int j = -r; j <= r; ++j)
        for (int i = -r; i <= r; ++i) {
          const auto& v = in(detail::clamp_index(x + i, w), detail::clamp_index(y + j, h));
          for (int k = 0; k < 5; ++k) acc[k] += v[k];
        }
      for (int k = 0; k < 5; ++k) acc[k] *= norm;
      out(x, y) = acc;
    }
  }
}

void solve_flow(const FlowSystem& system, Grid<Vec2>& flow) {
  flow = Grid<Vec2>(system.width(), system.height());
  for (std::size_t i = 0; i < system.size(); ++i) flow[i] = detail::solve_2x2(system[i]);
}

void gaussian_blur(const Grid<double>& in, double sigma, Grid<double>& out) {
  const int w = in.width(), h = in.height();
  const auto taps = detail::gaussian_taps(sigma);
  const int r = static_cast<int>(taps.size() / 2);
  out = Grid<double>(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      double s = 0.0;
      for (int j = -r; j <= r; ++j)
        for (int i = -r; i <= r; ++i)
          s += taps[i + r] * taps[j + r] * in(detail::clamp_index(x + i, w), detail::clamp_index(y + j, h));
      out(x, y) = s;
    }
}

void resize_bilinear(const Grid<double>& in, int width, int height, Grid<double>& out) {
  out = Grid<double>(width, height);
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x)
      out(x, y) = detail::bilinear_clamped(in, detail::resample_coord(x, in.width(), width),
                                           detail::resample_coord(y, in.height(), height));
}

void resize_flow(const Grid<Vec2>& in, int width, int height, Grid<Vec2>& out) {
  out = Grid<Vec2>(width, height);
  const double sx = static_cast<double>(width) / in.width();
  const double sy = static_cast<double>(height) / in.height();
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
  for (std::size_t i = 0; i < reference_mm.size(); ++i)
    out[i] = (reference_mm[i] - current_mm[i]) > threshold_mm ? 1 : 0;
}

}  // namespace reference

#define BUBBLE_DISPATCH(call)   \
  do {                          \
    if (backend == Backend::omp) \
      omp::call;                \
    else                        \
      reference::call;          \
  } while (0)

void poly_expand(const Grid<double>& image, const PolyBasis& basis, PolyField& out, Backend backend) {
  BUBBLE_DISPATCH(poly_expand(image, basis, out));
}
void flow_system(const PolyField& first, const PolyField& second, const Grid<Vec2>& flow, FlowSystem& out,
                 Backend backend) {
  BUBBLE_DISPATCH(flow_system(first, second, flow, out));
}
void box_average(const FlowSystem& in, int window, FlowSystem& out, Backend backend) {
  BUBBLE_DISPATCH(box_average(in, window, out));
}
void solve_flow(const FlowSystem& system, Grid<Vec2>& flow, Backend backend) {
  BUBBLE_DISPATCH(solve_flow(system, flow));
}
void gaussian_blur(const Grid<double>& in, double sigma, Grid<double>& out, Backend backend) {
  BUBBLE_DISPATCH(gaussian_blur(in, sigma, out));
}
void resize_bilinear(const Grid<double>& in, int width, int height, Grid<double>& out, Backend backend) {
  BUBBLE_DISPATCH(resize_bilinear(in, width, height, out));
}
void resize_flow(const Grid<Vec2>& in, int width, int height, Grid<Vec2>& out, Backend backend) {
  BUBBLE_DISPATCH(resize_flow(in, width, height, out));
}
void indentation_threshold(const Grid<double>& reference_mm, const Grid<double>& current_mm, double threshold_mm,
                           Grid<std::uint8_t>& out, Backend backend) {
  BUBBLE_DISPATCH(indentation_threshold(reference_mm, current_mm, threshold_mm, out));
}

#undef BUBBLE_DISPATCH

}  // namespace bubble::kernels
