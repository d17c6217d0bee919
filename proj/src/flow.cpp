#include "bubble/flow.hpp"

#include <cmath>
#include <vector>

#include "bubble/morphology.hpp"

namespace bubble::flow {

namespace {

constexpr double kIntensityScale = 255.0;

struct Level {
  Grid<double> first, second;
};

std::vector<Level> build_pyramid(const Grid<double>& a, const Grid<double>& b, const FlowParams& p) {
  std::vector<Level> pyr;
  for (int l = 0; l < p.levels; ++l) {
    const double s = std::pow(p.pyramid_scale, l);
    const int w = static_cast<int>(std::lround(a.width() * s));
    const int h = static_cast<int>(std::lround(a.height() * s));
    if (l > 0 && (w < p.poly_neighborhood || h < p.poly_neighborhood)) break;
    Level lv;
    if (l == 0) {
      lv.first = a;
      lv.second = b;
    } else {
      const double sigma = (1.0 / s - 1.0) * 0.5;
      Grid<double> blurred;
      kernels::gaussian_blur(a, sigma, blurred, p.backend);
      kernels::resize_bilinear(blurred, w, h, lv.first, p.backend);
      kernels::gaussian_blur(b, sigma, blurred, p.backend);
      kernels::resize_bilinear(blurred, w, h, lv.second, p.backend);
    }
    pyr.push_back(std::move(lv));
  }
  return pyr;
}

}  // namespace

void FlowParams::validate() const {
  if (levels < 1) throw ConfigError("flow needs at least one pyramid level");
  if (!(pyramid_scale > 0.0 && pyramid_scale < 1.0)) throw ConfigError("pyramid scale must lie in (0, 1)");
  if (window < 1 || window % 2 == 0) throw ConfigError("flow window must be odd and positive");
  if (iterations < 1) throw ConfigError("flow needs at least one iteration");
}

FlowField dense_flow(const IrImage& first, const IrImage& second, const ContactMask& mask, const FlowParams& params) {
  params.validate();
  if (!first.intensity.same_shape(second.intensity) || !first.intensity.same_shape(mask.on))
    throw ContractError("flow inputs differ in size");
  const int w = first.width(), h = first.height();
  FlowField out(w, h);
  const morphology::Binary valid = morphology::erode(mask.on, params.window / 2);
  bool any = false;
  for (auto v : valid.values()) any = any || v;
  if (!any) return out;

  Grid<double> a(w, h), b(w, h);
  for (std::size_t i = 0; i < a.size(); ++i) {
    a[i] = first.intensity[i] * kIntensityScale;
    b[i] = second.intensity[i] * kIntensityScale;
  }
  const auto pyramid = build_pyramid(a, b, params);
  const kernels::PolyBasis basis(params.poly_neighborhood, params.poly_sigma);

  Grid<Vec2> flow;
  for (int l = static_cast<int>(pyramid.size()) - 1; l >= 0; --l) {
    const auto& lv = pyramid[static_cast<std::size_t>(l)];
    const int lw = lv.first.width(), lh = lv.first.height();
    if (flow.empty()) {
      flow = Grid<Vec2>(lw, lh);
    } else {
      Grid<Vec2> up;
      kernels::resize_flow(flow, lw, lh, up, params.backend);
      flow = std::move(up);
    }
    kernels::PolyField p0, p1;
    kernels::poly_expand(lv.first, basis, p0, params.backend);
    kernels::poly_expand(lv.second, basis, p1, params.backend);
    kernels::FlowSystem sys, avg;
    for (int it = 0; it < params.iterations; ++it) {
      kernels::flow_system(p0, p1, flow, sys, params.backend);
      kernels::box_average(sys, params.window, avg, params.backend);
      kernels::solve_flow(avg, flow, params.backend);
    }
  }

  for (std::size_t i = 0; i < flow.size(); ++i) {
    if (!valid[i] || !std::isfinite(flow[i].x) || !std::isfinite(flow[i].y)) continue;
    out.displacement[i] = flow[i];
    out.valid[i] = 1;
  }
  return out;
}

FlowField dense_flow(const IrImage& first, const IrImage& second, const FlowParams& params) {
  return dense_flow(first, second, ContactMask(first.width(), first.height(), true), params);
}

}  // namespace bubble::flow
