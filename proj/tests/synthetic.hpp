#pragma once

// Fixtures shared by unit and acceptance tests.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "bubble/images.hpp"

namespace bubble::testing {

/// Smooth random texture: a sum of Gaussian blobs, evaluated at (x - shift).
class BlobTexture {
 public:
  explicit BlobTexture(std::uint64_t seed, int blobs = 400, int width = 224, int height = 171) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> ux(-20.0, width + 20.0), uy(-20.0, height + 20.0), us(1.6, 3.2),
        ua(0.3, 1.0);
    for (int i = 0; i < blobs; ++i) blobs_.push_back({ux(rng), uy(rng), us(rng), ua(rng)});
  }

  double at(double x, double y) const {
    double v = 0.0;
    for (const auto& b : blobs_) {
      const double dx = x - b.x, dy = y - b.y;
      const double r2 = dx * dx + dy * dy;
      if (r2 < 100.0 * b.s * b.s) v += b.a * std::exp(-0.5 * r2 / (b.s * b.s));
    }
    return std::min(v, 1.0);
  }

  IrImage render(int width, int height, Vec2 shift = {}) const {
    IrImage ir;
    ir.intensity = Grid<double>(width, height);
    for (int y = 0; y < height; ++y)
      for (int x = 0; x < width; ++x) ir.intensity(x, y) = at(x - shift.x, y - shift.y);
    return ir;
  }

 private:
  struct Blob {
    double x, y, s, a;
  };
  std::vector<Blob> blobs_;
};

inline double median(std::vector<double> v) {
  if (v.empty()) return std::nan("");
  const auto mid = v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2);
  std::nth_element(v.begin(), mid, v.end());
  if (v.size() % 2) return *mid;
  return 0.5 * (*mid + *std::max_element(v.begin(), mid));
}

}  // namespace bubble::testing
