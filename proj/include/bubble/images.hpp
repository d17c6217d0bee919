#pragma once

#include <cstdint>

#include "bubble/common.hpp"

namespace bubble {

/// Range image from the internal ToF sensor, millimetres per pixel.
struct DepthImage {
  Grid<double> range_mm;
  double timestamp_s = 0.0;
  double pressure_hpa = 0.0;  // bubble pressure when the frame was captured

  int width() const { return range_mm.width(); }
  int height() const { return range_mm.height(); }
};

/// IR amplitude image, intensities in [0, 1].
struct IrImage {
  Grid<double> intensity;
  double timestamp_s = 0.0;

  int width() const { return intensity.width(); }
  int height() const { return intensity.height(); }
};

struct ContactMask {
  Grid<std::uint8_t> on;

  ContactMask() = default;
  ContactMask(int width, int height, bool fill = false) : on(width, height, fill ? 1 : 0) {}

  int width() const { return on.width(); }
  int height() const { return on.height(); }
  bool operator()(int x, int y) const { return on(x, y) != 0; }
  std::size_t count() const;
  bool none() const { return count() == 0; }
};

/// Dense displacement field in pixels. Vectors outside `valid` are zero and carry no meaning.
struct FlowField {
  Grid<Vec2> displacement;
  Grid<std::uint8_t> valid;

  FlowField() = default;
  FlowField(int width, int height) : displacement(width, height), valid(width, height, 0) {}

  int width() const { return displacement.width(); }
  int height() const { return displacement.height(); }
  std::size_t valid_count() const;
};

inline std::size_t ContactMask::count() const {
  std::size_t n = 0;
  for (auto v : on.values()) n += v != 0;
  return n;
}

inline std::size_t FlowField::valid_count() const {
  std::size_t n = 0;
  for (auto v : valid.values()) n += v != 0;
  return n;
}

}  // namespace bubble
