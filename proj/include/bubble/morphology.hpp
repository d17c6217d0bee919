#pragma once

#include <cstdint>

#include "bubble/common.hpp"

namespace bubble::morphology {

using Binary = Grid<std::uint8_t>;

/// Keeps only the largest 8-connected foreground component. Ties go to the component
/// whose first pixel comes first in row-major order.
Binary largest_component(const Binary& mask);

/// Sets every background pixel that is not 4-connected to the image border.
Binary fill_holes(const Binary& mask);

/// Square-structuring-element erosion; pixels outside the image count as background.
Binary erode(const Binary& mask, int radius);

/// Number of 8-connected foreground components.
int count_components(const Binary& mask);

/// Exact Euclidean distance (in pixels) from every pixel to the nearest foreground pixel.
/// Returns +inf everywhere when the mask is empty.
Grid<double> distance_to_foreground(const Binary& mask);

}  // namespace bubble::morphology
