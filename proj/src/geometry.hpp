#pragma once

#include <cmath>
#include <cstdint>
#include <limits>

#include "grid.hpp"

namespace innie {

/// Per-pixel distance to the nearest pixel carrying a different label
/// (background included), capped at `cap`; 0 on background. Pixel-centre
/// Euclidean distances, exact: computed as integer squared distances with a
/// two-pass lower-envelope transform over each segment's complement.
DistanceMap distance_map(const LabelMap& labels, double cap);

/// Squared distances before the square root and cap. Background is 0. Values
/// are exact up to cap^2; farther pixels hold some value above cap^2
/// (INT64_MAX when the segment has no differing pixel in range).
Grid<std::int64_t> squared_edge_distance(const LabelMap& labels, double cap);

/// Integer squared distance -> capped float map value.
inline float capped_distance(std::int64_t squared, double cap) {
    if (squared == 0) return 0.0f;
    if (squared == std::numeric_limits<std::int64_t>::max()) return static_cast<float>(cap);
    const double d = std::sqrt(static_cast<double>(squared));
    return static_cast<float>(d < cap ? d : cap);
}

enum class PixelClass : std::uint8_t { outie = 0, innie = 1, excluded = 2 };

/// innie/outie by label, excluded wherever the AOI is false.
Grid<PixelClass> classify_pixels(const LabelMap& labels, const Mask& aoi);

}  // namespace innie
