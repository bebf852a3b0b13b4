#pragma once

#include <array>

#include "grid.hpp"

namespace innie {

struct Offset {
    int dr;
    int dc;
};

inline constexpr std::array<Offset, 8> kNeighbors8{
    {{-1, -1}, {-1, 0}, {-1, 1}, {0, -1}, {0, 1}, {1, -1}, {1, 0}, {1, 1}}};
inline constexpr std::array<Offset, 4> kNeighbors4{{{-1, 0}, {0, -1}, {0, 1}, {1, 0}}};

/// 4 or 8 neighbour offsets; anything else throws.
std::span<const Offset> neighbors(int connectivity);

/// Label the connected true regions of `mask` as 1..K in row-major order of
/// their first pixel. Background stays 0.
LabelMap label_components(const Mask& mask, int connectivity);

/// Relabel positive labels to 1..K in row-major order of first appearance.
LabelMap compact_labels(const LabelMap& labels);

/// Number of distinct positive labels.
std::size_t count_labels(const LabelMap& labels);

}  // namespace innie
