#pragma once

#include "grid.hpp"

namespace innie {

// The 8 symmetries of the square. Orientation o mirrors columns when o >= 4,
// then rotates (o % 4) quarter turns counter-clockwise.
inline constexpr int kOrientations = 8;

/// Where pixel p of a rows x cols grid lands under orientation o.
inline Pixel transform_pixel(Pixel p, int rows, int cols, int orientation) {
    if (orientation >= 4) p.col = cols - 1 - p.col;
    for (int k = 0; k < orientation % 4; ++k) {
        p = Pixel{cols - 1 - p.col, p.row};
        std::swap(rows, cols);
    }
    return p;
}

template <class T>
Grid<T> transform_grid(const Grid<T>& in, int orientation) {
    const bool swaps = (orientation % 4) % 2 == 1;
    Grid<T> out(swaps ? in.cols() : in.rows(), swaps ? in.rows() : in.cols());
    for (int r = 0; r < in.rows(); ++r)
        for (int c = 0; c < in.cols(); ++c) {
            const Pixel q = transform_pixel({r, c}, in.rows(), in.cols(), orientation);
            out(q.row, q.col) = in(r, c);
        }
    return out;
}

/// In-place transform of a square side x side plane, `scratch` sized side*side.
template <class T>
void transform_square(T* plane, int side, int orientation, T* scratch) {
    if (orientation == 0) return;
    for (int r = 0; r < side; ++r)
        for (int c = 0; c < side; ++c) {
            const Pixel q = transform_pixel({r, c}, side, side, orientation);
            scratch[q.row * side + q.col] = plane[r * side + c];
        }
    for (int i = 0; i < side * side; ++i) plane[i] = scratch[i];
}

}  // namespace innie
