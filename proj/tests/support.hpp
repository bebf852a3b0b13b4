#pragma once

#include <algorithm>
#include <cstdint>
#include <deque>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "grid.hpp"

namespace testing {

using innie::Grid;
using innie::Image;
using innie::LabelMap;
using innie::Mask;

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& name) {
        path_ = std::filesystem::temp_directory_path() /
                ("innie_test_" + name + "_" + std::to_string(std::random_device{}()));
        std::filesystem::remove_all(path_);
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;
    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& child) const { return path_ / child; }

private:
    std::filesystem::path path_;
};

inline std::vector<char> read_bytes(const std::filesystem::path& file) {
    std::ifstream in(file, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline std::string read_text(const std::filesystem::path& file) {
    const auto bytes = read_bytes(file);
    return {bytes.begin(), bytes.end()};
}

// All-pairs squared distance from each innie pixel to the nearest pixel with a
// different label. Background 0; INT64_MAX when no such pixel exists.
inline Grid<std::int64_t> brute_squared_distance(const LabelMap& labels) {
    Grid<std::int64_t> out(labels.rows(), labels.cols(), 0);
    for (int r = 0; r < labels.rows(); ++r)
        for (int c = 0; c < labels.cols(); ++c) {
            if (labels(r, c) == 0) continue;
            std::int64_t best = std::numeric_limits<std::int64_t>::max();
            for (int r2 = 0; r2 < labels.rows(); ++r2)
                for (int c2 = 0; c2 < labels.cols(); ++c2)
                    if (labels(r2, c2) != labels(r, c)) {
                        const std::int64_t dr = r - r2, dc = c - c2;
                        best = std::min(best, dr * dr + dc * dc);
                    }
            out(r, c) = best;
        }
    return out;
}

// Breadth-first flood fill labelling, used as a reference for component counts.
inline int flood_fill_count(const Mask& mask, int connectivity) {
    Grid<int> seen(mask.rows(), mask.cols(), 0);
    int count = 0;
    for (int r = 0; r < mask.rows(); ++r)
        for (int c = 0; c < mask.cols(); ++c) {
            if (!mask(r, c) || seen(r, c)) continue;
            ++count;
            std::deque<std::pair<int, int>> queue{{r, c}};
            seen(r, c) = 1;
            while (!queue.empty()) {
                auto [y, x] = queue.front();
                queue.pop_front();
                for (int dy = -1; dy <= 1; ++dy)
                    for (int dx = -1; dx <= 1; ++dx) {
                        if ((dy == 0 && dx == 0) || (connectivity == 4 && dy != 0 && dx != 0)) continue;
                        const int ny = y + dy, nx = x + dx;
                        if (mask.contains(ny, nx) && mask(ny, nx) && !seen(ny, nx)) {
                            seen(ny, nx) = 1;
                            queue.emplace_back(ny, nx);
                        }
                    }
            }
        }
    return count;
}

// Every region of `labels` is connected under `connectivity`.
inline bool regions_connected(const LabelMap& labels, int connectivity) {
    std::uint32_t max_label = 0;
    for (auto v : labels.values()) max_label = std::max(max_label, v);
    for (std::uint32_t k = 1; k <= max_label; ++k) {
        Mask m(labels.rows(), labels.cols(), 0);
        bool any = false;
        for (std::size_t i = 0; i < labels.size(); ++i)
            if (labels[i] == k) m[i] = 1, any = true;
        if (any && flood_fill_count(m, connectivity) != 1) return false;
    }
    return true;
}

inline LabelMap disk_labels(int rows, int cols, std::vector<std::tuple<double, double, double>> disks) {
    LabelMap labels(rows, cols, 0);
    std::uint32_t k = 0;
    for (auto [cr, cc, radius] : disks) {
        ++k;
        for (int r = 0; r < rows; ++r)
            for (int c = 0; c < cols; ++c)
                if ((r - cr) * (r - cr) + (c - cc) * (c - cc) <= radius * radius) labels(r, c) = k;
    }
    return labels;
}

// Random blobs: a handful of random rectangles and disks, touching allowed.
inline LabelMap random_blobs(std::mt19937_64& gen, int max_side) {
    std::uniform_int_distribution<int> side(1, max_side);
    const int rows = side(gen), cols = side(gen);
    LabelMap labels(rows, cols, 0);
    const int blobs = std::uniform_int_distribution<int>(0, 8)(gen);
    for (int k = 1; k <= blobs; ++k) {
        const int r0 = std::uniform_int_distribution<int>(0, rows - 1)(gen);
        const int c0 = std::uniform_int_distribution<int>(0, cols - 1)(gen);
        const int rad = std::uniform_int_distribution<int>(1, std::max(1, max_side / 4))(gen);
        const bool disk = gen() & 1;
        for (int r = std::max(0, r0 - rad); r <= std::min(rows - 1, r0 + rad); ++r)
            for (int c = std::max(0, c0 - rad); c <= std::min(cols - 1, c0 + rad); ++c)
                if (!disk || (r - r0) * (r - r0) + (c - c0) * (c - c0) <= rad * rad)
                    labels(r, c) = static_cast<std::uint32_t>(k);
    }
    return labels;
}

inline Image random_image(std::mt19937_64& gen, int rows, int cols) {
    std::uniform_real_distribution<float> u(-1.0f, 1.0f);
    Image image(rows, cols);
    for (float& v : image.values()) v = u(gen);
    return image;
}

}  // namespace testing
