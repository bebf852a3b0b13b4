#include <doctest.h>

#include <random>
#include <set>

#include "dihedral.hpp"
#include "geometry.hpp"
#include "support.hpp"

using namespace innie;

namespace {

float oracle_value(std::int64_t squared, double cap) {
    if (squared == 0) return 0.0f;
    if (squared == std::numeric_limits<std::int64_t>::max()) return static_cast<float>(cap);
    return static_cast<float>(std::min(std::sqrt(static_cast<double>(squared)), cap));
}

}  // namespace

TEST_CASE("all-background map has zero distance") {
    const DistanceMap d = distance_map(LabelMap(9, 11, 0), 10);
    for (float v : d.values()) CHECK(v == 0.0f);
}

TEST_CASE("empty label map is valid") { CHECK(distance_map(LabelMap(0, 0), 10).empty()); }

TEST_CASE("single-pixel segment has distance 1") {
    LabelMap labels(11, 11, 0);
    labels(5, 5) = 1;
    const DistanceMap d = distance_map(labels, 10);
    for (int r = 0; r < 11; ++r)
        for (int c = 0; c < 11; ++c) CHECK(d(r, c) == ((r == 5 && c == 5) ? 1.0f : 0.0f));
}

TEST_CASE("segment filling the grid is capped everywhere") {
    const DistanceMap d = distance_map(LabelMap(6, 6, 3), 4.5);
    for (float v : d.values()) CHECK(v == 4.5f);
}

TEST_CASE("two touching disks match the all-pairs oracle") {
    const LabelMap labels = testing::disk_labels(32, 32, {{16, 9, 8}, {16, 24, 8}});
    const auto brute = testing::brute_squared_distance(labels);
    const auto fast = squared_edge_distance(labels, 10);
    const DistanceMap d = distance_map(labels, 10);
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (brute[i] <= 100) CHECK(fast[i] == brute[i]);
        else CHECK(fast[i] > 100);
        CHECK(d[i] == oracle_value(brute[i], 10));
    }
}

TEST_CASE("random blobs match the all-pairs oracle") {
    std::mt19937_64 gen(5);
    for (int trial = 0; trial < 60; ++trial) {
        const LabelMap labels = testing::random_blobs(gen, 40);
        const auto brute = testing::brute_squared_distance(labels);
        for (double cap : {3.0, 10.0}) {
            const DistanceMap d = distance_map(labels, cap);
            for (std::size_t i = 0; i < labels.size(); ++i) REQUIRE(d[i] == oracle_value(brute[i], cap));
        }
    }
}

TEST_CASE("non-integer cap") {
    std::mt19937_64 gen(8);
    const LabelMap labels = testing::random_blobs(gen, 48);
    const auto brute = testing::brute_squared_distance(labels);
    const DistanceMap d = distance_map(labels, 2.7);
    for (std::size_t i = 0; i < labels.size(); ++i) CHECK(d[i] == oracle_value(brute[i], 2.7));
}

TEST_CASE("distance map commutes with the dihedral group") {
    std::mt19937_64 gen(21);
    for (int trial = 0; trial < 10; ++trial) {
        const LabelMap labels = testing::random_blobs(gen, 48);
        const DistanceMap d = distance_map(labels, 10);
        for (int o = 0; o < kOrientations; ++o)
            CHECK(distance_map(transform_grid(labels, o), 10) == transform_grid(d, o));
    }
}

TEST_CASE("raising the cap never lowers a value") {
    std::mt19937_64 gen(34);
    for (int trial = 0; trial < 10; ++trial) {
        const LabelMap labels = testing::random_blobs(gen, 64);
        const DistanceMap lo = distance_map(labels, 3), hi = distance_map(labels, 10);
        for (std::size_t i = 0; i < labels.size(); ++i) {
            CHECK(hi[i] >= lo[i]);
            if (lo[i] < 3.0f) CHECK(hi[i] == lo[i]);
        }
    }
}

TEST_CASE("distance invariants") {
    std::mt19937_64 gen(55);
    const LabelMap labels = testing::random_blobs(gen, 64);
    const DistanceMap d = distance_map(labels, 10);
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] == 0) CHECK(d[i] == 0.0f);
        else CHECK((d[i] > 0.0f && d[i] <= 10.0f));
    }
}

TEST_CASE("pixel classes") {
    LabelMap labels(1, 3, 0);
    labels(0, 0) = 3;
    Mask aoi(1, 3, 1);
    aoi(0, 2) = 0;
    const auto cls = classify_pixels(labels, aoi);
    CHECK(cls(0, 0) == PixelClass::innie);
    CHECK(cls(0, 1) == PixelClass::outie);
    CHECK(cls(0, 2) == PixelClass::excluded);
    CHECK_THROWS_AS(classify_pixels(labels, Mask(2, 3, 1)), ShapeMismatch);
}

TEST_CASE("dihedral transforms form a group") {
    std::mt19937_64 gen(3);
    const Image image = testing::random_image(gen, 5, 8);
    CHECK(transform_grid(image, 0) == image);
    Image turned = image;
    for (int k = 0; k < 4; ++k) turned = transform_grid(turned, 1);
    CHECK(turned == image);
    for (int o = 4; o < 8; ++o) CHECK(transform_grid(transform_grid(image, o), o) == image);
    std::set<std::vector<float>> distinct;
    for (int o = 0; o < 8; ++o) {
        const Image t = transform_grid(image, o);
        distinct.insert({t.values().begin(), t.values().end()});
    }
    CHECK(distinct.size() == 8);
}
