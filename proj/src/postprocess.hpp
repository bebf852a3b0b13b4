#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "config.hpp"
#include "grid.hpp"
#include "network.hpp"
#include "sampler.hpp"

namespace innie {

struct PredictionMaps {
    Grid<float> probability;  // [0,1]; 0 outside the AOI
    DistanceMap distance;     // clamped to [0, cap]; 0 outside the AOI
    std::size_t evaluations = 0;
};

/// Run the network at every AOI-true pixel of `image` (raw intensities; it is
/// normalized over the AOI here). Rows are distributed over `threads`
/// workers; each pixel is evaluated on its own, so the maps do not depend on
/// the worker count.
PredictionMaps predict_maps(const Network<float>& net, const Image& image, const Mask& aoi,
                            const std::vector<int>& scales, double dist_cap, int threads = 1);

/// mask = prob >= threshold.
Mask binarize(const Grid<float>& probability, double threshold);

struct Marker {
    Pixel pixel;
    float value = 0;
    bool operator==(const Marker&) const = default;
};

/// Watershed seeds: local maxima of `dist` inside `mask`. Equal-valued
/// 8-connected plateaus count as one maximum, represented by the plateau
/// pixel closest to the plateau centroid. Candidates are visited by
/// descending value (row-major on ties) and kept only if at least `min_sep`
/// pixels from every kept marker in the same mask component, so each
/// component keeps at least one seed.
std::vector<Marker> find_markers(const DistanceMap& dist, const Mask& mask, double min_sep, int connectivity = 8);

/// Seeded priority flood over the mask: highest distance first, insertion
/// order on ties. Marker k (0-based) grows region k+1; every mask pixel
/// reachable from a marker gets exactly one label.
LabelMap watershed(const Mask& mask, const DistanceMap& dist, std::span<const Marker> markers, int connectivity);

struct Region {
    std::uint32_t label = 0;
    std::size_t area = 0;
    double centroid_row = 0;
    double centroid_col = 0;
    double mean_distance = 0;
};
std::vector<Region> region_table(const LabelMap& labels, const DistanceMap& dist);

struct Segmentation {
    PredictionMaps maps;
    Mask mask;
    std::vector<Marker> markers;
    LabelMap labels;
};

/// binarize -> find_markers -> watershed with the config's settings.
Segmentation segment(PredictionMaps maps, const ProjectConfig& config);

/// Writes the files for `mode` into `outdir`, named <stem>_<kind>.<ext>:
/// labels -> _labels.png, _regions.txt; binary -> _mask.png;
/// distance -> _dist.png (16-bit, value * 65535 / cap), _dist.f32;
/// all -> those plus _prob.png (16-bit, value * 65535).
std::vector<std::filesystem::path> write_outputs(const std::string& stem, const Segmentation& seg, OutputMode mode,
                                                 double dist_cap, const std::filesystem::path& outdir);

/// Float grid: "INNIEDST", u32 rows, u32 cols (16-byte header, little-endian),
/// then rows*cols little-endian f32 values, row-major.
void write_float_grid(const std::filesystem::path& file, const Grid<float>& grid);
Grid<float> read_float_grid(const std::filesystem::path& file);

void write_region_table(const std::filesystem::path& file, const std::vector<Region>& regions);

}  // namespace innie
