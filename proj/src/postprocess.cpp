#include "postprocess.hpp"

#include <fmt/core.h>
#include <fmt/os.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <iterator>
#include <limits>
#include <queue>

#include "components.hpp"
#include "parallel.hpp"
#include "project.hpp"
#include "raster.hpp"

namespace innie {

PredictionMaps predict_maps(const Network<float>& net, const Image& image, const Mask& aoi,
                            const std::vector<int>& scales, double dist_cap, int threads) {
    require_same_shape(image, aoi, "image vs area of interest");
    if (static_cast<int>(scales.size()) != net.architecture().in_channels)
        throw ChannelMismatch("model expects " + std::to_string(net.architecture().in_channels) + " scales, got " +
                              std::to_string(scales.size()));
    PredictionMaps maps{Grid<float>(image.rows(), image.cols(), 0.0f), DistanceMap(image.rows(), image.cols(), 0.0f), 0};
    std::size_t active = 0;
    for (auto v : aoi.values()) active += v != 0;
    if (active == 0) return maps;

    const PatchSource source(normalize_image(image, &aoi), scales);
    const float cap = static_cast<float>(dist_cap);
    std::vector<std::size_t> per_row(static_cast<std::size_t>(image.rows()), 0);
    parallel_for(static_cast<std::size_t>(image.rows()), threads, [&](std::size_t task) {
        const int r = static_cast<int>(task);
        auto ws = net.make_workspace();
        std::vector<float> stack(source.stack_size());
        for (int c = 0; c < image.cols(); ++c) {
            if (!aoi(r, c)) continue;
            source.extract_stack({r, c}, stack);
            const Prediction<float> p = net.forward(stack, *ws);
            maps.probability(r, c) = p.class_prob;
            maps.distance(r, c) = std::clamp(p.distance, 0.0f, cap);
            ++per_row[task];
        }
    });
    for (std::size_t n : per_row) maps.evaluations += n;
    return maps;
}

Mask binarize(const Grid<float>& probability, double threshold) {
    Mask mask(probability.rows(), probability.cols(), 0);
    const float t = static_cast<float>(threshold);
    for (std::size_t i = 0; i < probability.size(); ++i) mask[i] = probability[i] >= t;
    return mask;
}

std::vector<Marker> find_markers(const DistanceMap& dist, const Mask& mask, double min_sep, int connectivity) {
    require_same_shape(dist, mask, "distance map vs mask");
    if (!(min_sep > 0)) throw std::invalid_argument("min_marker_separation must be positive");

    const int rows = mask.rows(), cols = mask.cols();
    Grid<std::int32_t> plateau(rows, cols, -1);
    std::vector<Marker> candidates;
    std::vector<Pixel> members, stack;
    std::int32_t next_id = 0;
    for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < cols; ++c) {
            if (!mask(r, c) || plateau(r, c) >= 0) continue;
            const float value = dist(r, c);
            const std::int32_t id = next_id++;
            members.clear();
            stack.assign(1, Pixel{r, c});
            plateau(r, c) = id;
            bool is_max = true;
            while (!stack.empty()) {
                const Pixel p = stack.back();
                stack.pop_back();
                members.push_back(p);
                for (const Offset& o : kNeighbors8) {
                    const int rr = p.row + o.dr, cc = p.col + o.dc;
                    if (!mask.contains(rr, cc) || !mask(rr, cc)) continue;
                    const float v = dist(rr, cc);
                    if (v > value) is_max = false;
                    if (v == value && plateau(rr, cc) < 0) {
                        plateau(rr, cc) = id;
                        stack.push_back({rr, cc});
                    }
                }
            }
            if (!is_max) continue;
            double sr = 0, sc = 0;
            for (const Pixel& p : members) {
                sr += p.row;
                sc += p.col;
            }
            sr /= static_cast<double>(members.size());
            sc /= static_cast<double>(members.size());
            std::sort(members.begin(), members.end(),
                      [](const Pixel& a, const Pixel& b) { return a.row != b.row ? a.row < b.row : a.col < b.col; });
            Pixel best = members.front();
            double best_d = std::numeric_limits<double>::infinity();
            for (const Pixel& p : members) {
                const double d = (p.row - sr) * (p.row - sr) + (p.col - sc) * (p.col - sc);
                if (d < best_d) {
                    best_d = d;
                    best = p;
                }
            }
            candidates.push_back({best, value});
        }
    }

    std::sort(candidates.begin(), candidates.end(), [](const Marker& a, const Marker& b) {
        if (a.value != b.value) return a.value > b.value;
        if (a.pixel.row != b.pixel.row) return a.pixel.row < b.pixel.row;
        return a.pixel.col < b.pixel.col;
    });

    const LabelMap component = label_components(mask, connectivity);
    const double sep2 = min_sep * min_sep;
    std::vector<Marker> kept;
    for (const Marker& m : candidates) {
        const std::uint32_t comp = component(m.pixel.row, m.pixel.col);
        bool ok = true;
        for (const Marker& k : kept) {
            if (component(k.pixel.row, k.pixel.col) != comp) continue;
            const double dr = m.pixel.row - k.pixel.row, dc = m.pixel.col - k.pixel.col;
            if (dr * dr + dc * dc < sep2) {
                ok = false;
                break;
            }
        }
        if (ok) kept.push_back(m);
    }
    return kept;
}

LabelMap watershed(const Mask& mask, const DistanceMap& dist, std::span<const Marker> markers, int connectivity) {
    require_same_shape(mask, dist, "mask vs distance map");
    const auto offsets = neighbors(connectivity);
    LabelMap labels(mask.rows(), mask.cols(), 0);

    struct Item {
        float value;
        std::uint64_t order;
        Pixel pixel;
    };
    // Highest value first; among equals, earliest inserted first.
    auto later = [](const Item& a, const Item& b) {
        if (a.value != b.value) return a.value < b.value;
        return a.order > b.order;
    };
    std::priority_queue<Item, std::vector<Item>, decltype(later)> queue(later);
    std::uint64_t order = 0;
    for (std::size_t k = 0; k < markers.size(); ++k) {
        const Pixel p = markers[k].pixel;
        if (!mask.contains(p.row, p.col) || !mask(p.row, p.col))
            throw std::invalid_argument("watershed marker outside the mask");
        if (labels(p.row, p.col)) continue;
        labels(p.row, p.col) = static_cast<std::uint32_t>(k + 1);
        queue.push({dist(p.row, p.col), order++, p});
    }
    while (!queue.empty()) {
        const Item item = queue.top();
        queue.pop();
        const std::uint32_t label = labels(item.pixel.row, item.pixel.col);
        for (const Offset& o : offsets) {
            const int rr = item.pixel.row + o.dr, cc = item.pixel.col + o.dc;
            if (!mask.contains(rr, cc) || !mask(rr, cc) || labels(rr, cc)) continue;
            labels(rr, cc) = label;
            queue.push({dist(rr, cc), order++, {rr, cc}});
        }
    }
    return labels;
}

std::vector<Region> region_table(const LabelMap& labels, const DistanceMap& dist) {
    require_same_shape(labels, dist, "labels vs distance map");
    std::uint32_t max_label = 0;
    for (auto v : labels.values()) max_label = std::max(max_label, v);
    struct Acc {
        std::size_t area = 0;
        double rows = 0, cols = 0, dist = 0;
    };
    std::vector<Acc> acc(static_cast<std::size_t>(max_label) + 1);
    for (int r = 0; r < labels.rows(); ++r)
        for (int c = 0; c < labels.cols(); ++c) {
            const std::uint32_t k = labels(r, c);
            if (!k) continue;
            Acc& a = acc[k];
            ++a.area;
            a.rows += r;
            a.cols += c;
            a.dist += dist(r, c);
        }
    std::vector<Region> regions;
    for (std::uint32_t k = 1; k <= max_label; ++k) {
        const Acc& a = acc[k];
        if (!a.area) continue;
        const double n = static_cast<double>(a.area);
        regions.push_back({k, a.area, a.rows / n, a.cols / n, a.dist / n});
    }
    return regions;
}

Segmentation segment(PredictionMaps maps, const ProjectConfig& config) {
    Segmentation seg;
    seg.mask = binarize(maps.probability, config.threshold);
    seg.markers = find_markers(maps.distance, seg.mask, config.min_marker_separation, config.connectivity);
    seg.labels = watershed(seg.mask, maps.distance, seg.markers, config.connectivity);
    seg.maps = std::move(maps);
    return seg;
}

void write_float_grid(const std::filesystem::path& file, const Grid<float>& grid) {
    std::vector<std::uint8_t> bytes;
    bytes.reserve(16 + grid.size() * 4);
    const char magic[8] = {'I', 'N', 'N', 'I', 'E', 'D', 'S', 'T'};
    bytes.insert(bytes.end(), magic, magic + 8);
    auto put32 = [&](std::uint32_t v) {
        for (int i = 0; i < 4; ++i) bytes.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    };
    put32(static_cast<std::uint32_t>(grid.rows()));
    put32(static_cast<std::uint32_t>(grid.cols()));
    for (float v : grid.values()) put32(std::bit_cast<std::uint32_t>(v));
    std::ofstream out(file, std::ios::binary | std::ios::trunc);
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw RasterError("cannot write " + file.string());
}

Grid<float> read_float_grid(const std::filesystem::path& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in) throw RasterError("cannot read " + file.string());
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (bytes.size() < 16 || std::string(bytes.begin(), bytes.begin() + 8) != "INNIEDST")
        throw RasterError("not a float grid: " + file.string());
    auto get32 = [&](std::size_t at) {
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(bytes[at + i]) << (8 * i);
        return v;
    };
    const std::uint32_t rows = get32(8), cols = get32(12);
    if (bytes.size() != 16 + static_cast<std::size_t>(rows) * cols * 4)
        throw RasterError("float grid size does not match its header: " + file.string());
    Grid<float> grid(static_cast<int>(rows), static_cast<int>(cols));
    for (std::size_t i = 0; i < grid.size(); ++i) grid[i] = std::bit_cast<float>(get32(16 + 4 * i));
    return grid;
}

void write_region_table(const std::filesystem::path& file, const std::vector<Region>& regions) {
    auto out = fmt::output_file(file.string());
    out.print("label\tarea\tcentroid_row\tcentroid_col\tmean_distance\n");
    for (const Region& r : regions)
        out.print("{}\t{}\t{:.4f}\t{:.4f}\t{:.4f}\n", r.label, r.area, r.centroid_row, r.centroid_col, r.mean_distance);
}

namespace {

Raster scaled_raster(const Grid<float>& grid, double full_scale) {
    Raster raster{grid.rows(), grid.cols(), 1, 16, {}};
    raster.samples.resize(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double v = std::clamp(static_cast<double>(grid[i]) / full_scale, 0.0, 1.0);
        raster.samples[i] = static_cast<std::uint16_t>(std::lround(v * 65535.0));
    }
    return raster;
}

}  // namespace

std::vector<std::filesystem::path> write_outputs(const std::string& stem, const Segmentation& seg, OutputMode mode,
                                                 double dist_cap, const std::filesystem::path& outdir) {
    std::vector<std::filesystem::path> written;
    auto path = [&](const char* suffix) {
        written.push_back(outdir / (stem + suffix));
        return written.back();
    };
    const bool all = mode == OutputMode::all;
    if (all || mode == OutputMode::labels) {
        write_labels(path("_labels.png"), seg.labels);
        write_region_table(path("_regions.txt"), region_table(seg.labels, seg.maps.distance));
    }
    if (all || mode == OutputMode::binary) {
        Raster raster{seg.mask.rows(), seg.mask.cols(), 1, 8, {}};
        raster.samples.resize(seg.mask.size());
        for (std::size_t i = 0; i < seg.mask.size(); ++i) raster.samples[i] = seg.mask[i] ? 255 : 0;
        write_png(path("_mask.png"), raster);
    }
    if (all || mode == OutputMode::distance) {
        write_png(path("_dist.png"), scaled_raster(seg.maps.distance, dist_cap));
        write_float_grid(path("_dist.f32"), seg.maps.distance);
    }
    if (all) write_png(path("_prob.png"), scaled_raster(seg.maps.probability, 1.0));
    return written;
}

}  // namespace innie
