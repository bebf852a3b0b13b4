#include "synth.hpp"

#include <fmt/core.h>
#include <fmt/os.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "raster.hpp"
#include "rng.hpp"
#include "sampler.hpp"

namespace innie {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr int kPlacementTries = 2000;

struct Disk {
    int row;
    int col;
    double radius;
    double brightness;
    double period;
    double phase;
};

bool inside(const Disk& d, int r, int c) {
    const double dr = r - d.row, dc = c - d.col;
    return dr * dr + dc * dc <= d.radius * d.radius;
}

void gaussian_blur(Image& image, double sigma) {
    if (sigma <= 0) return;
    const int radius = static_cast<int>(std::ceil(3.0 * sigma));
    std::vector<double> kernel(2 * radius + 1);
    double total = 0;
    for (int i = -radius; i <= radius; ++i) total += kernel[i + radius] = std::exp(-0.5 * i * i / (sigma * sigma));
    for (double& k : kernel) k /= total;

    Image tmp(image.rows(), image.cols());
    for (int r = 0; r < image.rows(); ++r)
        for (int c = 0; c < image.cols(); ++c) {
            double acc = 0;
            for (int i = -radius; i <= radius; ++i) acc += kernel[i + radius] * image(r, reflect_index(c + i, image.cols()));
            tmp(r, c) = static_cast<float>(acc);
        }
    for (int r = 0; r < image.rows(); ++r)
        for (int c = 0; c < image.cols(); ++c) {
            double acc = 0;
            for (int i = -radius; i <= radius; ++i) acc += kernel[i + radius] * tmp(reflect_index(r + i, image.rows()), c);
            image(r, c) = static_cast<float>(acc);
        }
}

void write_gray16(const std::filesystem::path& file, const Image& image) {
    Raster raster{image.rows(), image.cols(), 1, 16, {}};
    raster.samples.resize(image.size());
    for (std::size_t i = 0; i < image.size(); ++i)
        raster.samples[i] = static_cast<std::uint16_t>(std::lround(std::clamp(image[i], 0.0f, 1.0f) * 65535.0f));
    write_png(file, raster);
}

}  // namespace

void SceneSpec::validate() const {
    if (rows < 64 || cols < 64) throw SynthError("canvas must be at least 64x64");
    if (min_radius < 2 || max_radius < min_radius) throw SynthError("radii must satisfy 2 <= min_radius <= max_radius");
    if (min_particles < 0 || max_particles < min_particles) throw SynthError("invalid particle count range");
    if (2 * max_radius + 1 > std::min(rows, cols)) throw SynthError("particles do not fit on the canvas");
    if (max_overlap < 0 || max_overlap > 1) throw SynthError("max_overlap must be in [0,1]");
    if (noise_sigma < 0 || blur_sigma < 0 || illumination < 0) throw SynthError("noise, blur and illumination must be >= 0");
}

Scene generate_scene(const SceneSpec& spec) {
    spec.validate();
    Rng rng(spec.seed);
    Scene scene{Image(spec.rows, spec.cols, 0.0f), LabelMap(spec.rows, spec.cols, 0)};
    const int count = rng.between(spec.min_particles, spec.max_particles);

    std::vector<Disk> disks;
    for (int k = 0; k < count; ++k) {
        bool placed = false;
        for (int attempt = 0; attempt < kPlacementTries && !placed; ++attempt) {
            const double radius = rng.uniform(spec.min_radius, spec.max_radius);
            const int reach = static_cast<int>(std::ceil(radius));
            const Disk d{rng.between(reach, spec.rows - 1 - reach), rng.between(reach, spec.cols - 1 - reach), radius,
                         rng.uniform(0.55, 0.85), rng.uniform(3.5, 6.0), rng.uniform(0.0, 2.0 * kPi)};
            std::size_t area = 0, overlap = 0;
            for (int r = d.row - reach; r <= d.row + reach; ++r)
                for (int c = d.col - reach; c <= d.col + reach; ++c)
                    if (inside(d, r, c)) {
                        ++area;
                        overlap += scene.labels(r, c) != 0;
                    }
            if (static_cast<double>(overlap) > spec.max_overlap * static_cast<double>(area)) continue;
            const auto label = static_cast<std::uint32_t>(disks.size() + 1);
            for (int r = d.row - reach; r <= d.row + reach; ++r)
                for (int c = d.col - reach; c <= d.col + reach; ++c)
                    if (inside(d, r, c)) scene.labels(r, c) = label;
            disks.push_back(d);
            placed = true;
        }
        if (!placed)
            throw SynthError(fmt::format("could not place particle {} of {} after {} tries; lower the particle "
                                         "count, radius or raise the overlap allowance",
                                         k + 1, count, kPlacementTries));
    }

    const double background = 0.15;
    const double angle = rng.uniform(0.0, 2.0 * kPi);
    const double half = 0.5 * std::max(spec.rows, spec.cols);
    for (int r = 0; r < spec.rows; ++r) {
        for (int c = 0; c < spec.cols; ++c) {
            double value = background;
            if (const std::uint32_t k = scene.labels(r, c)) {
                const Disk& d = disks[k - 1];
                const double rho = std::hypot(r - d.row, c - d.col);
                value = d.brightness;
                if (spec.pattern == ParticlePattern::fringe) value += 0.25 * std::sin(2.0 * kPi * rho / d.period + d.phase);
                if (d.radius - rho < 1.5) value *= 0.6;  // dark rim
            }
            const double along = ((r - spec.rows / 2.0) * std::sin(angle) + (c - spec.cols / 2.0) * std::cos(angle)) / half;
            scene.image(r, c) = static_cast<float>(value * (1.0 + spec.illumination * along));
        }
    }
    gaussian_blur(scene.image, spec.blur_sigma);
    if (spec.noise_sigma > 0)
        for (float& v : scene.image.values()) v += static_cast<float>(spec.noise_sigma * rng.normal());
    for (float& v : scene.image.values()) v = std::clamp(v, 0.0f, 1.0f);
    return scene;
}

DatasetSummary generate_dataset(const ProjectLayout& layout, const SceneSpec& spec, int n_images, double split) {
    if (n_images < 0) throw SynthError("image count must be non-negative");
    if (!(split >= 0 && split <= 1)) throw SynthError("split must be in [0,1]");
    spec.validate();
    namespace fs = std::filesystem;
    for (const fs::path& dir : {layout.train_images(), layout.train_masks(), layout.test_images(), layout.test_masks()})
        fs::create_directories(dir);

    DatasetSummary summary;
    summary.train = static_cast<std::size_t>(std::nearbyint(split * n_images));
    summary.test = static_cast<std::size_t>(n_images) - summary.train;
    summary.manifest = layout.root / "synth_manifest.txt";

    auto manifest = fmt::output_file(summary.manifest.string());
    manifest.print("images={}\ntrain={}\ntest={}\nseed={}\nrows={}\ncols={}\nparticles={}-{}\nradius={}-{}\n"
                   "max_overlap={}\npattern={}\nillumination={}\nnoise_sigma={}\nblur_sigma={}\n",
                   n_images, summary.train, summary.test, spec.seed, spec.rows, spec.cols, spec.min_particles,
                   spec.max_particles, spec.min_radius, spec.max_radius, spec.max_overlap,
                   spec.pattern == ParticlePattern::fringe ? "fringe" : "flat", spec.illumination, spec.noise_sigma,
                   spec.blur_sigma);
    for (int i = 0; i < n_images; ++i) {
        SceneSpec scene_spec = spec;
        scene_spec.seed = Rng::derive(spec.seed, static_cast<std::uint64_t>(i));
        const Scene scene = generate_scene(scene_spec);
        const std::string stem = fmt::format("synth_{:03d}", i);
        const bool train = static_cast<std::size_t>(i) < summary.train;
        write_gray16((train ? layout.train_images() : layout.test_images()) / (stem + ".png"), scene.image);
        write_labels((train ? layout.train_masks() : layout.test_masks()) / (stem + ".png"), scene.labels);
        manifest.print("{}.seed={}\n{}.split={}\n", stem, scene_spec.seed, stem, train ? "train" : "test");
    }
    return summary;
}

}  // namespace innie
