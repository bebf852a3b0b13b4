#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>

#include "grid.hpp"
#include "project.hpp"

namespace innie {

enum class ParticlePattern { flat, fringe };

/// Scene of bright disks on a dark background with optional concentric
/// fringes, a linear illumination gradient, Gaussian blur and noise.
struct SceneSpec {
    int rows = 256;
    int cols = 256;
    int min_particles = 25;
    int max_particles = 35;
    double min_radius = 8.0;
    double max_radius = 16.0;
    double max_overlap = 0.15;  // largest share of a new disk allowed on earlier disks
    double illumination = 0.3;  // peak relative brightness change across the canvas
    ParticlePattern pattern = ParticlePattern::fringe;
    double noise_sigma = 0.03;
    double blur_sigma = 1.0;
    std::uint64_t seed = 0;

    void validate() const;
};

class SynthError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct Scene {
    Image image;      // [0, 1]
    LabelMap labels;  // disk k -> label k; later disks win contested pixels
};

Scene generate_scene(const SceneSpec& spec);

struct DatasetSummary {
    std::size_t train = 0;
    std::size_t test = 0;
    std::filesystem::path manifest;
};

/// Writes n_images scenes as 16-bit PNGs: the first round(split * n) go to
/// train_images/train_masks, the rest to test_images/test_masks. Scene i uses
/// a seed derived from spec.seed and i. A key=value manifest records them.
DatasetSummary generate_dataset(const ProjectLayout& layout, const SceneSpec& spec, int n_images, double split);

}  // namespace innie
