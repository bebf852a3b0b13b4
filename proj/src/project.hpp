#pragma once

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "config.hpp"
#include "grid.hpp"
#include "raster.hpp"

namespace innie {

namespace fs = std::filesystem;

class ProjectError : public std::runtime_error {
public:
    enum class Kind { exists, not_writable, not_initialized, missing_data };
    ProjectError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    Kind kind() const noexcept { return kind_; }

private:
    Kind kind_;
};

/// Folder tree of a project. Masks and areas of interest pair with images by
/// file stem.
struct ProjectLayout {
    fs::path root;

    static constexpr const char* kConfigName = "config.txt";
    static constexpr const char* kSubdirs[] = {"train_images", "train_masks", "areas_of_interest",
                                               "test_images",  "models",      "outputs"};

    fs::path config_file() const { return root / kConfigName; }
    fs::path train_images() const { return root / "train_images"; }
    fs::path train_masks() const { return root / "train_masks"; }
    fs::path areas_of_interest() const { return root / "areas_of_interest"; }
    fs::path test_images() const { return root / "test_images"; }
    /// Ground truth for test images; not created by init, filled by synth or the user.
    fs::path test_masks() const { return root / "test_masks"; }
    fs::path models() const { return root / "models"; }
    fs::path outputs() const { return root / "outputs"; }
};

/// Create the folder tree and a commented default config.
ProjectLayout init_project(const fs::path& root);

/// Open an existing project; throws ProjectError(not_initialized) without a config file.
ProjectLayout open_project(const fs::path& root);

/// RGB is reduced to luminance 0.2126 R + 0.7152 G + 0.0722 B; samples are
/// scaled to [0, 1] by the bit depth's maximum.
Image to_luminance(const Raster& raster);

/// Masks with a single non-zero value are binary and get connected-component
/// labels; masks with several non-zero values are kept as labels (RGB colours
/// are renumbered 1..K in order of first appearance).
LabelMap labels_from_raster(const Raster& raster, int connectivity);

Image load_image(const fs::path& file);
LabelMap load_labels(const fs::path& file, int connectivity);
Mask load_aoi(const fs::path& file);

/// 16-bit grayscale PNG, pixel value = label.
void write_labels(const fs::path& file, const LabelMap& labels);

/// Supported raster files in `dir`, sorted by file name.
std::vector<fs::path> list_images(const fs::path& dir);

/// First supported raster in `dir` whose stem equals `stem`.
std::optional<fs::path> find_by_stem(const fs::path& dir, const std::string& stem);

struct ImageEntry {
    std::string stem;
    fs::path image;
    std::optional<fs::path> mask;
    std::optional<fs::path> aoi;
};

/// Training images with their masks; images without a mask are skipped with a warning.
std::vector<ImageEntry> training_entries(const ProjectLayout& layout);

/// Test images, with ground truth from test_masks when present.
std::vector<ImageEntry> test_entries(const ProjectLayout& layout);

/// The AOI for an image, or an all-true mask when none exists. Shape must match.
Mask aoi_for(const ImageEntry& entry, int rows, int cols);

}  // namespace innie
