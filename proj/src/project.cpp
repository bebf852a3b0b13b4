#include "project.hpp"

#include <algorithm>
#include <unordered_map>

#include "components.hpp"
#include "log.hpp"

namespace innie {

ProjectLayout init_project(const fs::path& root) {
    ProjectLayout layout{root};
    std::error_code ec;
    if (fs::exists(layout.config_file(), ec))
        throw ProjectError(ProjectError::Kind::exists, "project exists: " + layout.config_file().string());
    try {
        fs::create_directories(root);
        for (const char* sub : ProjectLayout::kSubdirs) fs::create_directories(root / sub);
        save_config(ProjectConfig{}, layout.config_file());
    } catch (const fs::filesystem_error& e) {
        throw ProjectError(ProjectError::Kind::not_writable, "not writable: " + root.string() + " (" + e.what() + ")");
    } catch (const ConfigError& e) {
        throw ProjectError(ProjectError::Kind::not_writable, "not writable: " + root.string() + " (" + e.what() + ")");
    }
    return layout;
}

ProjectLayout open_project(const fs::path& root) {
    ProjectLayout layout{root};
    std::error_code ec;
    if (!fs::is_regular_file(layout.config_file(), ec))
        throw ProjectError(ProjectError::Kind::not_initialized,
                           "not an initialized project (no " + std::string(ProjectLayout::kConfigName) +
                               "): " + root.string());
    return layout;
}

Image to_luminance(const Raster& raster) {
    Image image(raster.rows, raster.cols);
    const float scale = 1.0f / static_cast<float>(raster.max_value());
    for (int r = 0; r < raster.rows; ++r) {
        for (int c = 0; c < raster.cols; ++c) {
            if (raster.channels == 1) {
                image(r, c) = raster.at(r, c) * scale;
            } else {
                const double y = 0.2126 * raster.at(r, c, 0) + 0.7152 * raster.at(r, c, 1) + 0.0722 * raster.at(r, c, 2);
                image(r, c) = static_cast<float>(y) * scale;
            }
        }
    }
    return image;
}

LabelMap labels_from_raster(const Raster& raster, int connectivity) {
    LabelMap raw(raster.rows, raster.cols, 0);
    std::unordered_map<std::uint64_t, std::uint32_t> colors;
    for (int r = 0; r < raster.rows; ++r) {
        for (int c = 0; c < raster.cols; ++c) {
            std::uint64_t key = raster.at(r, c, 0);
            if (raster.channels == 3)
                key = (key << 32) | (std::uint64_t{raster.at(r, c, 1)} << 16) | raster.at(r, c, 2);
            if (!key) continue;
            if (raster.channels == 1) {
                raw(r, c) = static_cast<std::uint32_t>(key);
                colors.try_emplace(key, 0);
            } else {
                auto [it, inserted] = colors.try_emplace(key, static_cast<std::uint32_t>(colors.size() + 1));
                raw(r, c) = it->second;
            }
        }
    }
    if (colors.size() <= 1) {
        Mask mask(raster.rows, raster.cols, 0);
        for (std::size_t i = 0; i < raw.size(); ++i) mask[i] = raw[i] != 0;
        return label_components(mask, connectivity);
    }
    return raw;
}

Image load_image(const fs::path& file) { return to_luminance(read_raster(file)); }

LabelMap load_labels(const fs::path& file, int connectivity) {
    return labels_from_raster(read_raster(file), connectivity);
}

Mask load_aoi(const fs::path& file) {
    const Raster raster = read_raster(file);
    Mask mask(raster.rows, raster.cols, 0);
    for (int r = 0; r < raster.rows; ++r)
        for (int c = 0; c < raster.cols; ++c) {
            bool on = false;
            for (int ch = 0; ch < raster.channels; ++ch) on = on || raster.at(r, c, ch) != 0;
            mask(r, c) = on;
        }
    return mask;
}

void write_labels(const fs::path& file, const LabelMap& labels) {
    Raster raster{labels.rows(), labels.cols(), 1, 16, {}};
    raster.samples.resize(labels.size());
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] > 65535) throw RasterError("label " + std::to_string(labels[i]) + " does not fit a 16-bit PNG");
        raster.samples[i] = static_cast<std::uint16_t>(labels[i]);
    }
    write_png(file, raster);
}

std::vector<fs::path> list_images(const fs::path& dir) {
    std::vector<fs::path> files;
    std::error_code ec;
    if (!fs::is_directory(dir, ec)) return files;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (entry.is_regular_file() && is_supported_raster(entry.path())) files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    return files;
}

std::optional<fs::path> find_by_stem(const fs::path& dir, const std::string& stem) {
    for (const auto& file : list_images(dir))
        if (file.stem().string() == stem) return file;
    return std::nullopt;
}

std::vector<ImageEntry> training_entries(const ProjectLayout& layout) {
    std::vector<ImageEntry> entries;
    for (const auto& image : list_images(layout.train_images())) {
        ImageEntry entry{image.stem().string(), image, find_by_stem(layout.train_masks(), image.stem().string()),
                         find_by_stem(layout.areas_of_interest(), image.stem().string())};
        if (!entry.mask) {
            log::warn("no mask for training image {}; skipping it", image.filename().string());
            continue;
        }
        entries.push_back(std::move(entry));
    }
    return entries;
}

std::vector<ImageEntry> test_entries(const ProjectLayout& layout) {
    std::vector<ImageEntry> entries;
    for (const auto& image : list_images(layout.test_images())) {
        const std::string stem = image.stem().string();
        entries.push_back({stem, image, find_by_stem(layout.test_masks(), stem),
                           find_by_stem(layout.areas_of_interest(), stem)});
    }
    return entries;
}

Mask aoi_for(const ImageEntry& entry, int rows, int cols) {
    if (!entry.aoi) return Mask(rows, cols, 1);
    Mask aoi = load_aoi(*entry.aoi);
    require_same_shape(aoi, Mask(rows, cols), ("area of interest " + entry.aoi->filename().string()).c_str());
    return aoi;
}

}  // namespace innie
