#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <vector>

namespace innie {

/// Decoded raster with interleaved samples, widened to 16 bits.
struct Raster {
    int rows = 0;
    int cols = 0;
    int channels = 1;   // 1 (gray) or 3 (RGB)
    int bit_depth = 8;  // 8 or 16
    std::vector<std::uint16_t> samples;

    std::uint16_t max_value() const { return bit_depth == 16 ? 65535 : 255; }
    std::uint16_t at(int r, int c, int ch = 0) const {
        return samples[(static_cast<std::size_t>(r) * cols + c) * channels + ch];
    }
};

class RasterError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

bool is_supported_raster(const std::filesystem::path& path);

/// PNG or TIFF by extension. Alpha channels are dropped, palettes expanded.
/// Bit depths other than 8 and 16 are rejected.
Raster read_raster(const std::filesystem::path& path);

/// Grayscale or RGB PNG, 8 or 16 bit. Output bytes depend only on the input.
void write_png(const std::filesystem::path& path, const Raster& raster);

/// Grayscale or RGB baseline TIFF, uncompressed.
void write_tiff(const std::filesystem::path& path, const Raster& raster);

}  // namespace innie
