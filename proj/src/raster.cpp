#include "raster.hpp"

#include <png.h>
#include <tiffio.h>

#include <algorithm>
#include <cctype>
#include <csetjmp>
#include <cstdarg>
#include <cstdio>
#include <cstring>
#include <memory>
#include <string>

namespace innie {

namespace {

std::string lower_extension(const std::filesystem::path& path) {
    std::string ext = path.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    return ext;
}

bool is_png(const std::filesystem::path& path) { return lower_extension(path) == ".png"; }
bool is_tiff(const std::filesystem::path& path) {
    const std::string ext = lower_extension(path);
    return ext == ".tif" || ext == ".tiff";
}

struct FileCloser {
    void operator()(std::FILE* f) const {
        if (f) std::fclose(f);
    }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

void png_error_handler(png_structp png, png_const_charp message) {
    auto* buffer = static_cast<std::string*>(png_get_error_ptr(png));
    if (buffer) *buffer = message;
    png_longjmp(png, 1);
}

void png_warning_handler(png_structp, png_const_charp) {}

Raster read_png(const std::filesystem::path& path) {
    FilePtr file(std::fopen(path.c_str(), "rb"));
    if (!file) throw RasterError("cannot open " + path.string());

    std::string message;
    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, &message, png_error_handler, png_warning_handler);
    if (!png) throw RasterError("libpng initialisation failed");
    png_infop info = png_create_info_struct(png);
    Raster raster;
    std::vector<png_byte> row;

    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw RasterError("cannot decode " + path.string() + ": " + message);
    }
    png_init_io(png, file.get());
    png_read_info(png, info);

    const int depth = png_get_bit_depth(png, info);
    const int color = png_get_color_type(png, info);
    if (color == PNG_COLOR_TYPE_PALETTE) {
        png_set_palette_to_rgb(png);
    } else if (depth != 8 && depth != 16) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw RasterError("unsupported bit depth " + std::to_string(depth) + " in " + path.string() +
                          " (8 or 16 bit required)");
    }
    if (color & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(png);
    png_read_update_info(png, info);

    raster.cols = static_cast<int>(png_get_image_width(png, info));
    raster.rows = static_cast<int>(png_get_image_height(png, info));
    raster.bit_depth = png_get_bit_depth(png, info);
    raster.channels = png_get_channels(png, info);
    if (raster.channels != 1 && raster.channels != 3) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw RasterError("unsupported channel layout in " + path.string());
    }
    const std::size_t per_row = static_cast<std::size_t>(raster.cols) * raster.channels;
    raster.samples.resize(per_row * raster.rows);
    row.resize(png_get_rowbytes(png, info));
    for (int r = 0; r < raster.rows; ++r) {
        png_read_row(png, row.data(), nullptr);
        std::uint16_t* dst = raster.samples.data() + per_row * r;
        if (raster.bit_depth == 16) {
            for (std::size_t i = 0; i < per_row; ++i)
                dst[i] = static_cast<std::uint16_t>((row[2 * i] << 8) | row[2 * i + 1]);
        } else {
            for (std::size_t i = 0; i < per_row; ++i) dst[i] = row[i];
        }
    }
    png_destroy_read_struct(&png, &info, nullptr);
    return raster;
}

thread_local std::string tiff_message;

void tiff_error_handler(const char* module, const char* format, va_list args) {
    char buffer[512];
    std::vsnprintf(buffer, sizeof buffer, format, args);
    tiff_message = std::string(module ? module : "tiff") + ": " + buffer;
}

void tiff_warning_handler(const char*, const char*, va_list) {}

struct TiffCloser {
    void operator()(TIFF* tif) const {
        if (tif) TIFFClose(tif);
    }
};
using TiffPtr = std::unique_ptr<TIFF, TiffCloser>;

void install_tiff_handlers() {
    static const bool installed = [] {
        TIFFSetErrorHandler(tiff_error_handler);
        TIFFSetWarningHandler(tiff_warning_handler);
        return true;
    }();
    (void)installed;
}

Raster read_tiff(const std::filesystem::path& path) {
    install_tiff_handlers();
    tiff_message.clear();
    TiffPtr tif(TIFFOpen(path.c_str(), "r"));
    if (!tif) throw RasterError("cannot open " + path.string() + (tiff_message.empty() ? "" : ": " + tiff_message));

    std::uint32_t width = 0, height = 0;
    std::uint16_t bits = 0, spp = 1, planar = PLANARCONFIG_CONTIG, format = SAMPLEFORMAT_UINT;
    TIFFGetField(tif.get(), TIFFTAG_IMAGEWIDTH, &width);
    TIFFGetField(tif.get(), TIFFTAG_IMAGELENGTH, &height);
    TIFFGetFieldDefaulted(tif.get(), TIFFTAG_BITSPERSAMPLE, &bits);
    TIFFGetFieldDefaulted(tif.get(), TIFFTAG_SAMPLESPERPIXEL, &spp);
    TIFFGetFieldDefaulted(tif.get(), TIFFTAG_PLANARCONFIG, &planar);
    TIFFGetFieldDefaulted(tif.get(), TIFFTAG_SAMPLEFORMAT, &format);

    if (bits != 8 && bits != 16)
        throw RasterError("unsupported bit depth " + std::to_string(bits) + " in " + path.string() +
                          " (8 or 16 bit required)");
    if (format != SAMPLEFORMAT_UINT) throw RasterError("unsupported sample format in " + path.string());
    if (spp != 1 && spp != 3 && spp != 4) throw RasterError("unsupported channel layout in " + path.string());
    if (planar != PLANARCONFIG_CONTIG && spp > 1) throw RasterError("planar TIFF not supported: " + path.string());

    Raster raster;
    raster.rows = static_cast<int>(height);
    raster.cols = static_cast<int>(width);
    raster.bit_depth = bits;
    raster.channels = spp == 1 ? 1 : 3;
    raster.samples.resize(static_cast<std::size_t>(width) * height * raster.channels);

    std::vector<unsigned char> line(static_cast<std::size_t>(TIFFScanlineSize(tif.get())));
    for (std::uint32_t r = 0; r < height; ++r) {
        if (TIFFReadScanline(tif.get(), line.data(), r, 0) < 0)
            throw RasterError("cannot decode " + path.string() + ": " + tiff_message);
        std::uint16_t* dst = raster.samples.data() + static_cast<std::size_t>(r) * width * raster.channels;
        for (std::uint32_t c = 0; c < width; ++c) {
            for (int ch = 0; ch < raster.channels; ++ch) {
                const std::size_t i = static_cast<std::size_t>(c) * spp + ch;
                std::uint16_t v;
                if (bits == 16) {
                    std::uint16_t tmp;
                    std::memcpy(&tmp, line.data() + 2 * i, 2);  // libtiff hands back native order
                    v = tmp;
                } else {
                    v = line[i];
                }
                dst[static_cast<std::size_t>(c) * raster.channels + ch] = v;
            }
        }
    }
    return raster;
}

void check_writable(const Raster& raster) {
    if (raster.channels != 1 && raster.channels != 3) throw RasterError("can only write gray or RGB rasters");
    if (raster.bit_depth != 8 && raster.bit_depth != 16) throw RasterError("can only write 8 or 16 bit rasters");
    if (raster.samples.size() != static_cast<std::size_t>(raster.rows) * raster.cols * raster.channels)
        throw RasterError("raster sample count does not match its shape");
}

}  // namespace

bool is_supported_raster(const std::filesystem::path& path) { return is_png(path) || is_tiff(path); }

Raster read_raster(const std::filesystem::path& path) {
    if (is_png(path)) return read_png(path);
    if (is_tiff(path)) return read_tiff(path);
    throw RasterError("unsupported image format: " + path.string());
}

void write_png(const std::filesystem::path& path, const Raster& raster) {
    check_writable(raster);
    FilePtr file(std::fopen(path.c_str(), "wb"));
    if (!file) throw RasterError("cannot write " + path.string());

    std::string message;
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, &message, png_error_handler, png_warning_handler);
    if (!png) throw RasterError("libpng initialisation failed");
    png_infop info = png_create_info_struct(png);
    std::vector<png_byte> row;

    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        throw RasterError("cannot encode " + path.string() + ": " + message);
    }
    png_init_io(png, file.get());
    png_set_compression_level(png, 6);
    png_set_IHDR(png, info, static_cast<png_uint_32>(raster.cols), static_cast<png_uint_32>(raster.rows),
                 raster.bit_depth, raster.channels == 1 ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB,
                 PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);

    const std::size_t per_row = static_cast<std::size_t>(raster.cols) * raster.channels;
    row.resize(per_row * (raster.bit_depth / 8));
    for (int r = 0; r < raster.rows; ++r) {
        const std::uint16_t* src = raster.samples.data() + per_row * r;
        if (raster.bit_depth == 16) {
            for (std::size_t i = 0; i < per_row; ++i) {
                row[2 * i] = static_cast<png_byte>(src[i] >> 8);
                row[2 * i + 1] = static_cast<png_byte>(src[i] & 0xff);
            }
        } else {
            for (std::size_t i = 0; i < per_row; ++i) row[i] = static_cast<png_byte>(src[i]);
        }
        png_write_row(png, row.data());
    }
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
}

void write_tiff(const std::filesystem::path& path, const Raster& raster) {
    check_writable(raster);
    install_tiff_handlers();
    TiffPtr tif(TIFFOpen(path.c_str(), "w"));
    if (!tif) throw RasterError("cannot write " + path.string());
    TIFFSetField(tif.get(), TIFFTAG_IMAGEWIDTH, static_cast<std::uint32_t>(raster.cols));
    TIFFSetField(tif.get(), TIFFTAG_IMAGELENGTH, static_cast<std::uint32_t>(raster.rows));
    TIFFSetField(tif.get(), TIFFTAG_BITSPERSAMPLE, static_cast<std::uint16_t>(raster.bit_depth));
    TIFFSetField(tif.get(), TIFFTAG_SAMPLESPERPIXEL, static_cast<std::uint16_t>(raster.channels));
    TIFFSetField(tif.get(), TIFFTAG_PHOTOMETRIC, raster.channels == 1 ? PHOTOMETRIC_MINISBLACK : PHOTOMETRIC_RGB);
    TIFFSetField(tif.get(), TIFFTAG_PLANARCONFIG, PLANARCONFIG_CONTIG);
    TIFFSetField(tif.get(), TIFFTAG_COMPRESSION, COMPRESSION_NONE);
    TIFFSetField(tif.get(), TIFFTAG_ROWSPERSTRIP, static_cast<std::uint32_t>(1));

    const std::size_t per_row = static_cast<std::size_t>(raster.cols) * raster.channels;
    std::vector<unsigned char> line(per_row * (raster.bit_depth / 8));
    for (int r = 0; r < raster.rows; ++r) {
        const std::uint16_t* src = raster.samples.data() + per_row * r;
        if (raster.bit_depth == 16) {
            std::memcpy(line.data(), src, per_row * 2);
        } else {
            for (std::size_t i = 0; i < per_row; ++i) line[i] = static_cast<unsigned char>(src[i]);
        }
        if (TIFFWriteScanline(tif.get(), line.data(), static_cast<std::uint32_t>(r), 0) < 0)
            throw RasterError("cannot encode " + path.string());
    }
}

}  // namespace innie
