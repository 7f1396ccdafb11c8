#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace prominence {

// Row-major 8-bit raster, 1 (gray) or 3 (RGB) channels.
struct RasterImage {
    int width = 0;
    int height = 0;
    int channels = 1;
    std::vector<std::uint8_t> data;

    static RasterImage make(int width, int height, int channels,
                            std::uint8_t fill = 0);

    std::uint8_t at(int x, int y, int c = 0) const {
        return data[static_cast<std::size_t>(y * width + x) * channels + c];
    }
    std::uint8_t& at(int x, int y, int c = 0) {
        return data[static_cast<std::size_t>(y * width + x) * channels + c];
    }
    std::size_t pixel_count() const {
        return static_cast<std::size_t>(width) * height;
    }

    // Throws std::invalid_argument when the invariants are violated.
    void validate() const;
};

// Per-pixel depth in relative units; larger = farther from the camera.
struct DepthMap {
    int width = 0;
    int height = 0;
    std::vector<float> data;
    std::optional<double> source_scale;

    float at(int x, int y) const {
        return data[static_cast<std::size_t>(y) * width + x];
    }
    void validate() const;
};

// Loads PNG, PGM/PPM (P2/P3/P5/P6) or uncompressed BMP; 16-bit samples are
// rescaled to 0..255.
RasterImage load_image(const std::string& path);

// Writes PNG or PNM depending on the file extension (.png/.pgm/.ppm).
void save_image(const RasterImage& img, const std::string& path);

// Rec.601 luma with round-half-up; 1-channel input is returned unchanged.
RasterImage to_grayscale(const RasterImage& img);

// Reads a grayscale PNG or PGM at native precision. Errors when dimensions
// differ from the expected ones or the file is not single-channel.
DepthMap load_depth_map(const std::string& path, int expected_width,
                        int expected_height);

// 16-bit grayscale PNG writer (used for depth fixtures and tests).
void save_png16(const std::vector<std::uint16_t>& data, int width, int height,
                const std::string& path);

}  // namespace prominence
