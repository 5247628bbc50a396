#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "tileforge/attractor.hpp"

namespace tileforge {

struct Image {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> rgb; // row-major, top row first

    std::array<std::uint8_t, 3> pixel(int x, int y) const;
};

/// Binary PPM (P6). Throws Error(invalid_input) when the file cannot be written.
void write_ppm(const Image& image, const std::string& path);
std::string encode_ppm(const Image& image);

/// Deterministic colour of translate i: twelve fixed colours, then golden-angle hues.
std::array<std::uint8_t, 3> palette(std::size_t i);

struct RenderOptions {
    int resolution = 64;
    std::vector<IntVec> translates; // empty: just G in black
    int strip_height = 24;          // pixel rows for 1-D sets
};

/// Pixels are raster cells of size 1/resolution; y grows upwards. Covered
/// cells use the raster occupancy threshold.
Image render(const AttractorApprox& approx, const RenderOptions& options);

/// Number of non-background pixels.
std::size_t covered_pixels(const Image& image);

} // namespace tileforge
