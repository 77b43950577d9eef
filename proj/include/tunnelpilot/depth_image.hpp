/**
 * @file depth_image.hpp
 * @brief Rectangular depth raster in the camera frame. Values are ray ranges
 *        in meters; invalid or beyond-range returns are stored as max_range.
 */

#pragma once

#include <string>
#include <vector>

namespace tunnelpilot {

struct DepthImage {
    int width{0};
    int height{0};
    std::vector<float> depth;  // row-major, meters
    double fx{0.0}, fy{0.0};
    double cx{0.0}, cy{0.0};
    double max_range{6.0};

    static DepthImage uniform(int w, int h, float value, double max_range = 6.0);

    float at(int x, int y) const { return depth[static_cast<std::size_t>(y) * width + x]; }
    float& at(int x, int y) { return depth[static_cast<std::size_t>(y) * width + x]; }
    bool in_bounds(int x, int y) const { return x >= 0 && x < width && y >= 0 && y < height; }

    /// Integer-stride decimation down to at most (max_w, max_h).
    DepthImage downsampled(int max_w, int max_h) const;
};

/// Write an 8-bit PGM visualization (for debug dumps).
void write_pgm(const std::string& path, const std::vector<std::uint8_t>& gray,
               int width, int height);

}  // namespace tunnelpilot
