#include "tunnelpilot/depth_image.hpp"

#include <algorithm>
#include <cstdint>
#include <fstream>

namespace tunnelpilot {

DepthImage DepthImage::uniform(int w, int h, float value, double max_range) {
    DepthImage img;
    img.width = w;
    img.height = h;
    img.depth.assign(static_cast<std::size_t>(w) * h, value);
    img.cx = w / 2.0;
    img.cy = h / 2.0;
    img.fx = w / 2.0;
    img.fy = h / 2.0;
    img.max_range = max_range;
    return img;
}

DepthImage DepthImage::downsampled(int max_w, int max_h) const {
    const int stride = std::max({1, (width + max_w - 1) / max_w, (height + max_h - 1) / max_h});
    if (stride == 1) {
        return *this;
    }
    DepthImage out;
    out.width = width / stride;
    out.height = height / stride;
    out.depth.resize(static_cast<std::size_t>(out.width) * out.height);
    for (int y = 0; y < out.height; ++y) {
        for (int x = 0; x < out.width; ++x) {
            out.at(x, y) = at(x * stride, y * stride);
        }
    }
    out.fx = fx / stride;
    out.fy = fy / stride;
    out.cx = cx / stride;
    out.cy = cy / stride;
    out.max_range = max_range;
    return out;
}

void write_pgm(const std::string& path, const std::vector<std::uint8_t>& gray,
               int width, int height) {
    std::ofstream out(path, std::ios::binary);
    out << "P5\n" << width << " " << height << "\n255\n";
    out.write(reinterpret_cast<const char*>(gray.data()),
              static_cast<std::streamsize>(gray.size()));
}

}  // namespace tunnelpilot
