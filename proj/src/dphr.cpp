#include "tunnelpilot/dphr.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace tunnelpilot {

namespace {

// Separable running max/min with the window clamped at the borders.
template <typename Compare>
DepthImage filter2d(const DepthImage& img, int kernel, Compare better) {
    const int r = kernel / 2;
    DepthImage tmp = img;
    // Horizontal pass.
    for (int y = 0; y < img.height; ++y) {
        for (int x = 0; x < img.width; ++x) {
            float best = img.at(x, y);
            const int x0 = std::max(0, x - r), x1 = std::min(img.width - 1, x + r);
            for (int xi = x0; xi <= x1; ++xi) {
                const float v = img.at(xi, y);
                if (better(v, best)) best = v;
            }
            tmp.at(x, y) = best;
        }
    }
    DepthImage out = tmp;
    // Vertical pass.
    for (int y = 0; y < img.height; ++y) {
        const int y0 = std::max(0, y - r), y1 = std::min(img.height - 1, y + r);
        for (int x = 0; x < img.width; ++x) {
            float best = tmp.at(x, y);
            for (int yi = y0; yi <= y1; ++yi) {
                const float v = tmp.at(x, yi);
                if (better(v, best)) best = v;
            }
            out.at(x, y) = best;
        }
    }
    return out;
}

}  // namespace

DepthImage morphological_close(const DepthImage& img, int kernel) {
    if (kernel <= 1) {
        return img;
    }
    const DepthImage dilated = filter2d(img, kernel, [](float a, float b) { return a > b; });
    return filter2d(dilated, kernel, [](float a, float b) { return a < b; });
}

DeepestCluster deepest_cluster_centroid(const DepthImage& img, int n_clusters,
                                        int iters, double min_contrast) {
    DeepestCluster out;
    const std::size_t n = img.depth.size();
    if (n == 0 || n_clusters < 2) {
        return out;
    }

    const auto [min_it, max_it] = std::minmax_element(img.depth.begin(), img.depth.end());
    if (static_cast<double>(*max_it - *min_it) < min_contrast) {
        return out;  // no preferred direction in a flat frame
    }

    // Deterministic depth-quantile seeding.
    std::vector<float> sorted(img.depth);
    std::sort(sorted.begin(), sorted.end());
    std::vector<double> centers(n_clusters);
    for (int i = 0; i < n_clusters; ++i) {
        const std::size_t idx = std::min(
            n - 1, static_cast<std::size_t>((i + 0.5) * static_cast<double>(n) / n_clusters));
        centers[i] = sorted[idx];
    }

    std::vector<int> assignment(n, 0);
    std::vector<double> sums(n_clusters);
    std::vector<std::size_t> counts(n_clusters);
    for (int it = 0; it < iters; ++it) {
        bool changed = false;
        std::fill(sums.begin(), sums.end(), 0.0);
        std::fill(counts.begin(), counts.end(), 0u);
        for (std::size_t i = 0; i < n; ++i) {
            const double d = img.depth[i];
            int best = 0;
            double best_dist = std::abs(d - centers[0]);
            for (int c = 1; c < n_clusters; ++c) {
                const double dist = std::abs(d - centers[c]);
                if (dist < best_dist) {
                    best_dist = dist;
                    best = c;
                }
            }
            if (assignment[i] != best) {
                assignment[i] = best;
                changed = true;
            }
            sums[best] += d;
            counts[best] += 1;
        }
        for (int c = 0; c < n_clusters; ++c) {
            if (counts[c] > 0) {
                centers[c] = sums[c] / static_cast<double>(counts[c]);
            }
        }
        if (!changed && it > 0) {
            break;
        }
    }

    int deepest = -1;
    double deepest_mean = -1.0;
    for (int c = 0; c < n_clusters; ++c) {
        if (counts[c] == 0) {
            continue;
        }
        const double mean = sums[c] / static_cast<double>(counts[c]);
        out.cluster_means.push_back(mean);
        if (mean > deepest_mean) {
            deepest_mean = mean;
            deepest = c;
        }
    }
    if (deepest < 0) {
        return out;
    }

    double sx = 0.0, sy = 0.0;
    std::size_t members = 0;
    out.mask.assign(n, 0);
    for (std::size_t i = 0; i < n; ++i) {
        if (assignment[i] == deepest) {
            const int x = static_cast<int>(i) % img.width;
            const int y = static_cast<int>(i) / img.width;
            sx += x + 0.5;
            sy += y + 0.5;
            out.mask[i] = 1;
            ++members;
        }
    }
    out.centroid_x = sx / static_cast<double>(members);
    out.centroid_y = sy / static_cast<double>(members);
    out.mean_depth = deepest_mean;
    out.valid = true;
    return out;
}

HeadingCommand heading_command(double s_x, const DepthImage& img, double gain,
                               double max_rate) {
    HeadingCommand cmd;
    cmd.centroid_x_norm = std::clamp((s_x - img.cx) / img.cx, -1.0, 1.0);
    cmd.yaw_rate_ref = std::clamp(-cmd.centroid_x_norm * gain, -max_rate, max_rate);
    cmd.valid = true;
    return cmd;
}

HeadingCommand Dphr::process(const DepthImage& img) {
    const DepthImage small = img.downsampled(params_.max_width, params_.max_height);
    const DepthImage closed = morphological_close(small, params_.close_kernel);
    const DeepestCluster cluster = deepest_cluster_centroid(
        closed, params_.n_clusters, params_.kmeans_iters, params_.min_depth_contrast);

    ++frame_index_;
    if (!cluster.valid) {
        last_.yaw_rate_ref *= params_.invalid_decay;
        last_.valid = false;
        return last_;
    }

    last_ = heading_command(cluster.centroid_x, closed, params_.yaw_gain,
                            params_.max_yaw_rate);

    if (!dump_dir_.empty()) {
        std::vector<std::uint8_t> gray(cluster.mask.size());
        for (std::size_t i = 0; i < gray.size(); ++i) {
            gray[i] = cluster.mask[i] ? 255 : 0;
        }
        const int cx_px = std::clamp(static_cast<int>(cluster.centroid_x), 0, closed.width - 1);
        const int cy_px = std::clamp(static_cast<int>(cluster.centroid_y), 0, closed.height - 1);
        for (int d = -2; d <= 2; ++d) {
            if (cx_px + d >= 0 && cx_px + d < closed.width) {
                gray[static_cast<std::size_t>(cy_px) * closed.width + cx_px + d] = 128;
            }
            if (cy_px + d >= 0 && cy_px + d < closed.height) {
                gray[static_cast<std::size_t>(cy_px + d) * closed.width + cx_px] = 128;
            }
        }
        char name[64];
        std::snprintf(name, sizeof(name), "/dphr_%06ld.pgm", frame_index_);
        write_pgm(dump_dir_ + name, gray, closed.width, closed.height);
    }
    return last_;
}

}  // namespace tunnelpilot
