// SPDX-License-Identifier: Apache-2.0

#include "graspkp/decoder.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace graspkp {

namespace {

struct Cell {
    float score;
    int classIndex;
    int row;
    int col;
};

bool ranks_before(const Cell& a, const Cell& b) {
    if (a.score != b.score) return a.score > b.score;
    if (a.classIndex != b.classIndex) return a.classIndex < b.classIndex;
    if (a.row != b.row) return a.row < b.row;
    return a.col < b.col;
}

bool is_local_max(const Grid2D& plane, int row, int col) {
    const float v = plane.at(row, col);
    for (int dr = -1; dr <= 1; ++dr) {
        for (int dc = -1; dc <= 1; ++dc) {
            const int r = row + dr;
            const int c = col + dc;
            if ((dr != 0 || dc != 0) && plane.contains(r, c) && plane.at(r, c) > v) return false;
        }
    }
    return true;
}

double clamp_below(double v, double limit) {
    return std::clamp(v, 0.0, std::nextafter(limit, 0.0));
}

}  // namespace

std::vector<DetectedKeypoint> select_grasp_keypoints(std::span<const Grid2D> heatmaps, const Grid2D& embedding,
                                                     std::span<const Grid2D> offsets, int ratio,
                                                     KeypointRole role, const DecoderOptions& options) {
    if (options.k < 1) throw std::invalid_argument("k must be at least 1");
    if (offsets.size() != 2) throw std::invalid_argument("offset map needs exactly 2 planes");
    if (heatmaps.empty()) return {};

    std::vector<Cell> cells;
    for (std::size_t c = 0; c < heatmaps.size(); ++c) {
        const Grid2D& plane = heatmaps[c];
        for (int row = 0; row < plane.height(); ++row) {
            for (int col = 0; col < plane.width(); ++col) {
                const float v = plane.at(row, col);
                if (!(v > 0.0f)) continue;
                if (options.peakSuppression && !is_local_max(plane, row, col)) continue;
                cells.push_back({v, static_cast<int>(c), row, col});
            }
        }
    }

    const auto keep = std::min(cells.size(), static_cast<std::size_t>(options.k));
    std::partial_sort(cells.begin(), cells.begin() + static_cast<std::ptrdiff_t>(keep), cells.end(), ranks_before);
    cells.resize(keep);

    const double maxX = static_cast<double>(embedding.width()) * ratio;
    const double maxY = static_cast<double>(embedding.height()) * ratio;
    std::vector<DetectedKeypoint> out;
    out.reserve(keep);
    for (const Cell& cell : cells) {
        DetectedKeypoint kp;
        kp.row = cell.row;
        kp.col = cell.col;
        kp.classIndex = cell.classIndex;
        kp.score = cell.score;
        kp.embedding = embedding.at(cell.row, cell.col);
        kp.x = clamp_below((cell.col + static_cast<double>(offsets[0].at(cell.row, cell.col))) * ratio, maxX);
        kp.y = clamp_below((cell.row + static_cast<double>(offsets[1].at(cell.row, cell.col))) * ratio, maxY);
        kp.role = role;
        out.push_back(kp);
    }
    return out;
}

DecodedKeypoints decode_bundle(const HeatmapBundle& bundle, const DecoderOptions& options) {
    return {
        select_grasp_keypoints(bundle.left, bundle.embedL, bundle.offsetL, bundle.downsampleRatio,
                               KeypointRole::left, options),
        select_grasp_keypoints(bundle.right, bundle.embedR, bundle.offsetR, bundle.downsampleRatio,
                               KeypointRole::right, options),
    };
}

}  // namespace graspkp
