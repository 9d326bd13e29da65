// SPDX-License-Identifier: Apache-2.0

#include "graspkp/dataset_tools.hpp"

#include <algorithm>
#include <cmath>

namespace graspkp {

const char* to_string(CoverageVerdict v) {
    switch (v) {
        case CoverageVerdict::keep: return "keep";
        case CoverageVerdict::remove: return "remove";
        case CoverageVerdict::review: return "review";
    }
    return "unknown";
}

double coverage_ratio(std::span<const Grasp> grasps, const Grid2D& mask, double defaultHeight) {
    std::vector<OrientedRect> rects;
    rects.reserve(grasps.size());
    for (const auto& g : grasps) rects.push_back(to_rect(g, defaultHeight));

    std::size_t maskCount = 0;
    std::size_t covered = 0;
    for (int row = 0; row < mask.height(); ++row) {
        for (int col = 0; col < mask.width(); ++col) {
            if (!(mask.at(row, col) > 0.5f)) continue;
            ++maskCount;
            const Vec2 p{col + 0.5, row + 0.5};
            if (std::any_of(rects.begin(), rects.end(), [&](const OrientedRect& r) { return contains(r, p); })) {
                ++covered;
            }
        }
    }
    if (maskCount == 0) throw DegenerateMaskError("object mask is empty");
    return static_cast<double>(covered) / static_cast<double>(maskCount);
}

CoverageDecision classify_annotation(double ratio) {
    if (std::isnan(ratio)) throw std::invalid_argument("coverage ratio is NaN");
    CoverageDecision d{ratio, CoverageVerdict::review};
    if (ratio > 0.8) {
        d.verdict = CoverageVerdict::keep;
    } else if (ratio < 0.2) {
        d.verdict = CoverageVerdict::remove;
    }
    return d;
}

ChannelStats ChannelStats::cornell() { return {{0.85, 0.81, 0.25}, {0.10, 0.11, 0.09}}; }
ChannelStats ChannelStats::ajd() { return {{0.71, 0.71, 0.20}, {0.06, 0.07, 0.09}}; }

std::array<Grid2D, 3> compose_rgd(std::span<const Grid2D> rgb, const Grid2D& depth, const ChannelStats& stats) {
    if (rgb.size() != 3) throw std::invalid_argument("compose_rgd expects three colour planes");
    for (const auto& p : rgb) {
        if (!p.same_shape(depth)) throw std::invalid_argument("compose_rgd: plane shapes differ");
    }
    const Grid2D* sources[3] = {&rgb[0], &rgb[1], &depth};  // blue is replaced by depth
    std::array<Grid2D, 3> out;
    for (std::size_t c = 0; c < 3; ++c) {
        out[c] = Grid2D(depth.height(), depth.width());
        const auto& in = sources[c]->data();
        auto& dst = out[c].data();
        for (std::size_t i = 0; i < in.size(); ++i) {
            dst[i] = static_cast<float>((in[i] / 255.0 - stats.means[c]) / stats.stds[c]);
        }
    }
    return out;
}

std::array<Grid2D, 3> undo_whitening(std::span<const Grid2D> whitened, const ChannelStats& stats) {
    if (whitened.size() != 3) throw std::invalid_argument("undo_whitening expects three planes");
    std::array<Grid2D, 3> out;
    for (std::size_t c = 0; c < 3; ++c) {
        out[c] = whitened[c];
        for (float& v : out[c].data()) v = static_cast<float>(v * stats.stds[c] + stats.means[c]);
    }
    return out;
}

}  // namespace graspkp
