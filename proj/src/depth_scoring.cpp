// SPDX-License-Identifier: Apache-2.0

#include "graspkp/depth_scoring.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace graspkp {

namespace {

Pixel center_pixel(const Grasp& g, const Grid2D& grid) {
    const Pixel p{static_cast<int>(std::floor(g.y)), static_cast<int>(std::floor(g.x))};
    if (!grid.contains(p.row, p.col)) {
        throw DegenerateRegionError("grasp center lies outside the depth image");
    }
    return p;
}

double heaviside(double v) { return v > 0.0 ? 1.0 : 0.0; }

}  // namespace

void DepthImage::validate() const {
    if (!depth.same_shape(surface) || depth.empty()) {
        throw std::invalid_argument("depth and surface maps must share a non-empty shape");
    }
    auto positive = [](float v) { return v > 0.0f && std::isfinite(v); };
    if (!std::all_of(depth.data().begin(), depth.data().end(), positive) ||
        !std::all_of(surface.data().begin(), surface.data().end(), positive)) {
        throw std::invalid_argument("depths must be positive and finite");
    }
}

GripperRegions gripper_regions(const Grasp& g, const GripperModel2D& model, int height, int width) {
    if (g.w / model.pixelsPerMm > model.maxOpen) {
        throw GripperCapacityError("grasp width " + std::to_string(g.w / model.pixelsPerMm) +
                                   " mm exceeds gripper opening of " + std::to_string(model.maxOpen) + " mm");
    }
    const double halfOpen = 0.5 * g.w;
    const double outer = halfOpen + model.fingerThickness * model.pixelsPerMm;
    const double halfLen = 0.5 * model.fingerLength * model.pixelsPerMm;
    const Vec2 axis{std::cos(g.theta), std::sin(g.theta)};
    const Vec2 perp{-axis.y, axis.x};

    const double reach = std::hypot(outer, halfLen);
    const int r0 = std::max(0, static_cast<int>(std::floor(g.y - reach)));
    const int r1 = std::min(height - 1, static_cast<int>(std::ceil(g.y + reach)));
    const int c0 = std::max(0, static_cast<int>(std::floor(g.x - reach)));
    const int c1 = std::min(width - 1, static_cast<int>(std::ceil(g.x + reach)));

    GripperRegions out;
    for (int row = r0; row <= r1; ++row) {
        for (int col = c0; col <= c1; ++col) {
            const Vec2 d{col + 0.5 - g.x, row + 0.5 - g.y};
            const double u = std::abs(dot(d, axis));
            const double v = std::abs(dot(d, perp));
            if (v >= halfLen || u >= outer) continue;
            (u < halfOpen ? out.interior : out.fingers).push_back({row, col});
        }
    }
    return out;
}

double collision_score(const Grasp& g, const DepthImage& image, const GripperModel2D& model) {
    const auto regions = gripper_regions(g, model, image.depth.height(), image.depth.width());
    if (regions.fingers.empty()) throw DegenerateRegionError("finger region is empty after clipping");
    const Pixel c = center_pixel(g, image.depth);
    const double dc = image.depth.at(c.row, c.col);
    double hits = 0.0;
    for (const Pixel& p : regions.fingers) hits += heaviside(image.depth.at(p.row, p.col) - dc);
    return hits / static_cast<double>(regions.fingers.size());
}

double occupancy_score(const Grasp& g, const DepthImage& image, const GripperModel2D& model) {
    const auto regions = gripper_regions(g, model, image.depth.height(), image.depth.width());
    if (regions.interior.empty()) throw DegenerateRegionError("interior region is empty after clipping");
    const Pixel c = center_pixel(g, image.depth);
    const double ds = image.surface.at(c.row, c.col);
    double hits = 0.0;
    for (const Pixel& p : regions.interior) hits += heaviside(ds - image.depth.at(p.row, p.col));
    return hits / static_cast<double>(regions.interior.size());
}

double height_score(const Grasp& g, const DepthImage& image) {
    const Pixel c = center_pixel(g, image.depth);
    const double d = image.depth.at(c.row, c.col);
    const double ds = image.surface.at(c.row, c.col);
    return std::clamp(std::abs(d - ds) / std::abs(ds), 0.0, 1.0);
}

GraspScore score_grasp(const Grasp& g, const DepthImage& image, const GripperModel2D& model) {
    GraspScore s;
    s.collision = collision_score(g, image, model);
    s.occupancy = occupancy_score(g, image, model);
    s.height = height_score(g, image);
    s.total = s.collision + s.occupancy + s.height;
    return s;
}

std::vector<ScoredGrasp> score_grasps(std::span<const Grasp> grasps, const DepthImage& image,
                                      const GripperModel2D& model) {
    std::vector<ScoredGrasp> out;
    out.reserve(grasps.size());
    for (std::size_t i = 0; i < grasps.size(); ++i) {
        ScoredGrasp s{grasps[i], {}, i, false};
        try {
            s.score = score_grasp(grasps[i], image, model);
        } catch (const DegenerateRegionError&) {
            s.degenerate = true;
            s.score = {0.0, 0.0, 0.0, -1.0};
        } catch (const GripperCapacityError&) {
            s.degenerate = true;
            s.score = {0.0, 0.0, 0.0, -1.0};
        }
        out.push_back(s);
    }
    std::stable_sort(out.begin(), out.end(),
                     [](const ScoredGrasp& a, const ScoredGrasp& b) { return a.score.total > b.score.total; });
    return out;
}

Grasp select_dynamic(const Grasp& previous, std::span<const Grasp> candidates, double tauClose) {
    const std::size_t n = std::min(candidates.size(), kDynamicCandidates);
    const Grasp* best = nullptr;
    double bestDist = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) {
        const double d = norm(candidates[i].center() - previous.center());
        if (d < bestDist) {
            bestDist = d;
            best = &candidates[i];
        }
    }
    return best != nullptr && bestDist < tauClose ? *best : previous;
}

}  // namespace graspkp
