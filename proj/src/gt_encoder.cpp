// SPDX-License-Identifier: Apache-2.0

#include "graspkp/gt_encoder.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <set>
#include <tuple>

#include "graspkp/annotations.hpp"

namespace graspkp {

namespace {

// Largest float below 1; offsets must stay in [0, 1) after narrowing.
constexpr float kBelowOne = 0.99999994f;

float narrow_offset(double v) {
    return std::min(static_cast<float>(v), kBelowOne);
}

void splat_gaussian(Grid2D& plane, Pixel peak, double sigma, double truncateSigmas) {
    const double reach = truncateSigmas * sigma;
    const int r = static_cast<int>(std::floor(reach));
    const double inv = 1.0 / (2.0 * sigma * sigma);
    for (int dy = -r; dy <= r; ++dy) {
        for (int dx = -r; dx <= r; ++dx) {
            const double d2 = static_cast<double>(dx * dx + dy * dy);
            if (d2 > reach * reach) continue;
            const int row = peak.row + dy;
            const int col = peak.col + dx;
            if (!plane.contains(row, col)) continue;
            const float v = static_cast<float>(std::exp(-d2 * inv));
            float& cell = plane.at(row, col);
            cell = std::max(cell, v);
        }
    }
}

bool inside_image(Vec2 p, const EncoderConfig& c) {
    return p.x >= 0.0 && p.y >= 0.0 && p.x < c.imageWidth && p.y < c.imageHeight;
}

}  // namespace

double EncoderConfig::sigma_for(double graspWidth) const {
    return std::max(minSigma, graspWidth / (sigmaDivisor * downsampleRatio));
}

Pixel quantize(Vec2 p, int ratio) {
    return {static_cast<int>(std::floor(p.y / ratio)), static_cast<int>(std::floor(p.x / ratio))};
}

EncodedTargets encode_targets(const std::vector<Grasp>& annotations, const EncoderConfig& config) {
    if (config.imageHeight <= 0 || config.imageWidth <= 0 || config.downsampleRatio <= 0) {
        throw std::invalid_argument("encoder config needs positive image size and ratio");
    }
    const OrientationClasses classes(config.numClasses);
    EncodedTargets out{HeatmapBundle::zeros(config.numClasses, config.heatmap_height(),
                                            config.heatmap_width(), config.downsampleRatio),
                       {}};
    auto& t = out.targets;
    const int R = config.downsampleRatio;

    using CellKey = std::tuple<int, int, int>;  // class, row, col
    std::set<CellKey> claimedLeft;
    std::set<CellKey> claimedRight;
    Grid2D offsetWrittenL(t.height(), t.width());
    Grid2D offsetWrittenR(t.height(), t.width());

    for (std::size_t id = 0; id < annotations.size(); ++id) {
        const Grasp& g = annotations[id];
        KeypointPair pair = [&] {
            try {
                return grasp_to_pair(g);
            } catch (const GeometryError& e) {
                throw AnnotationError("grasp " + std::to_string(id) + ": " + e.what());
            }
        }();
        const Vec2 l = pair.left();
        const Vec2 r = pair.right();
        if (!inside_image(l, config) || !inside_image(r, config)) {
            throw AnnotationError("grasp " + std::to_string(id) + ": keypoint outside the " +
                                  std::to_string(config.imageWidth) + "x" +
                                  std::to_string(config.imageHeight) + " image");
        }

        KeypointTarget kp;
        kp.graspId = id;
        kp.leftPoint = l;
        kp.rightPoint = r;
        kp.leftPixel = quantize(l, R);
        kp.rightPixel = quantize(r, R);
        kp.centerPixel = quantize(g.center(), R);
        kp.classIndex = classes.angle_to_class(g.theta);
        kp.leftOffset = ground_truth_offset(l.x, l.y, R);
        kp.rightOffset = ground_truth_offset(r.x, r.y, R);

        const CellKey lk{kp.classIndex, kp.leftPixel.row, kp.leftPixel.col};
        const CellKey rk{kp.classIndex, kp.rightPixel.row, kp.rightPixel.col};
        if (claimedLeft.contains(lk) || claimedRight.contains(rk)) {
            continue;  // first grasp on a cell wins
        }
        claimedLeft.insert(lk);
        claimedRight.insert(rk);

        const double sigma = config.sigma_for(g.w);
        const auto c = static_cast<std::size_t>(kp.classIndex);
        splat_gaussian(t.left[c], kp.leftPixel, sigma, config.truncateSigmas);
        splat_gaussian(t.right[c], kp.rightPixel, sigma, config.truncateSigmas);
        splat_gaussian(t.center, kp.centerPixel, sigma, config.truncateSigmas);

        // Offset planes are shared across classes; the first writer keeps a cell.
        auto write_offset = [](std::vector<Grid2D>& planes, Grid2D& written, Pixel p, Offset2 o) {
            if (written.at(p.row, p.col) != 0.0f) return;
            written.at(p.row, p.col) = 1.0f;
            planes[0].at(p.row, p.col) = narrow_offset(o.x);
            planes[1].at(p.row, p.col) = narrow_offset(o.y);
        };
        write_offset(t.offsetL, offsetWrittenL, kp.leftPixel, kp.leftOffset);
        write_offset(t.offsetR, offsetWrittenR, kp.rightPixel, kp.rightOffset);

        out.keypoints.push_back(kp);
    }
    return out;
}

EncodedTargets ideal_targets(const std::vector<Grasp>& annotations, const EncoderConfig& config,
                             std::uint64_t seed) {
    if (annotations.size() > kMaxIdealGrasps) {
        throw CapacityError("ideal bundle holds at most " + std::to_string(kMaxIdealGrasps) +
                            " grasps, got " + std::to_string(annotations.size()));
    }
    EncodedTargets enc = encode_targets(annotations, config);

    std::mt19937_64 rng(seed);
    std::vector<int> slots(enc.keypoints.size());
    std::iota(slots.begin(), slots.end(), 0);
    std::shuffle(slots.begin(), slots.end(), rng);
    const double base = std::uniform_real_distribution<double>(-2.0, 2.0)(rng);
    constexpr double kEmbeddingGap = 1.5;

    for (std::size_t i = 0; i < enc.keypoints.size(); ++i) {
        const auto& kp = enc.keypoints[i];
        const auto e = static_cast<float>(base + kEmbeddingGap * slots[i]);
        enc.targets.embedL.at(kp.leftPixel.row, kp.leftPixel.col) = e;
        enc.targets.embedR.at(kp.rightPixel.row, kp.rightPixel.col) = e;
    }
    return enc;
}

HeatmapBundle ideal_bundle(const std::vector<Grasp>& annotations, const EncoderConfig& config,
                           std::uint64_t seed) {
    return ideal_targets(annotations, config, seed).targets;
}

}  // namespace graspkp
