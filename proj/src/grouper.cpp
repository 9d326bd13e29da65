// SPDX-License-Identifier: Apache-2.0

#include "graspkp/grouper.hpp"

#include <algorithm>
#include <cmath>
#include <tuple>

namespace graspkp {

namespace {

Vec2 position(const DetectedKeypoint& kp) { return {kp.x, kp.y}; }

bool passes_pair_filters(const DetectedKeypoint& l, const DetectedKeypoint& r, double centerScore,
                         const GroupingThresholds& t) {
    return l.classIndex == r.classIndex && std::abs(l.embedding - r.embedding) < t.rhoEmbed &&
           centerScore > t.rhoCen && canonical_before(position(l), position(r));
}

GraspCandidate make_candidate(const DetectedKeypoint& l, const DetectedKeypoint& r, double centerScore,
                              const OrientationClasses& classes) {
    GraspCandidate c;
    c.leftKp = l;
    c.rightKp = r;
    c.classIndex = l.classIndex;
    c.centerScore = centerScore;
    c.thetaDiscrete = classes.class_to_angle(l.classIndex);
    c.thetaContinuous = fold_angle(std::atan2(r.y - l.y, r.x - l.x));
    return c;
}

bool ranks_before(const GraspCandidate& a, const GraspCandidate& b) {
    if (a.centerScore != b.centerScore) return a.centerScore > b.centerScore;
    const double ma = a.leftKp.score + a.rightKp.score;
    const double mb = b.leftKp.score + b.rightKp.score;
    if (ma != mb) return ma > mb;
    return std::tie(a.leftKp.x, a.leftKp.y, a.rightKp.x, a.rightKp.y, a.classIndex) <
           std::tie(b.leftKp.x, b.leftKp.y, b.rightKp.x, b.rightKp.y, b.classIndex);
}

}  // namespace

double center_score(Vec2 a, Vec2 b, const Grid2D& centerMap, int ratio) {
    const double mx = 0.5 * (a.x + b.x) / ratio;
    const double my = 0.5 * (a.y + b.y) / ratio;
    const int col = std::clamp(static_cast<int>(std::floor(mx)), 0, centerMap.width() - 1);
    const int row = std::clamp(static_cast<int>(std::floor(my)), 0, centerMap.height() - 1);
    return centerMap.at(row, col);
}

std::vector<ScoredPair> extract_center_scores(std::span<const DetectedKeypoint> left,
                                              std::span<const DetectedKeypoint> right,
                                              const Grid2D& centerMap, int ratio) {
    std::vector<ScoredPair> out;
    out.reserve(left.size() * right.size());
    for (const auto& l : left) {
        for (const auto& r : right) {
            out.push_back({l, r, center_score(position(l), position(r), centerMap, ratio)});
        }
    }
    return out;
}

std::vector<GraspCandidate> filter_pairs(std::span<const ScoredPair> pairs, const GroupingThresholds& thresholds,
                                         const OrientationClasses& classes) {
    std::vector<GraspCandidate> out;
    for (const auto& p : pairs) {
        if (passes_pair_filters(p.left, p.right, p.centerScore, thresholds)) {
            out.push_back(make_candidate(p.left, p.right, p.centerScore, classes));
        }
    }
    return out;
}

std::vector<GraspCandidate> orientation_filter(std::vector<GraspCandidate> candidates, double tauOrient) {
    std::erase_if(candidates, [tauOrient](const GraspCandidate& c) {
        return angle_distance(c.thetaDiscrete, c.thetaContinuous) > tauOrient;
    });
    return candidates;
}

std::vector<GroupedGrasp> group(const HeatmapBundle& bundle, const GroupingThresholds& thresholds,
                                const DecoderOptions& decoder) {
    const DecodedKeypoints kps = decode_bundle(bundle, decoder);
    const OrientationClasses classes(bundle.numClasses);

    // Pairs are scored one left keypoint at a time; only survivors are kept.
    std::vector<GraspCandidate> candidates;
    for (const auto& l : kps.left) {
        for (const auto& r : kps.right) {
            if (l.classIndex != r.classIndex) continue;
            const double s = center_score(position(l), position(r), bundle.center, bundle.downsampleRatio);
            if (passes_pair_filters(l, r, s, thresholds)) {
                candidates.push_back(make_candidate(l, r, s, classes));
            }
        }
    }
    candidates = orientation_filter(std::move(candidates), thresholds.tauOrient);
    std::sort(candidates.begin(), candidates.end(), ranks_before);
    if (thresholds.maxOutput >= 0 && candidates.size() > static_cast<std::size_t>(thresholds.maxOutput)) {
        candidates.resize(static_cast<std::size_t>(thresholds.maxOutput));
    }

    std::vector<GroupedGrasp> out;
    out.reserve(candidates.size());
    for (auto& c : candidates) {
        const Grasp g = pair_to_grasp(KeypointPair::make(position(c.leftKp), position(c.rightKp)));
        out.push_back({g, std::move(c)});
    }
    return out;
}

}  // namespace graspkp
