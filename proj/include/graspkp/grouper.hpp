// SPDX-License-Identifier: Apache-2.0
//
// Pairs decoded left/right keypoints into grasps: cross product, center
// validation, class/embedding/center filtering, orientation agreement, and
// final ranking.

#pragma once

#include <span>
#include <vector>

#include "graspkp/decoder.hpp"
#include "graspkp/geometry.hpp"
#include "graspkp/tensor_io.hpp"

namespace graspkp {

struct GroupingThresholds {
    double rhoEmbed = 1.0;
    double rhoCen = 0.05;
    double tauOrient = 0.24;
    int maxOutput = 100;
};

struct ScoredPair {
    DetectedKeypoint left;
    DetectedKeypoint right;
    double centerScore = 0.0;
};

struct GraspCandidate {
    DetectedKeypoint leftKp;
    DetectedKeypoint rightKp;
    int classIndex = 0;
    double centerScore = 0.0;
    double thetaDiscrete = 0.0;
    double thetaContinuous = 0.0;
};

struct GroupedGrasp {
    Grasp grasp;
    GraspCandidate candidate;
};

/// Center-map value at the cell holding the midpoint of `a` and `b`
/// (floor quantization, clamped to the map).
double center_score(Vec2 a, Vec2 b, const Grid2D& centerMap, int ratio);

/// Every left x right combination with its center score, left-major order.
std::vector<ScoredPair> extract_center_scores(std::span<const DetectedKeypoint> left,
                                              std::span<const DetectedKeypoint> right,
                                              const Grid2D& centerMap, int ratio);

/// Keeps pairs with equal classes, |embedding gap| < rhoEmbed,
/// centerScore > rhoCen, and the left keypoint canonically before the right.
std::vector<GraspCandidate> filter_pairs(std::span<const ScoredPair> pairs, const GroupingThresholds& thresholds,
                                         const OrientationClasses& classes);

/// Keeps candidates whose class angle and keypoint angle differ by at most
/// tauOrient, measured modulo pi.
std::vector<GraspCandidate> orientation_filter(std::vector<GraspCandidate> candidates, double tauOrient);

/// Full grouping. Output ranked by center score, then mean keypoint score,
/// then keypoint coordinates; at most thresholds.maxOutput entries.
std::vector<GroupedGrasp> group(const HeatmapBundle& bundle, const GroupingThresholds& thresholds,
                                const DecoderOptions& decoder = {});

}  // namespace graspkp
