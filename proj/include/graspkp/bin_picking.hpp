// SPDX-License-Identifier: Apache-2.0
//
// Seeded bin-picking simulation. Objects are axis-aligned blocks on a flat
// surface seen by a top-down depth camera; a detector proposes grasps, the
// depth scorer ranks them and the best one is attempted. A pick succeeds
// when the gripper is collision free, the interior is mostly occupied and
// the grasp center sits on the graspable span of the block it lands on.

#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "graspkp/depth_scoring.hpp"
#include "graspkp/gt_encoder.hpp"
#include "graspkp/grouper.hpp"

namespace graspkp {

struct Block {
    int id = 0;
    double x0 = 0.0;  // top-left corner, pixels
    double y0 = 0.0;
    double width = 0.0;  // pixels along x
    double length = 0.0;  // pixels along y
    double heightMm = 0.0;
    std::vector<Grasp> oracleGrasps;

    Vec2 center() const { return {x0 + 0.5 * width, y0 + 0.5 * length}; }
    bool covers(Vec2 p) const;
    /// Central strip along the long side where a centered pinch holds.
    bool on_graspable_span(Vec2 p) const;
};

struct SceneConfig {
    int imageHeight = 400;
    int imageWidth = 400;
    double surfaceDepth = 800.0;  // mm
    double minShort = 20.0;       // block short side, pixels
    double maxShort = 36.0;
    double minLong = 44.0;
    double maxLong = 72.0;
    double minHeight = 20.0;  // mm
    double maxHeight = 80.0;
    double graspClearance = 6.0;  // pixels added on each side of the short edge
    bool isolated = true;         // keep blocks apart so each oracle grasp is collision free
};

struct SyntheticScene {
    std::uint64_t seed = 0;
    SceneConfig config;
    std::vector<Block> blocks;  // later blocks are stacked on earlier ones
    DepthImage image;

    void render();
    /// Topmost block whose footprint holds `p`, if any.
    const Block* top_block_at(Vec2 p) const;
    const Block* nearest_block(Vec2 p) const;
};

SyntheticScene make_scene(std::uint64_t seed, int objects, const SceneConfig& config = {},
                          const GripperModel2D& gripper = {});

/// Detectors see the current scene (rendered depth plus ground truth).
using Detector = std::function<std::vector<Grasp>(const SyntheticScene&)>;

/// Oracle grasps of every remaining block.
Detector oracle_detector();
/// Always proposes `grasp`.
Detector constant_detector(Grasp grasp);
/// Renders the oracle grasps into an ideal heatmap bundle and runs the
/// decoder and grouper on it.
Detector pipeline_detector(EncoderConfig encoder, GroupingThresholds thresholds, std::uint64_t embeddingSeed);

struct BinPickConfig {
    int maxConsecutiveFailures = 5;
    int maxAttempts = 100;
    std::size_t topGrasps = 100;
};

struct AttemptRecord {
    int attempt = 0;
    std::optional<Grasp> grasp;
    GraspScore score;
    bool success = false;
    int blockId = -1;  // block picked, or the one blamed for a failure
};

struct TrialLog {
    std::uint64_t seed = 0;
    int objects = 0;
    int attempts = 0;
    int successes = 0;
    double successRate = 0.0;
    double percentCleared = 0.0;
    std::string stopReason;  // "cleared", "consecutive_failures", "attempt_limit"
    std::vector<AttemptRecord> history;
};

TrialLog run_bin_picking(SyntheticScene scene, const Detector& detector, const GripperModel2D& gripper,
                         const BinPickConfig& config = {});

}  // namespace graspkp
