// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <span>
#include <vector>

#include "graspkp/tensor_io.hpp"

namespace graspkp {

enum class KeypointRole { left, right };

struct DetectedKeypoint {
    double x = 0.0;  // input-image coordinates, offset-refined
    double y = 0.0;
    int row = 0;     // heatmap cell the keypoint was read from
    int col = 0;
    int classIndex = 0;
    double score = 0.0;
    double embedding = 0.0;
    KeypointRole role = KeypointRole::left;
};

struct DecoderOptions {
    int k = 100;
    bool peakSuppression = true;  // 3x3 max-pool before top-k
};

/// Top-k keypoints of one role across all class planes, sorted by score
/// descending with ties broken by (class, row, col) ascending. Only strictly
/// positive cells are candidates.
std::vector<DetectedKeypoint> select_grasp_keypoints(std::span<const Grid2D> heatmaps, const Grid2D& embedding,
                                                     std::span<const Grid2D> offsets, int ratio,
                                                     KeypointRole role, const DecoderOptions& options = {});

struct DecodedKeypoints {
    std::vector<DetectedKeypoint> left;
    std::vector<DetectedKeypoint> right;
};

DecodedKeypoints decode_bundle(const HeatmapBundle& bundle, const DecoderOptions& options = {});

}  // namespace graspkp
