// SPDX-License-Identifier: Apache-2.0
//
// Ground-truth target rendering: grasp annotations become per-class keypoint
// heatmaps, a center heatmap and offset maps at 1/R resolution.

#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "graspkp/geometry.hpp"
#include "graspkp/losses.hpp"
#include "graspkp/tensor_io.hpp"

namespace graspkp {

struct EncoderConfig {
    int downsampleRatio = 4;
    int numClasses = 18;
    int imageHeight = 0;
    int imageWidth = 0;
    // Gaussian sigma in heatmap pixels: max(minSigma, w / (sigmaDivisor * R)),
    // truncated at truncateSigmas * sigma.
    double sigmaDivisor = 3.0;
    double minSigma = 1.0;
    double truncateSigmas = 3.0;

    int heatmap_height() const { return (imageHeight + downsampleRatio - 1) / downsampleRatio; }
    int heatmap_width() const { return (imageWidth + downsampleRatio - 1) / downsampleRatio; }
    double sigma_for(double graspWidth) const;
};

/// Heatmap pixel holding a full-resolution point (floor quantization).
Pixel quantize(Vec2 p, int ratio);

struct KeypointTarget {
    std::size_t graspId = 0;  // index into the annotation list
    Vec2 leftPoint;
    Vec2 rightPoint;
    Pixel leftPixel;
    Pixel rightPixel;
    Pixel centerPixel;
    int classIndex = 0;
    Offset2 leftOffset;
    Offset2 rightOffset;
};

struct EncodedTargets {
    HeatmapBundle targets;  // embedding planes are left at zero
    std::vector<KeypointTarget> keypoints;
};

/// Renders `annotations` in order. A grasp whose left or right keypoint
/// lands on a (class, pixel) cell already claimed by an earlier surviving
/// grasp in the same role is dropped. Throws AnnotationError naming the
/// grasp index when a keypoint falls outside the image.
EncodedTargets encode_targets(const std::vector<Grasp>& annotations, const EncoderConfig& config);

class CapacityError : public std::length_error {
public:
    using std::length_error::length_error;
};

inline constexpr std::size_t kMaxIdealGrasps = 100;

/// A bundle a perfect network would emit for `annotations`: the encoded
/// targets plus embeddings that agree within each grasp and differ by at
/// least 1.5 between grasps, assigned from `seed`.
HeatmapBundle ideal_bundle(const std::vector<Grasp>& annotations, const EncoderConfig& config,
                           std::uint64_t seed);

/// Same as ideal_bundle but also returns the surviving keypoint index.
EncodedTargets ideal_targets(const std::vector<Grasp>& annotations, const EncoderConfig& config,
                             std::uint64_t seed);

}  // namespace graspkp
