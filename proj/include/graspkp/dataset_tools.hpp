// SPDX-License-Identifier: Apache-2.0
//
// Dataset preparation: annotation-coverage filtering for dense simulated
// grasp labels and RG-D input composition.

#pragma once

#include <array>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "graspkp/geometry.hpp"
#include "graspkp/tensor_io.hpp"

namespace graspkp {

enum class CoverageVerdict { keep, remove, review };

const char* to_string(CoverageVerdict v);

struct CoverageDecision {
    double ratio = 0.0;
    CoverageVerdict verdict = CoverageVerdict::review;
};

class DegenerateMaskError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// |union of grasp rectangles  ∩  mask| / |mask|, rasterized at image
/// resolution by pixel-center inclusion. Grasps without h use
/// `defaultHeight`. Mask cells > 0.5 count as object.
double coverage_ratio(std::span<const Grasp> grasps, const Grid2D& mask, double defaultHeight = 20.0);

/// keep above 0.8, remove below 0.2, review otherwise (boundaries included).
CoverageDecision classify_annotation(double ratio);

struct ChannelStats {
    std::array<double, 3> means{};
    std::array<double, 3> stds{};

    static ChannelStats cornell();
    static ChannelStats ajd();
};

/// Builds the (R, G, D) input: channels in [0, 255] are rescaled to [0, 1]
/// and whitened per channel. `depth` must already be mapped to [0, 255].
std::array<Grid2D, 3> compose_rgd(std::span<const Grid2D> rgb, const Grid2D& depth, const ChannelStats& stats);

/// Inverse of the whitening step: returns the [0, 1] channels.
std::array<Grid2D, 3> undo_whitening(std::span<const Grid2D> whitened, const ChannelStats& stats);

}  // namespace graspkp
