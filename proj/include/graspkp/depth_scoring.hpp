// SPDX-License-Identifier: Apache-2.0
//
// Model-based grasp quality on a top-down depth image. A parallel gripper is
// projected to three rectangles in the grasp frame: two finger pads outside
// the keypoints and the interior between them. Depths are millimetres,
// larger values are farther from the camera.

#pragma once

#include <span>
#include <stdexcept>
#include <vector>

#include "graspkp/geometry.hpp"
#include "graspkp/tensor_io.hpp"

namespace graspkp {

struct DepthImage {
    Grid2D depth;
    Grid2D surface;  // depth of the supporting surface at each pixel

    /// Throws std::invalid_argument on shape mismatch or non-positive depth.
    void validate() const;
};

struct GripperModel2D {
    double fingerThickness = 17.0;  // mm, along the closing axis
    double maxOpen = 200.0;         // mm
    double fingerLength = 40.0;     // mm, across the closing axis
    double pixelsPerMm = 1.0;
};

class GripperCapacityError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class DegenerateRegionError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct GripperRegions {
    std::vector<Pixel> fingers;   // both finger pads
    std::vector<Pixel> interior;  // between the pads
};

/// Rasterizes the gripper footprint for `g` by pixel-center inclusion,
/// clipped to a height x width image. Throws GripperCapacityError when the
/// grasp is wider than the gripper opens.
GripperRegions gripper_regions(const Grasp& g, const GripperModel2D& model, int height, int width);

struct GraspScore {
    double collision = 0.0;
    double occupancy = 0.0;
    double height = 0.0;
    double total = 0.0;
};

/// Fraction of finger pixels strictly deeper than the grasp center.
double collision_score(const Grasp& g, const DepthImage& image, const GripperModel2D& model);

/// Fraction of interior pixels strictly above the surface depth at the
/// grasp center.
double occupancy_score(const Grasp& g, const DepthImage& image, const GripperModel2D& model);

/// |d(c) - dS(c)| / |dS(c)| at the grasp center, clamped to [0, 1].
double height_score(const Grasp& g, const DepthImage& image);

GraspScore score_grasp(const Grasp& g, const DepthImage& image, const GripperModel2D& model);

struct ScoredGrasp {
    Grasp grasp;
    GraspScore score;
    std::size_t originalRank = 0;
    bool degenerate = false;
};

/// Scores each grasp and re-ranks by total (ties keep input order).
/// Grasps whose footprint is degenerate get total -1 instead of failing
/// the whole batch.
std::vector<ScoredGrasp> score_grasps(std::span<const Grasp> grasps, const DepthImage& image,
                                      const GripperModel2D& model);

inline constexpr std::size_t kDynamicCandidates = 5;

/// Picks the candidate (first five only) nearest to `previous` if it lies
/// closer than tauClose pixels; otherwise keeps `previous`.
Grasp select_dynamic(const Grasp& previous, std::span<const Grasp> candidates, double tauClose = 30.0);

}  // namespace graspkp
