// SPDX-License-Identifier: Apache-2.0
//
// Training losses for the keypoint heads, each returning its value together
// with the analytic gradient w.r.t. the predictions, plus a central
// finite-difference checker for those gradients.
//
// Everything here runs in double precision; heatmaps coming from a bundle
// are widened with to_loss_map().

#pragma once

#include <cstddef>
#include <functional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "graspkp/tensor_io.hpp"

namespace graspkp {

struct FocalParams {
    double alpha = 2.0;
    double beta = 4.0;
};

struct LossWeights {
    double pull = 1.0;
    double push = 1.0;
    double offset = 1.0;
};

/// Dense planes x height x width tensor of doubles, row-major per plane.
struct LossMap {
    int planes = 0;
    int height = 0;
    int width = 0;
    std::vector<double> values;

    static LossMap zeros(int planes, int height, int width);
    std::size_t size() const { return values.size(); }
    bool same_shape(const LossMap& o) const {
        return planes == o.planes && height == o.height && width == o.width;
    }
    double& at(int c, int row, int col) { return values[index(c, row, col)]; }
    double at(int c, int row, int col) const { return values[index(c, row, col)]; }

private:
    std::size_t index(int c, int row, int col) const {
        return (static_cast<std::size_t>(c) * height + row) * width + col;
    }
};

LossMap to_loss_map(std::span<const Grid2D> planes);

struct Offset2 {
    double x = 0.0;
    double y = 0.0;
};

struct EmbeddingPair {
    double left = 0.0;
    double right = 0.0;
};

template <typename Gradient>
struct LossResult {
    double value = 0.0;
    Gradient gradient;
};

class DimensionError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

inline constexpr double kLogClamp = 1e-12;

/// Focal detection loss over every (plane, row, col). Ground-truth positives
/// are cells where truth == 1 exactly; `count` is the number of grasps and
/// is floored at 1 for normalization. Works for the per-class keypoint
/// stack and for the single center plane alike.
LossResult<LossMap> detection_loss(const LossMap& pred, const LossMap& truth, int count,
                                   FocalParams params = {});

/// Mean smooth-L1 (kink at |d| = 1) over keypoints, summed over both axes.
LossResult<std::vector<Offset2>> offset_loss(std::span<const Offset2> pred, std::span<const Offset2> truth);

/// Sub-pixel remainder lost when a full-resolution coordinate is divided by
/// the downsampling ratio.
Offset2 ground_truth_offset(int i, int j, int ratio);
Offset2 ground_truth_offset(double x, double y, int ratio);

/// Gradients are w.r.t. (left, right) of each pair.
LossResult<std::vector<EmbeddingPair>> pull_loss(std::span<const EmbeddingPair> pairs);
LossResult<std::vector<EmbeddingPair>> push_loss(std::span<const EmbeddingPair> pairs);

struct LossComponents {
    double keypointDetection = 0.0;
    double centerDetection = 0.0;
    double pull = 0.0;
    double push = 0.0;
    double offset = 0.0;
};

double total_loss(const LossComponents& parts, const LossWeights& weights = {});

// --- gradient verification -------------------------------------------------

class GradientCheckError : public std::runtime_error {
public:
    GradientCheckError(std::size_t coordinate, const std::string& what)
        : std::runtime_error(what), coordinate_(coordinate) {}
    std::size_t coordinate() const { return coordinate_; }

private:
    std::size_t coordinate_;
};

struct GradientReport {
    std::size_t coordinates = 0;
    double maxRelError = 0.0;  // over coordinates not excused by the absolute floor
    double maxAbsError = 0.0;
    std::size_t worstCoordinate = 0;
    bool passed = true;
};

using ScalarFn = std::function<double(std::span<const double>)>;

/// Compares `analytic` against central differences of `fn` at `point`.
/// A coordinate passes when its relative error is below `tolerance` or its
/// absolute error is below `absFloor`.
GradientReport gradient_check(const ScalarFn& fn, std::span<const double> point,
                              std::span<const double> analytic, double step, double tolerance,
                              double absFloor = 1e-7);

enum class LossKind { keypoint_detection, center_detection, offset, pull, push };

const char* to_string(LossKind kind);
inline constexpr LossKind kAllLossKinds[] = {LossKind::keypoint_detection, LossKind::center_detection,
                                             LossKind::offset, LossKind::pull, LossKind::push};

/// Draws a random input for `kind` that keeps every kink at least 10*step
/// away, then runs gradient_check on it.
GradientReport check_random_point(LossKind kind, std::mt19937_64& rng, double step, double tolerance,
                                  double absFloor = 1e-7);

}  // namespace graspkp
