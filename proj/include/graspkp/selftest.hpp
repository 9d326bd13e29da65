// SPDX-License-Identifier: Apache-2.0
//
// Seeded synthetic annotations and the end-to-end checks run by `selftest`.

#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "graspkp/losses.hpp"
#include "graspkp/profile.hpp"

namespace graspkp {

struct SyntheticOptions {
    double minWidth = 20.0;   // grasp opening, pixels
    double maxWidth = 60.0;
    double minSeparation = 16.0;  // between any two keypoints or centers of different grasps
    double border = 4.0;
};

/// `count` grasps whose keypoints lie inside the image and stay well apart.
/// Throws std::runtime_error when the image cannot hold them.
std::vector<Grasp> synthetic_grasps(std::mt19937_64& rng, const EncoderConfig& config, int count,
                                    const SyntheticOptions& options = {});

struct RoundTripResult {
    std::size_t grasps = 0;
    std::size_t recovered = 0;
    double worstIoU = 1.0;     // over recovered grasps
    double worstAngle = 0.0;   // radians
    bool passed() const { return recovered == grasps; }
};

/// Encodes `truth` into an ideal bundle, decodes and groups it, and counts
/// the annotations matched by some output with IoU > 0.9 and angle error
/// below half a class width.
RoundTripResult roundtrip(const std::vector<Grasp>& truth, const Profile& profile, std::uint64_t seed);

struct SelfTestReport {
    RoundTripResult roundtrips;
    std::vector<std::pair<LossKind, GradientReport>> gradients;
    bool passed = false;
};

SelfTestReport run_selftest(std::uint64_t seed, int roundtripSets = 20, int gradientPoints = 20);

}  // namespace graspkp
