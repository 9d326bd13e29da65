// SPDX-License-Identifier: Apache-2.0
//
// Rectangle-metric grasp evaluation: a prediction matches a ground-truth
// grasp when their orientations agree within maxAngleDiff and their
// rectangles overlap with Jaccard index above minJaccard.

#pragma once

#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "graspkp/annotations.hpp"
#include "graspkp/geometry.hpp"
#include "graspkp/tensor_io.hpp"

namespace graspkp {

struct MatchCriteria {
    double maxAngleDiff = kPi / 6.0;
    double minJaccard = 0.25;
    double evalHeight = 23.33;  // rectangle height used for predictions
};

struct MatchDetail {
    bool matched = false;
    double jaccard = 0.0;
    double angleDiff = 0.0;
};

/// Predictions are always measured with evalHeight; the truth keeps its own
/// h when annotated.
MatchDetail compare(const Grasp& pred, const Grasp& truth, const MatchCriteria& criteria);
bool is_match(const Grasp& pred, const Grasp& truth, const MatchCriteria& criteria);

enum class MatchPolicy { top1, topN };

struct ImageResult {
    std::string imageId;
    bool matched = false;
    std::optional<double> bestJaccard;
    std::optional<double> bestAngleDiff;
};

struct EvalReport {
    std::size_t total = 0;
    std::size_t correct = 0;
    double accuracy = 0.0;
    std::vector<ImageResult> perImage;  // ordered by image id
    std::optional<double> fps;
};

class PairingError : public std::runtime_error {
public:
    PairingError(std::vector<std::string> orphans, const std::string& what)
        : std::runtime_error(what), orphans_(std::move(orphans)) {}
    const std::vector<std::string>& orphans() const { return orphans_; }

private:
    std::vector<std::string> orphans_;
};

/// Predictions per image must be ranked best-first. Under top1 only the
/// first prediction is judged, under topN the first `topN`. An image counts
/// as correct when a judged prediction matches any of its truths.
EvalReport evaluate_dataset(const ImageGrasps& predictions, const ImageGrasps& truths,
                            const MatchCriteria& criteria, MatchPolicy policy = MatchPolicy::top1,
                            std::size_t topN = 100);

struct FpsOptions {
    int warmupRuns = 5;
    int timedRuns = 50;
    int repetitions = 3;
};

/// Median over repetitions of timedRuns / elapsed seconds. Inputs are
/// cycled when there are fewer bundles than runs.
double measure_fps(const std::function<void(const HeatmapBundle&)>& pipeline,
                   std::span<const HeatmapBundle> bundles, const FpsOptions& options = {});

}  // namespace graspkp
