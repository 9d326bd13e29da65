// SPDX-License-Identifier: Apache-2.0

#include "graspkp/selftest.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace graspkp {

namespace {

bool inside(Vec2 p, const EncoderConfig& c, double border) {
    return p.x >= border && p.y >= border && p.x < c.imageWidth - border && p.y < c.imageHeight - border;
}

std::array<Vec2, 3> landmarks(const Grasp& g) {
    const KeypointPair kp = grasp_to_pair(g);
    return {kp.left(), kp.right(), g.center()};
}

}  // namespace

std::vector<Grasp> synthetic_grasps(std::mt19937_64& rng, const EncoderConfig& config, int count,
                                    const SyntheticOptions& options) {
    std::uniform_real_distribution<double> xs(0.0, config.imageWidth);
    std::uniform_real_distribution<double> ys(0.0, config.imageHeight);
    std::uniform_real_distribution<double> thetas(-kHalfPi, kHalfPi);
    std::uniform_real_distribution<double> widths(options.minWidth, options.maxWidth);

    std::vector<Grasp> out;
    constexpr int kMaxTries = 10000;
    for (int i = 0; i < count; ++i) {
        bool placed = false;
        for (int t = 0; t < kMaxTries && !placed; ++t) {
            Grasp g;
            g.x = xs(rng);
            g.y = ys(rng);
            g.theta = fold_angle(thetas(rng));
            g.w = widths(rng);
            const auto mine = landmarks(g);
            if (!std::all_of(mine.begin(), mine.end(), [&](Vec2 p) { return inside(p, config, options.border); })) {
                continue;
            }
            const bool apart = std::all_of(out.begin(), out.end(), [&](const Grasp& o) {
                for (Vec2 p : landmarks(o)) {
                    for (Vec2 q : mine) {
                        if (norm(p - q) < options.minSeparation) return false;
                    }
                }
                return true;
            });
            if (!apart) continue;
            out.push_back(g);
            placed = true;
        }
        if (!placed) throw std::runtime_error("synthetic_grasps: could not place grasp " + std::to_string(i));
    }
    return out;
}

RoundTripResult roundtrip(const std::vector<Grasp>& truth, const Profile& profile, std::uint64_t seed) {
    const HeatmapBundle bundle = ideal_bundle(truth, profile.encoder(), seed);
    const auto grouped = group(bundle, profile.thresholds);
    const double maxAngle = kPi / (2.0 * profile.numClasses);

    RoundTripResult r;
    r.grasps = truth.size();
    for (const Grasp& t : truth) {
        const OrientedRect tr = to_rect(t, profile.evalHeight);
        double bestIoU = -1.0;
        double bestAngle = 0.0;
        for (const auto& gg : grouped) {
            const double angle = angle_distance(gg.grasp.theta, t.theta);
            const double iou = rotated_iou(to_rect(gg.grasp, profile.evalHeight), tr);
            if (angle < maxAngle && iou > 0.9 && iou > bestIoU) {
                bestIoU = iou;
                bestAngle = angle;
            }
        }
        if (bestIoU < 0.0) continue;
        ++r.recovered;
        r.worstIoU = std::min(r.worstIoU, bestIoU);
        r.worstAngle = std::max(r.worstAngle, bestAngle);
    }
    return r;
}

SelfTestReport run_selftest(std::uint64_t seed, int roundtripSets, int gradientPoints) {
    SelfTestReport report;
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> counts(1, 5);
    const Profile profiles[] = {Profile::cornell(), Profile::ajd()};
    for (int i = 0; i < roundtripSets; ++i) {
        const Profile& p = profiles[i % 2];
        const auto truth = synthetic_grasps(rng, p.encoder(), counts(rng));
        const RoundTripResult r = roundtrip(truth, p, rng());
        report.roundtrips.grasps += r.grasps;
        report.roundtrips.recovered += r.recovered;
        report.roundtrips.worstIoU = std::min(report.roundtrips.worstIoU, r.worstIoU);
        report.roundtrips.worstAngle = std::max(report.roundtrips.worstAngle, r.worstAngle);
    }

    bool gradientsOk = true;
    for (LossKind kind : kAllLossKinds) {
        GradientReport agg;
        for (int i = 0; i < gradientPoints; ++i) {
            const GradientReport g = check_random_point(kind, rng, 1e-5, 1e-4);
            agg.coordinates += g.coordinates;
            if (g.maxRelError > agg.maxRelError) {
                agg.maxRelError = g.maxRelError;
                agg.worstCoordinate = g.worstCoordinate;
            }
            agg.maxAbsError = std::max(agg.maxAbsError, g.maxAbsError);
            agg.passed = agg.passed && g.passed;
        }
        gradientsOk = gradientsOk && agg.passed;
        report.gradients.emplace_back(kind, agg);
    }
    report.passed = report.roundtrips.passed() && gradientsOk;
    return report;
}

}  // namespace graspkp
