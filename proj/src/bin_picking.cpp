// SPDX-License-Identifier: Apache-2.0

#include "graspkp/bin_picking.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

namespace graspkp {

bool Block::covers(Vec2 p) const {
    return p.x >= x0 && p.x < x0 + width && p.y >= y0 && p.y < y0 + length;
}

bool Block::on_graspable_span(Vec2 p) const {
    const Vec2 c = center();
    const double shortSide = std::min(width, length);
    const double along = 0.5 * std::max(width, length) - 0.25 * shortSide;
    const double across = 0.25 * shortSide;
    if (width <= length) {
        return std::abs(p.x - c.x) <= across && std::abs(p.y - c.y) <= along;
    }
    return std::abs(p.y - c.y) <= across && std::abs(p.x - c.x) <= along;
}

void SyntheticScene::render() {
    const auto surface = static_cast<float>(config.surfaceDepth);
    image.surface = Grid2D(config.imageHeight, config.imageWidth, surface);
    image.depth = image.surface;
    for (const Block& b : blocks) {
        const int r0 = std::max(0, static_cast<int>(std::floor(b.y0)));
        const int r1 = std::min(config.imageHeight - 1, static_cast<int>(std::ceil(b.y0 + b.length)));
        const int c0 = std::max(0, static_cast<int>(std::floor(b.x0)));
        const int c1 = std::min(config.imageWidth - 1, static_cast<int>(std::ceil(b.x0 + b.width)));
        const auto top = static_cast<float>(config.surfaceDepth - b.heightMm);
        for (int r = r0; r <= r1; ++r) {
            for (int c = c0; c <= c1; ++c) {
                if (b.covers({c + 0.5, r + 0.5})) image.depth.at(r, c) = top;
            }
        }
    }
}

const Block* SyntheticScene::top_block_at(Vec2 p) const {
    for (auto it = blocks.rbegin(); it != blocks.rend(); ++it) {
        if (it->covers(p)) return &*it;
    }
    return nullptr;
}

const Block* SyntheticScene::nearest_block(Vec2 p) const {
    const Block* best = nullptr;
    double bestDist = std::numeric_limits<double>::infinity();
    for (const Block& b : blocks) {
        const double d = norm(b.center() - p);
        if (d < bestDist) {
            bestDist = d;
            best = &b;
        }
    }
    return best;
}

namespace {

std::vector<Grasp> oracle_grasps_for(const Block& b, double clearance) {
    Grasp g;
    g.x = b.center().x;
    g.y = b.center().y;
    if (b.width <= b.length) {
        g.theta = 0.0;
        g.w = b.width + 2.0 * clearance;
    } else {
        g.theta = kHalfPi;
        g.w = b.length + 2.0 * clearance;
    }
    return {g};
}

bool separated(const Block& a, const Block& b, double gap) {
    return a.x0 + a.width + gap <= b.x0 || b.x0 + b.width + gap <= a.x0 ||
           a.y0 + a.length + gap <= b.y0 || b.y0 + b.length + gap <= a.y0;
}

}  // namespace

SyntheticScene make_scene(std::uint64_t seed, int objects, const SceneConfig& config,
                          const GripperModel2D& gripper) {
    if (objects < 0) throw std::invalid_argument("object count must be non-negative");
    SyntheticScene scene;
    scene.seed = seed;
    scene.config = config;

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> shortDist(config.minShort, config.maxShort);
    std::uniform_real_distribution<double> longDist(config.minLong, config.maxLong);
    std::uniform_real_distribution<double> heightDist(config.minHeight, config.maxHeight);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::bernoulli_distribution flip(0.5);

    // Room for a finger pad plus clearance on every side of a block.
    const double gap = config.graspClearance + gripper.fingerThickness * gripper.pixelsPerMm + 4.0;
    const double border = gap + 2.0;
    constexpr int kMaxTries = 20000;

    for (int id = 0; id < objects; ++id) {
        bool placed = false;
        for (int attempt = 0; attempt < kMaxTries && !placed; ++attempt) {
            Block b;
            b.id = id;
            const double s = std::round(shortDist(rng));
            const double l = std::round(longDist(rng));
            const bool wide = flip(rng);
            b.width = wide ? l : s;
            b.length = wide ? s : l;
            b.heightMm = std::round(heightDist(rng));
            const double spanX = config.imageWidth - 2.0 * border - b.width;
            const double spanY = config.imageHeight - 2.0 * border - b.length;
            if (spanX <= 0.0 || spanY <= 0.0) throw std::invalid_argument("scene image too small for blocks");
            b.x0 = std::round(border + unit(rng) * spanX);
            b.y0 = std::round(border + unit(rng) * spanY);
            if (config.isolated &&
                !std::all_of(scene.blocks.begin(), scene.blocks.end(),
                             [&](const Block& o) { return separated(o, b, gap); })) {
                continue;
            }
            b.oracleGrasps = oracle_grasps_for(b, config.graspClearance);
            scene.blocks.push_back(std::move(b));
            placed = true;
        }
        if (!placed) throw std::runtime_error("could not place " + std::to_string(objects) + " isolated blocks");
    }
    scene.render();
    return scene;
}

Detector oracle_detector() {
    return [](const SyntheticScene& scene) {
        std::vector<Grasp> out;
        for (const Block& b : scene.blocks) out.insert(out.end(), b.oracleGrasps.begin(), b.oracleGrasps.end());
        return out;
    };
}

Detector constant_detector(Grasp grasp) {
    return [grasp](const SyntheticScene&) { return std::vector<Grasp>{grasp}; };
}

Detector pipeline_detector(EncoderConfig encoder, GroupingThresholds thresholds, std::uint64_t embeddingSeed) {
    return [=](const SyntheticScene& scene) {
        std::vector<Grasp> annotations = oracle_detector()(scene);
        if (annotations.empty()) return std::vector<Grasp>{};
        EncoderConfig cfg = encoder;
        cfg.imageHeight = scene.config.imageHeight;
        cfg.imageWidth = scene.config.imageWidth;
        const HeatmapBundle bundle = ideal_bundle(annotations, cfg, embeddingSeed);
        std::vector<Grasp> out;
        for (const auto& gg : group(bundle, thresholds)) out.push_back(gg.grasp);
        return out;
    };
}

TrialLog run_bin_picking(SyntheticScene scene, const Detector& detector, const GripperModel2D& gripper,
                         const BinPickConfig& config) {
    TrialLog log;
    log.seed = scene.seed;
    log.objects = static_cast<int>(scene.blocks.size());

    int streak = 0;
    int blamed = std::numeric_limits<int>::min();
    while (true) {
        if (scene.blocks.empty()) {
            log.stopReason = "cleared";
            break;
        }
        if (log.attempts >= config.maxAttempts) {
            log.stopReason = "attempt_limit";
            break;
        }
        std::vector<Grasp> proposals = detector(scene);
        if (proposals.size() > config.topGrasps) proposals.resize(config.topGrasps);

        AttemptRecord rec;
        rec.attempt = ++log.attempts;
        if (!proposals.empty()) {
            const auto scored = score_grasps(proposals, scene.image, gripper);
            const ScoredGrasp& best = scored.front();
            rec.grasp = best.grasp;
            rec.score = best.score;
            const Vec2 c = best.grasp.center();
            const Block* top = scene.top_block_at(c);
            rec.success = !best.degenerate && best.score.collision == 1.0 && best.score.occupancy > 0.5 &&
                          top != nullptr && top->on_graspable_span(c);
            if (rec.success) {
                rec.blockId = top->id;
                const int removed = top->id;
                std::erase_if(scene.blocks, [removed](const Block& b) { return b.id == removed; });
                scene.render();
            } else if (const Block* near = scene.nearest_block(c)) {
                rec.blockId = near->id;
            }
        }
        log.history.push_back(rec);

        if (rec.success) {
            ++log.successes;
            streak = 0;
            blamed = std::numeric_limits<int>::min();
            continue;
        }
        streak = rec.blockId == blamed ? streak + 1 : 1;
        blamed = rec.blockId;
        if (streak >= config.maxConsecutiveFailures) {
            log.stopReason = "consecutive_failures";
            break;
        }
    }
    log.successRate = log.attempts == 0 ? 0.0 : static_cast<double>(log.successes) / log.attempts;
    log.percentCleared = log.objects == 0 ? 1.0 : static_cast<double>(log.successes) / log.objects;
    return log;
}

}  // namespace graspkp
