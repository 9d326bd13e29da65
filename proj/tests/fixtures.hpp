// Seeded generators shared by the test binaries.

#pragma once

#include <random>
#include <sstream>
#include <string>

#include "graspkp/gt_encoder.hpp"
#include "graspkp/selftest.hpp"
#include "graspkp/tensor_io.hpp"

namespace fixtures {

inline graspkp::Grid2D random_grid(std::mt19937_64& rng, int h, int w, float lo, float hi) {
    std::uniform_real_distribution<float> d(lo, hi);
    graspkp::Grid2D g(h, w);
    for (float& v : g.data()) v = d(rng);
    return g;
}

// A bundle satisfying every invariant, with values spread over each plane's full range.
inline graspkp::HeatmapBundle random_bundle(std::mt19937_64& rng, int classes, int h, int w, int ratio = 4) {
    graspkp::HeatmapBundle b;
    b.numClasses = classes;
    b.downsampleRatio = ratio;
    for (int c = 0; c < classes; ++c) {
        b.left.push_back(random_grid(rng, h, w, 0.0f, 1.0f));
        b.right.push_back(random_grid(rng, h, w, 0.0f, 1.0f));
    }
    b.center = random_grid(rng, h, w, 0.0f, 1.0f);
    for (int i = 0; i < 2; ++i) {
        b.offsetL.push_back(random_grid(rng, h, w, 0.0f, 0.999f));
        b.offsetR.push_back(random_grid(rng, h, w, 0.0f, 0.999f));
    }
    b.embedL = random_grid(rng, h, w, -50.0f, 50.0f);
    b.embedR = random_grid(rng, h, w, -50.0f, 50.0f);
    return b;
}

inline std::string serialize(const graspkp::HeatmapBundle& b) {
    std::ostringstream out;
    graspkp::write_bundle(b, out);
    return out.str();
}

inline graspkp::HeatmapBundle deserialize(const std::string& bytes) {
    std::istringstream in(bytes);
    return graspkp::read_bundle(in);
}

// An ideal bundle of 1..maxGrasps possibly colliding grasps, degraded so every
// grouping filter has something to reject: peaks are rescaled, the center
// map gets a noise floor and embeddings get jitter.
inline graspkp::HeatmapBundle noisy_bundle(std::mt19937_64& rng, const graspkp::EncoderConfig& config, int maxGrasps) {
    graspkp::SyntheticOptions opts;
    opts.minSeparation = 0.0;
    const int n = std::uniform_int_distribution<int>(1, maxGrasps)(rng);
    auto b = graspkp::ideal_bundle(graspkp::synthetic_grasps(rng, config, n, opts), config, rng());
    std::uniform_real_distribution<float> scale(0.2f, 1.0f);
    std::uniform_real_distribution<float> floor(0.0f, 0.3f);
    std::normal_distribution<float> jitter(0.0f, 0.6f);
    for (auto* stack : {&b.left, &b.right}) {
        for (auto& plane : *stack) {
            const float s = scale(rng);
            for (float& v : plane.data()) v *= s;
        }
    }
    for (float& v : b.center.data()) v = std::min(1.0f, v * scale(rng) + floor(rng) * floor(rng));
    for (auto* plane : {&b.embedL, &b.embedR}) {
        for (float& v : plane->data()) v += jitter(rng);
    }
    return b;
}

}  // namespace fixtures
