// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <functional>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "fixtures.hpp"
#include "graspkp/bin_picking.hpp"
#include "graspkp/dataset_tools.hpp"
#include "graspkp/depth_scoring.hpp"
#include "graspkp/evaluator.hpp"
#include "graspkp/grouper.hpp"
#include "graspkp/losses.hpp"
#include "graspkp/profile.hpp"
#include "graspkp/selftest.hpp"
#include "graspkp/tensor_io.hpp"
#include "oracles.hpp"

using namespace graspkp;
using Clock = std::chrono::steady_clock;

namespace {

struct Outcome {
    bool passed = true;
    std::string detail;
};

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(const char* f, auto... args) {
    char buf[256];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

Outcome roundtrip_recovery() {
    const auto t0 = Clock::now();
    std::mt19937_64 rng(1001);
    const Profile profiles[2] = {Profile::cornell(), Profile::ajd()};
    std::size_t grasps = 0, recovered = 0;
    double worstIoU = 1.0, worstAngleRatio = 0.0;
    for (int t = 0; t < 200; ++t) {
        const Profile& p = profiles[t % 2];
        const auto truth = synthetic_grasps(rng, p.encoder(), 1 + t % 5);
        const auto r = roundtrip(truth, p, rng());
        grasps += r.grasps;
        recovered += r.recovered;
        worstIoU = std::min(worstIoU, r.worstIoU);
        worstAngleRatio = std::max(worstAngleRatio, r.worstAngle / (kPi / (2.0 * p.numClasses)));
    }
    const double secs = seconds_since(t0);
    return {recovered == grasps && secs < 60.0,
            fmt("%zu/%zu recovered, worst IoU %.4f, worst angle %.3f of bound, %.2f s", recovered, grasps, worstIoU,
                worstAngleRatio, secs)};
}

Outcome gradient_checks() {
    const auto t0 = Clock::now();
    std::mt19937_64 rng(1002);
    bool ok = true;
    double worst = 0.0;
    std::size_t coords = 0;
    for (LossKind kind : kAllLossKinds) {
        for (int i = 0; i < 100; ++i) {
            const auto r = check_random_point(kind, rng, 1e-5, 1e-4, 1e-7);
            ok = ok && r.passed;
            worst = std::max(worst, r.maxRelError);
            coords += r.coordinates;
        }
    }
    const double secs = seconds_since(t0);
    return {ok && secs < 10.0, fmt("5 losses x 100 points, %zu coordinates, max rel err %.2e, %.2f s", coords, worst, secs)};
}

Outcome loss_oracle() {
    std::mt19937_64 rng(1003);
    std::uniform_real_distribution<double> p(0.001, 0.999), u(0.0, 1.0);
    std::uniform_int_distribution<int> count(0, 8);
    double worst = 0.0;
    for (int t = 0; t < 1000; ++t) {
        auto pred = LossMap::zeros(2, 4, 4);
        auto truth = pred;
        for (auto& v : pred.values) v = p(rng);
        for (auto& v : truth.values) v = u(rng) < 0.15 ? 1.0 : u(rng) * 0.95;
        std::vector<std::vector<std::vector<double>>> np(2, std::vector<std::vector<double>>(4, std::vector<double>(4)));
        auto nt = np;
        for (int c = 0; c < 2; ++c)
            for (int i = 0; i < 4; ++i)
                for (int j = 0; j < 4; ++j) {
                    np[c][i][j] = pred.at(c, i, j);
                    nt[c][i][j] = truth.at(c, i, j);
                }
        const int n = count(rng);
        worst = std::max(worst, std::abs(detection_loss(pred, truth, n).value - oracle::detection_cost(np, nt, n)));
    }
    return {worst <= 1e-9, fmt("1000 instances, max |diff| %.2e", worst)};
}

Outcome rotated_iou_oracle() {
    const auto t0 = Clock::now();
    std::mt19937_64 rng(1004);
    std::uniform_real_distribution<double> pos(-20.0, 20.0), size(1.0, 30.0), ang(-kPi, kPi), near(-0.4, 0.4);
    double worst = 0.0;
    bool exact = true;
    for (int i = 0; i < 500; ++i) {
        const OrientedRect a{{pos(rng), pos(rng)}, size(rng), size(rng), ang(rng)};
        OrientedRect b{{pos(rng), pos(rng)}, size(rng), size(rng), ang(rng)};
        // Half of the pairs are pulled close so most of them overlap.
        if (i % 2 == 0) b.center = a.center + Vec2{near(rng) * a.width, near(rng) * a.height};
        const double ours = rotated_iou(a, b);
        const double raster = oracle::raster_iou({a.center.x, a.center.y, a.width, a.height, a.theta},
                                                 {b.center.x, b.center.y, b.width, b.height, b.theta}, 1000);
        worst = std::max(worst, std::abs(ours - raster));

        exact = exact && rotated_iou(a, a) == 1.0;
        const double reach = std::hypot(a.width, a.height) + std::hypot(b.width, b.height);
        OrientedRect apart = b;
        apart.center = a.center + Vec2{reach, 0.0};
        exact = exact && rotated_iou(a, apart) == 0.0;
    }
    const double secs = seconds_since(t0);
    return {worst <= 0.01 && exact && secs < 30.0,
            fmt("500 pairs, max |diff| %.4f, identical/separated exact: %s, %.2f s", worst, exact ? "yes" : "no", secs)};
}

Outcome evaluation_metric() {
    constexpr double deg = kPi / 180.0;
    bool ok = true;
    std::string detail;
    for (const Profile& p : {Profile::cornell(), Profile::ajd()}) {
        const MatchCriteria c = p.criteria();
        const Grasp truth{100, 100, 10 * deg, 40, std::nullopt};
        const auto r31 = compare({100, 100, 41 * deg, 40, std::nullopt}, truth, c);
        const auto r29 = compare({100, 100, 39 * deg, 40, std::nullopt}, truth, c);
        const auto half = compare({100, 100, 10 * deg, 20, std::nullopt}, truth, c);
        ok = ok && !r31.matched && r29.matched && half.matched && std::abs(half.jaccard - 0.5) < 1e-9;
        detail += fmt("%s h=%.2f: 31deg %s, 29deg %s (J %.3f), contained J %.3f; ", p.name.c_str(), c.evalHeight,
                      r31.matched ? "match" : "reject", r29.matched ? "match" : "reject", r29.jaccard, half.jaccard);
    }
    ok = ok && Profile::cornell().evalHeight == 23.33 && Profile::ajd().evalHeight == 20.0;
    detail.resize(detail.size() - 2);
    return {ok, detail};
}

Outcome filter_monotonicity() {
    std::mt19937_64 rng(1006);
    std::uniform_real_distribution<double> u(0.05, 0.95);
    const Profile profiles[2] = {Profile::cornell(), Profile::ajd()};
    std::size_t violations = 0, checked = 0, truncated = 0;
    for (int t = 0; t < 50; ++t) {
        const Profile& p = profiles[t % 2];
        const auto b = fixtures::noisy_bundle(rng, p.encoder(), 15);
        const auto loose = group(b, p.thresholds);
        if (loose.size() >= static_cast<std::size_t>(p.thresholds.maxOutput)) ++truncated;
        for (int which = 0; which < 3; ++which) {
            auto th = p.thresholds;
            if (which == 0) th.rhoEmbed *= u(rng);
            if (which == 1) th.rhoCen += (1.0 - th.rhoCen) * u(rng);
            if (which == 2) th.tauOrient *= u(rng);
            for (const auto& g : group(b, th)) {
                ++checked;
                const bool found = std::any_of(loose.begin(), loose.end(), [&](const GroupedGrasp& l) {
                    return l.grasp.x == g.grasp.x && l.grasp.y == g.grasp.y && l.grasp.theta == g.grasp.theta &&
                           l.grasp.w == g.grasp.w;
                });
                if (!found) ++violations;
            }
        }
    }
    return {violations == 0 && truncated == 0,
            fmt("50 bundles x 3 thresholds, %zu tightened outputs checked, %zu not in loose set", checked, violations)};
}

Outcome scoring_bounds() {
    std::mt19937_64 rng(1007);
    const GripperModel2D gripper;
    std::uniform_int_distribution<int> objects(1, 5);
    std::uniform_real_distribution<double> pos(0.0, 400.0), ang(-kPi / 2 + 1e-9, kPi / 2), width(5.0, 190.0);
    std::uniform_real_distribution<float> noise(-2.0f, 2.0f), deepen(0.1f, 60.0f);
    std::size_t bad = 0, scored = 0;
    for (int t = 0; t < 1000; ++t) {
        auto scene = make_scene(rng(), objects(rng), {}, gripper);
        for (float& v : scene.image.depth.data()) v += noise(rng);
        // Half of the grasps aim at a block so scores are not trivially zero.
        Grasp g{pos(rng), pos(rng), ang(rng), width(rng), std::nullopt};
        if (t % 2 == 0) {
            const Block& b = scene.blocks[static_cast<std::size_t>(t / 2) % scene.blocks.size()];
            g.x = b.center().x;
            g.y = b.center().y;
        }
        GraspScore s;
        GripperRegions regions;
        try {
            s = score_grasp(g, scene.image, gripper);
            regions = gripper_regions(g, gripper, scene.image.depth.height(), scene.image.depth.width());
        } catch (const DegenerateRegionError&) {
            continue;
        }
        ++scored;
        const bool bounded = s.collision >= 0 && s.collision <= 1 && s.occupancy >= 0 && s.occupancy <= 1 &&
                             s.height >= 0 && s.height <= 1;
        const bool additive = s.total == s.collision + s.occupancy + s.height;
        auto deeper = scene.image;
        for (const Pixel& f : regions.fingers) deeper.depth.at(f.row, f.col) += deepen(rng);
        const bool monotone = collision_score(g, deeper, gripper) >= s.collision;
        if (!bounded || !additive || !monotone) ++bad;
    }
    const Grasp center{5.5, 5.5, 0.0, 4.0, std::nullopt};
    const double sh = height_score(center, {Grid2D(10, 10, 8.0f), Grid2D(10, 10, 10.0f)});
    return {bad == 0 && scored > 500 && std::abs(sh - 0.2) < 1e-12,
            fmt("%zu scored pairs, %zu violations, s_h(8, 10) = %.6f", scored, bad, sh)};
}

bool same_log(const TrialLog& a, const TrialLog& b) {
    if (a.attempts != b.attempts || a.successes != b.successes || a.stopReason != b.stopReason ||
        a.history.size() != b.history.size())
        return false;
    for (std::size_t i = 0; i < a.history.size(); ++i) {
        const auto& x = a.history[i];
        const auto& y = b.history[i];
        if (x.success != y.success || x.blockId != y.blockId || x.grasp.has_value() != y.grasp.has_value() ||
            std::memcmp(&x.score, &y.score, sizeof x.score) != 0)
            return false;
        if (x.grasp && (std::memcmp(&x.grasp->x, &y.grasp->x, sizeof(double)) != 0 ||
                        std::memcmp(&x.grasp->y, &y.grasp->y, sizeof(double)) != 0 ||
                        std::memcmp(&x.grasp->theta, &y.grasp->theta, sizeof(double)) != 0 ||
                        std::memcmp(&x.grasp->w, &y.grasp->w, sizeof(double)) != 0))
            return false;
    }
    return true;
}

Outcome bin_picking() {
    const GripperModel2D gripper;
    int perfect = 0, failStops = 0, identical = 0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const auto log = run_bin_picking(make_scene(seed, 5, {}, gripper), oracle_detector(), gripper);
        if (log.successRate == 1.0 && log.percentCleared == 1.0) ++perfect;
        const auto fail =
            run_bin_picking(make_scene(seed, 5, {}, gripper), constant_detector({2, 2, 0, 30, std::nullopt}), gripper);
        if (fail.attempts == 5 && fail.stopReason == "consecutive_failures") ++failStops;
        const auto again = run_bin_picking(make_scene(seed, 5, {}, gripper), oracle_detector(), gripper);
        if (same_log(log, again)) ++identical;
    }
    return {perfect == 20 && failStops == 20 && identical == 20,
            fmt("oracle SR=PC=100%% in %d/20, fail detector stops at 5 in %d/20, identical logs %d/20", perfect,
                failStops, identical)};
}

Outcome dataset_rules() {
    bool grid = true;
    for (int i = 0; i <= 10; ++i) {
        const double r = i / 10.0;
        const auto v = classify_annotation(r).verdict;
        const auto expected = r > 0.8 ? CoverageVerdict::keep : r < 0.2 ? CoverageVerdict::remove : CoverageVerdict::review;
        grid = grid && v == expected;
    }
    std::mt19937_64 rng(1009);
    std::uniform_int_distribution<int> byte(0, 255);
    double worst = 0.0;
    for (const ChannelStats& stats : {ChannelStats::cornell(), ChannelStats::ajd()}) {
        std::vector<Grid2D> rgb(3, Grid2D(32, 32));
        Grid2D depth(32, 32);
        for (auto& pl : rgb)
            for (float& v : pl.data()) v = static_cast<float>(byte(rng));
        for (float& v : depth.data()) v = static_cast<float>(byte(rng));
        const auto back = undo_whitening(compose_rgd(rgb, depth, stats), stats);
        const Grid2D* src[3] = {&rgb[0], &rgb[1], &depth};
        for (int c = 0; c < 3; ++c)
            for (std::size_t i = 0; i < depth.data().size(); ++i)
                worst = std::max(worst, std::abs(back[c].data()[i] - src[c]->data()[i] / 255.0));
    }
    return {grid && worst <= 1e-6,
            fmt("grid 0..1 %s, whitening round-trip max err %.2e", grid ? "exact" : "MISMATCH", worst)};
}

FormatErrc error_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const FormatError& e) {
        return e.code();
    }
    return static_cast<FormatErrc>(-1);
}

Outcome format_roundtrip() {
    std::mt19937_64 rng(1010);
    std::uniform_int_distribution<int> classes(1, 36), side(1, 40);
    int identical = 0;
    for (int t = 0; t < 100; ++t) {
        const auto b = fixtures::random_bundle(rng, classes(rng), side(rng), side(rng));
        const std::string bytes = fixtures::serialize(b);
        if (fixtures::serialize(fixtures::deserialize(bytes)) == bytes) ++identical;
    }

    const auto good = fixtures::random_bundle(rng, 2, 3, 3);
    const std::string bytes = fixtures::serialize(good);
    std::uint32_t hlen = 0;
    for (int i = 0; i < 4; ++i) hlen |= static_cast<std::uint32_t>(static_cast<unsigned char>(bytes[5 + i])) << (8 * i);
    const std::size_t payload = 9 + hlen, plane = 9 * 4;
    auto poke = [&](std::size_t planeIndex, float v) {
        std::string s = bytes;
        std::memcpy(s.data() + payload + planeIndex * plane, &v, 4);
        return s;
    };
    auto read = [](std::string s) { return [s] { fixtures::deserialize(s); }; };
    std::string magic = bytes, version = bytes, header = bytes;
    magic[0] = 'X';
    version[4] = 2;
    header[9] = '#';
    auto shortLeft = HeatmapBundle::zeros(3, 4, 4, 4);
    shortLeft.left.pop_back();
    auto badShape = HeatmapBundle::zeros(3, 4, 4, 4);
    badShape.embedR = Grid2D(4, 5);

    const std::vector<std::pair<FormatErrc, std::function<void()>>> cases = {
        {FormatErrc::bad_magic, read(magic)},
        {FormatErrc::bad_version, read(version)},
        {FormatErrc::bad_header, read(header)},
        {FormatErrc::length_mismatch, read(bytes.substr(0, bytes.size() - 1))},
        {FormatErrc::length_mismatch, read(bytes + "x")},
        {FormatErrc::out_of_range, read(poke(0, 1.5f))},
        {FormatErrc::out_of_range, read(poke(4, -0.25f))},
        {FormatErrc::out_of_range, read(poke(6, 1.0f))},
        {FormatErrc::non_finite, read(poke(10, std::numeric_limits<float>::quiet_NaN()))},
        {FormatErrc::non_finite, read(poke(9, std::numeric_limits<float>::infinity()))},
        {FormatErrc::dimension_mismatch, [&] { validate(shortLeft); }},
        {FormatErrc::dimension_mismatch, [&] { validate(badShape); }},
        {FormatErrc::io, [] { read_bundle_file("/nonexistent/bundle.gktb"); }},
    };
    int rejected = 0;
    for (const auto& [code, f] : cases) rejected += error_of(f) == code;
    return {identical == 100 && rejected == static_cast<int>(cases.size()),
            fmt("%d/100 byte-identical, %d/%zu violations rejected with the expected class", identical, rejected,
                cases.size())};
}

Outcome determinism_throughput() {
    const Profile p = Profile::cornell();
    std::mt19937_64 rng(1011);
    const auto bundle = ideal_bundle(synthetic_grasps(rng, p.encoder(), 5), p.encoder(), 11);
    if (bundle.height() != 57 || bundle.width() != 57 || bundle.numClasses != 18) return {false, "unexpected bundle shape"};
    DecoderOptions opts;
    opts.k = 100;
    std::vector<GroupedGrasp> first;
    bool same = true;
    double worstMs = 0.0;
    for (int run = 0; run < 10; ++run) {
        const auto t0 = Clock::now();
        const auto out = group(bundle, p.thresholds, opts);
        worstMs = std::max(worstMs, 1000.0 * seconds_since(t0));
        if (run == 0) {
            first = out;
            continue;
        }
        same = same && out.size() == first.size();
        for (std::size_t i = 0; same && i < out.size(); ++i) {
            const Grasp& a = out[i].grasp;
            const Grasp& b = first[i].grasp;
            same = a.x == b.x && a.y == b.y && a.theta == b.theta && a.w == b.w;
        }
    }
    return {same && worstMs < 50.0 && !first.empty(),
            fmt("%zu grasps, identical over 10 runs: %s, slowest %.2f ms", first.size(), same ? "yes" : "no", worstMs)};
}

}  // namespace

int main() {
    const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
        {"round-trip recovery", roundtrip_recovery},
        {"gradient checks", gradient_checks},
        {"detection loss oracle", loss_oracle},
        {"rotated IoU oracle", rotated_iou_oracle},
        {"evaluation metric", evaluation_metric},
        {"filter monotonicity", filter_monotonicity},
        {"scoring bounds and monotonicity", scoring_bounds},
        {"bin-picking simulation", bin_picking},
        {"dataset rules", dataset_rules},
        {"format round-trip and rejections", format_roundtrip},
        {"grouping determinism and throughput", determinism_throughput},
    };
    int failures = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        failures += !o.passed;
        std::printf("%s %2zu %s: %s\n", o.passed ? "PASS" : "FAIL", i + 1, criteria[i].first, o.detail.c_str());
        std::fflush(stdout);
    }
    std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
    return failures == 0 ? 0 : 1;
}
