// SPDX-License-Identifier: Apache-2.0
//
// graspkp: command-line front end. JSON goes to stdout, diagnostics to stderr.
// Exit codes: 0 success, 1 usage error, 2 data or validation error.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "graspkp/annotations.hpp"
#include "graspkp/bin_picking.hpp"
#include "graspkp/dataset_tools.hpp"
#include "graspkp/decoder.hpp"
#include "graspkp/depth_scoring.hpp"
#include "graspkp/evaluator.hpp"
#include "graspkp/grouper.hpp"
#include "graspkp/gt_encoder.hpp"
#include "graspkp/losses.hpp"
#include "graspkp/profile.hpp"
#include "graspkp/selftest.hpp"
#include "graspkp/tensor_io.hpp"

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitData = 2;

// Raised for inputs that parse but fail validation.
struct DataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

void emit(const ordered_json& j) { std::cout << j.dump() << '\n'; }

ordered_json grasp_json(const graspkp::Grasp& g) {
    const nlohmann::json plain = graspkp::grasp_to_json(g);
    ordered_json j;
    for (const char* key : {"x", "y", "theta_deg", "w", "h"}) j[key] = plain.at(key);
    return j;
}

ordered_json score_json(const graspkp::GraspScore& s) {
    return {{"collision", s.collision}, {"occupancy", s.occupancy}, {"height", s.height}, {"total", s.total}};
}

void check_profile(const graspkp::HeatmapBundle& b, const graspkp::Profile& p) {
    if (b.numClasses != p.numClasses || b.downsampleRatio != p.downsampleRatio) {
        throw DataError("bundle has " + std::to_string(b.numClasses) + " classes at ratio " +
                        std::to_string(b.downsampleRatio) + " but profile '" + p.name + "' expects " +
                        std::to_string(p.numClasses) + " at ratio " + std::to_string(p.downsampleRatio));
    }
}

const graspkp::Grid2D& single_plane(const graspkp::PlaneFile& f, const std::string& name, const std::string& path) {
    const graspkp::PlaneGroup* g = f.find(name);
    if (g == nullptr || g->planes.size() != 1) {
        throw DataError("'" + path + "' must hold a single plane named '" + name + "'");
    }
    return g->planes.front();
}

graspkp::GripperModel2D read_gripper(const std::string& path) {
    graspkp::GripperModel2D m;
    if (path.empty()) return m;
    std::ifstream in(path);
    if (!in) throw DataError("cannot open gripper file '" + path + "'");
    const auto j = nlohmann::json::parse(in);
    m.fingerThickness = j.value("finger_thickness", m.fingerThickness);
    m.maxOpen = j.value("max_open", m.maxOpen);
    m.fingerLength = j.value("finger_length", m.fingerLength);
    m.pixelsPerMm = j.value("pixels_per_mm", m.pixelsPerMm);
    if (!(m.fingerThickness > 0 && m.maxOpen > 0 && m.fingerLength > 0 && m.pixelsPerMm > 0)) {
        throw DataError("gripper parameters must be positive");
    }
    return m;
}

ordered_json keypoint_json(const graspkp::DetectedKeypoint& k) {
    return {{"role", k.role == graspkp::KeypointRole::left ? "left" : "right"},
            {"x", k.x},
            {"y", k.y},
            {"row", k.row},
            {"col", k.col},
            {"class", k.classIndex},
            {"score", k.score},
            {"embedding", k.embedding}};
}

ordered_json trial_json(const graspkp::TrialLog& log) {
    ordered_json history = ordered_json::array();
    for (const auto& a : log.history) {
        ordered_json h{{"attempt", a.attempt}, {"success", a.success}, {"block", a.blockId}};
        h["grasp"] = a.grasp ? grasp_json(*a.grasp) : ordered_json(nullptr);
        h["score"] = score_json(a.score);
        history.push_back(std::move(h));
    }
    return {{"seed", log.seed},
            {"objects", log.objects},
            {"attempts", log.attempts},
            {"successes", log.successes},
            {"success_rate", log.successRate},
            {"percent_cleared", log.percentCleared},
            {"stop_reason", log.stopReason},
            {"history", std::move(history)}};
}

ordered_json gradient_json(graspkp::LossKind kind, const graspkp::GradientReport& r) {
    return {{"loss", graspkp::to_string(kind)},
            {"coordinates", r.coordinates},
            {"max_rel_error", r.maxRelError},
            {"max_abs_error", r.maxAbsError},
            {"worst_coordinate", r.worstCoordinate},
            {"passed", r.passed}};
}

std::map<std::string, fs::path> files_by_stem(const std::string& dir, const std::string& ext) {
    if (!fs::is_directory(dir)) throw DataError("'" + dir + "' is not a directory");
    std::map<std::string, fs::path> out;
    for (const auto& e : fs::directory_iterator(dir)) {
        if (e.is_regular_file() && e.path().extension() == ext) out[e.path().stem().string()] = e.path();
    }
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Grasp keypoint pipeline tools"};
    app.require_subcommand(1);

    std::string profileName = "cornell";
    std::string bundlePath;
    std::uint64_t seed = 0;
    int k = 100;
    int top = 100;
    bool noNms = false;

    const auto add_profile = [&](CLI::App* sub) {
        sub->add_option("--profile", profileName, "Dataset profile")
            ->check(CLI::IsMember({"cornell", "ajd"}))
            ->capture_default_str();
    };

    // encode
    std::string annotationsPath;
    std::string outPath;
    auto* encode = app.add_subcommand("encode", "Render annotations into an ideal heatmap bundle");
    encode->add_option("--annotations", annotationsPath, "Grasp annotations (JSON lines)")->required();
    encode->add_option("--out", outPath, "Output GKTB bundle")->required();
    encode->add_option("--seed", seed, "Embedding seed")->capture_default_str();
    add_profile(encode);

    // decode
    auto* decode = app.add_subcommand("decode", "Detect grasp keypoints in a bundle");
    decode->add_option("--bundle", bundlePath, "GKTB bundle")->required();
    decode->add_option("--k", k, "Keypoints per role")->check(CLI::PositiveNumber)->capture_default_str();
    decode->add_flag("--no-nms", noNms, "Disable 3x3 peak suppression");
    add_profile(decode);

    // group
    std::optional<double> rhoEmbed, rhoCen, tauOrient;
    std::string imageId;
    auto* groupCmd = app.add_subcommand("group", "Group keypoints into ranked grasps");
    groupCmd->add_option("--bundle", bundlePath, "GKTB bundle")->required();
    groupCmd->add_option("--k", k, "Keypoints per role")->check(CLI::PositiveNumber)->capture_default_str();
    groupCmd->add_option("--top", top, "Maximum grasps emitted")->check(CLI::NonNegativeNumber)->capture_default_str();
    groupCmd->add_option("--rho-embed", rhoEmbed, "Embedding distance threshold");
    groupCmd->add_option("--rho-cen", rhoCen, "Center score threshold");
    groupCmd->add_option("--tau-orient", tauOrient, "Orientation agreement threshold (radians)");
    groupCmd->add_option("--image", imageId, "Image id attached to each record");
    groupCmd->add_flag("--no-nms", noNms, "Disable 3x3 peak suppression");
    add_profile(groupCmd);

    // evaluate
    std::string predPath, truthPath, policyName = "top1";
    auto* evaluate = app.add_subcommand("evaluate", "Score predictions against ground truth");
    evaluate->add_option("--pred", predPath, "Predicted grasps (JSON lines)")->required();
    evaluate->add_option("--truth", truthPath, "Ground-truth grasps (JSON lines)")->required();
    evaluate->add_option("--policy", policyName, "Match policy")
        ->check(CLI::IsMember({"top1", "topN"}))
        ->capture_default_str();
    evaluate->add_option("--top", top, "Predictions considered under topN")->check(CLI::PositiveNumber);
    add_profile(evaluate);

    // score
    std::string graspsPath, depthPath, surfacePath, gripperPath;
    auto* score = app.add_subcommand("score", "Rank grasps by depth-image quality");
    score->add_option("--grasps", graspsPath, "Grasps (JSON lines)")->required();
    score->add_option("--depth", depthPath, "Depth image, single plane named 'depth'")->required();
    score->add_option("--surface", surfacePath, "Surface depth, single plane named 'surface'");
    score->add_option("--gripper", gripperPath, "Gripper model JSON");

    // simulate-binpick
    int objects = 5;
    int trials = 1;
    std::string detectorName = "oracle";
    auto* simulate = app.add_subcommand("simulate-binpick", "Run seeded bin-picking trials");
    simulate->add_option("--seed", seed, "Seed of the first trial")->capture_default_str();
    simulate->add_option("--objects", objects, "Blocks per scene")->check(CLI::NonNegativeNumber)->capture_default_str();
    simulate->add_option("--trials", trials, "Number of trials")->check(CLI::PositiveNumber)->capture_default_str();
    simulate->add_option("--detector", detectorName, "Grasp source")
        ->check(CLI::IsMember({"oracle", "pipeline", "fail"}))
        ->capture_default_str();
    simulate->add_option("--gripper", gripperPath, "Gripper model JSON");
    add_profile(simulate);

    // filter-jacquard
    std::string annotationsDir, masksDir;
    double maskHeight = 20.0;
    auto* filter = app.add_subcommand("filter-jacquard", "Classify annotation sets by mask coverage");
    filter->add_option("--annotations", annotationsDir, "Directory of <image>.jsonl files")->required();
    filter->add_option("--masks", masksDir, "Directory of <image>.gktb single-plane masks")->required();
    filter->add_option("--out", outPath, "Report file")->required();
    filter->add_option("--height", maskHeight, "Rectangle height for grasps without h")->capture_default_str();

    // gradcheck
    int points = 100;
    double step = 1e-5;
    double tolerance = 1e-4;
    auto* gradcheck = app.add_subcommand("gradcheck", "Finite-difference check of every loss");
    gradcheck->add_option("--seed", seed, "RNG seed")->capture_default_str();
    gradcheck->add_option("--points", points, "Random points per loss")->check(CLI::PositiveNumber)->capture_default_str();
    gradcheck->add_option("--step", step, "Central-difference step")->check(CLI::Range(1e-7, 1e-3))->capture_default_str();
    gradcheck->add_option("--tolerance", tolerance, "Relative tolerance")->capture_default_str();

    // selftest
    auto* selftest = app.add_subcommand("selftest", "Ideal-bundle round trips plus gradient checks");
    selftest->add_option("--seed", seed, "RNG seed")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 1;
    }

    try {
        const graspkp::Profile profile = graspkp::Profile::by_name(profileName);
        graspkp::DecoderOptions decoderOptions;
        decoderOptions.k = k;
        decoderOptions.peakSuppression = !noNms;

        if (*encode) {
            const auto grasps = graspkp::read_annotations_file(annotationsPath);
            const auto bundle = graspkp::ideal_bundle(grasps, profile.encoder(), seed);
            const std::size_t bytes = graspkp::write_bundle_file(bundle, outPath);
            emit({{"out", outPath},
                  {"profile", profile.name},
                  {"grasps", grasps.size()},
                  {"height", bundle.height()},
                  {"width", bundle.width()},
                  {"bytes", bytes}});
        } else if (*decode) {
            const auto bundle = graspkp::read_bundle_file(bundlePath);
            check_profile(bundle, profile);
            const auto kps = graspkp::decode_bundle(bundle, decoderOptions);
            for (const auto& kp : kps.left) emit(keypoint_json(kp));
            for (const auto& kp : kps.right) emit(keypoint_json(kp));
        } else if (*groupCmd) {
            const auto bundle = graspkp::read_bundle_file(bundlePath);
            check_profile(bundle, profile);
            graspkp::GroupingThresholds t = profile.thresholds;
            ordered_json overrides = ordered_json::object();
            if (rhoEmbed) overrides["rho_embed"] = t.rhoEmbed = *rhoEmbed;
            if (rhoCen) overrides["rho_cen"] = t.rhoCen = *rhoCen;
            if (tauOrient) overrides["tau_orient"] = t.tauOrient = *tauOrient;
            if (groupCmd->count("--top") > 0) overrides["top"] = top;
            if (groupCmd->count("--k") > 0) overrides["k"] = k;
            if (noNms) overrides["nms"] = false;
            t.maxOutput = top;
            emit({{"meta",
                   {{"profile", profile.name},
                    {"rho_embed", t.rhoEmbed},
                    {"rho_cen", t.rhoCen},
                    {"tau_orient", t.tauOrient},
                    {"top", t.maxOutput},
                    {"k", k},
                    {"overrides", overrides}}}});
            const auto grasps = graspkp::group(bundle, t, decoderOptions);
            for (std::size_t i = 0; i < grasps.size(); ++i) {
                ordered_json j;
                if (!imageId.empty()) j["image"] = imageId;
                j["rank"] = i;
                j.update(grasp_json(grasps[i].grasp));
                j["class"] = grasps[i].candidate.classIndex;
                j["center_score"] = grasps[i].candidate.centerScore;
                emit(j);
            }
        } else if (*evaluate) {
            for (const auto* p : {&predPath, &truthPath}) {
                if (!fs::exists(*p)) throw DataError("no such file '" + *p + "'");
            }
            const auto preds = graspkp::read_image_grasps_file(predPath);
            const auto truths = graspkp::read_image_grasps_file(truthPath);
            const auto policy = policyName == "topN" ? graspkp::MatchPolicy::topN : graspkp::MatchPolicy::top1;
            const auto report = graspkp::evaluate_dataset(preds, truths, profile.criteria(), policy,
                                                        static_cast<std::size_t>(top));
            ordered_json images = ordered_json::array();
            for (const auto& r : report.perImage) {
                images.push_back({{"image", r.imageId},
                                  {"matched", r.matched},
                                  {"best_jaccard", r.bestJaccard ? ordered_json(*r.bestJaccard) : ordered_json(nullptr)},
                                  {"best_angle_diff",
                                   r.bestAngleDiff ? ordered_json(*r.bestAngleDiff) : ordered_json(nullptr)}});
            }
            emit({{"profile", profile.name},
                  {"policy", policyName},
                  {"total", report.total},
                  {"correct", report.correct},
                  {"accuracy", report.accuracy},
                  {"per_image", std::move(images)}});
        } else if (*score) {
            const auto grasps = graspkp::read_annotations_file(graspsPath);
            graspkp::DepthImage image;
            image.depth = single_plane(graspkp::read_plane_file(depthPath), "depth", depthPath);
            if (surfacePath.empty()) {
                float deepest = 0.0f;
                for (float v : image.depth.data()) deepest = std::max(deepest, v);
                image.surface = graspkp::Grid2D(image.depth.height(), image.depth.width(), deepest);
            } else {
                image.surface = single_plane(graspkp::read_plane_file(surfacePath), "surface", surfacePath);
            }
            image.validate();
            const auto gripper = read_gripper(gripperPath);
            const auto scored = graspkp::score_grasps(grasps, image, gripper);
            for (std::size_t i = 0; i < scored.size(); ++i) {
                ordered_json j{{"rank", i}, {"original_rank", scored[i].originalRank}};
                j.update(grasp_json(scored[i].grasp));
                j["score"] = score_json(scored[i].score);
                j["degenerate"] = scored[i].degenerate;
                emit(j);
            }
        } else if (*simulate) {
            const auto gripper = read_gripper(gripperPath);
            graspkp::Detector detector;
            if (detectorName == "oracle") {
                detector = graspkp::oracle_detector();
            } else if (detectorName == "pipeline") {
                detector = graspkp::pipeline_detector(profile.encoder(), profile.thresholds, seed);
            } else {
                detector = graspkp::constant_detector(graspkp::Grasp{2.0, 2.0, 0.0, 30.0, std::nullopt});
            }
            for (int t = 0; t < trials; ++t) {
                const auto scene = graspkp::make_scene(seed + static_cast<std::uint64_t>(t), objects, {}, gripper);
                emit(trial_json(graspkp::run_bin_picking(scene, detector, gripper)));
            }
        } else if (*filter) {
            const auto annotationFiles = files_by_stem(annotationsDir, ".jsonl");
            const auto maskFiles = files_by_stem(masksDir, ".gktb");
            std::vector<std::string> orphans;
            for (const auto& [id, _] : annotationFiles) {
                if (!maskFiles.contains(id)) orphans.push_back(id);
            }
            for (const auto& [id, _] : maskFiles) {
                if (!annotationFiles.contains(id)) orphans.push_back(id);
            }
            if (!orphans.empty()) {
                std::string list;
                for (const auto& o : orphans) list += (list.empty() ? "" : ", ") + o;
                throw DataError("images without both annotations and mask: " + list);
            }
            ordered_json records = ordered_json::array();
            std::map<std::string, int> counts;
            for (const auto& [id, path] : annotationFiles) {
                const auto grasps = graspkp::read_annotations_file(path.string());
                const auto maskPath = maskFiles.at(id).string();
                const auto planes = graspkp::read_plane_file(maskPath);
                if (planes.groups.size() != 1 || planes.groups.front().planes.size() != 1) {
                    throw DataError("mask '" + maskPath + "' must hold exactly one plane");
                }
                const auto decision = graspkp::classify_annotation(
                    graspkp::coverage_ratio(grasps, planes.groups.front().planes.front(), maskHeight));
                ++counts[graspkp::to_string(decision.verdict)];
                records.push_back(
                    {{"imageId", id}, {"ratio", decision.ratio}, {"decision", graspkp::to_string(decision.verdict)}});
            }
            std::ofstream out(outPath);
            if (!out) throw DataError("cannot write '" + outPath + "'");
            out << records.dump(2) << '\n';
            emit({{"out", outPath},
                  {"images", records.size()},
                  {"keep", counts["keep"]},
                  {"remove", counts["remove"]},
                  {"review", counts["review"]}});
        } else if (*gradcheck) {
            std::mt19937_64 rng(seed);
            bool ok = true;
            ordered_json losses = ordered_json::array();
            for (graspkp::LossKind kind : graspkp::kAllLossKinds) {
                graspkp::GradientReport agg;
                for (int i = 0; i < points; ++i) {
                    const auto r = graspkp::check_random_point(kind, rng, step, tolerance);
                    agg.coordinates += r.coordinates;
                    if (r.maxRelError >= agg.maxRelError) {
                        agg.maxRelError = r.maxRelError;
                        agg.worstCoordinate = r.worstCoordinate;
                    }
                    agg.maxAbsError = std::max(agg.maxAbsError, r.maxAbsError);
                    agg.passed = agg.passed && r.passed;
                }
                ok = ok && agg.passed;
                losses.push_back(gradient_json(kind, agg));
            }
            emit({{"seed", seed}, {"points", points}, {"step", step}, {"passed", ok}, {"losses", std::move(losses)}});
            if (!ok) return kExitData;
        } else if (*selftest) {
            const auto report = graspkp::run_selftest(seed);
            ordered_json grads = ordered_json::array();
            for (const auto& [kind, r] : report.gradients) grads.push_back(gradient_json(kind, r));
            emit({{"seed", seed},
                  {"passed", report.passed},
                  {"roundtrip",
                   {{"grasps", report.roundtrips.grasps},
                    {"recovered", report.roundtrips.recovered},
                    {"worst_iou", report.roundtrips.worstIoU},
                    {"worst_angle", report.roundtrips.worstAngle}}},
                  {"gradients", std::move(grads)}});
            if (!report.passed) return kExitData;
        }
    } catch (const graspkp::PairingError& e) {
        std::cerr << "error: " << e.what() << '\n';
        for (const auto& o : e.orphans()) std::cerr << "  orphan image: " << o << '\n';
        return kExitData;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitData;
    }
    return kExitOk;
}
