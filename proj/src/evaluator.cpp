// SPDX-License-Identifier: Apache-2.0

#include "graspkp/evaluator.hpp"

#include <algorithm>
#include <chrono>

namespace graspkp {

MatchDetail compare(const Grasp& pred, const Grasp& truth, const MatchCriteria& criteria) {
    Grasp p = pred;
    p.h = criteria.evalHeight;
    MatchDetail d;
    d.angleDiff = angle_distance(pred.theta, truth.theta);
    d.jaccard = rotated_iou(to_rect(p, criteria.evalHeight), to_rect(truth, criteria.evalHeight));
    d.matched = d.angleDiff <= criteria.maxAngleDiff && d.jaccard > criteria.minJaccard;
    return d;
}

bool is_match(const Grasp& pred, const Grasp& truth, const MatchCriteria& criteria) {
    return compare(pred, truth, criteria).matched;
}

EvalReport evaluate_dataset(const ImageGrasps& predictions, const ImageGrasps& truths,
                            const MatchCriteria& criteria, MatchPolicy policy, std::size_t topN) {
    std::vector<std::string> orphans;
    for (const auto& [id, _] : predictions) {
        if (!truths.contains(id)) orphans.push_back("prediction:" + id);
    }
    for (const auto& [id, _] : truths) {
        if (!predictions.contains(id)) orphans.push_back("truth:" + id);
    }
    if (!orphans.empty()) {
        std::string msg = "unpaired image ids:";
        for (const auto& o : orphans) msg += " " + o;
        throw PairingError(std::move(orphans), msg);
    }

    const std::size_t judged = policy == MatchPolicy::top1 ? 1 : topN;
    EvalReport report;
    for (const auto& [id, truthList] : truths) {
        const auto& predList = predictions.at(id);
        ImageResult r;
        r.imageId = id;
        const std::size_t n = std::min(judged, predList.size());
        for (std::size_t i = 0; i < n; ++i) {
            for (const auto& t : truthList) {
                const MatchDetail d = compare(predList[i], t, criteria);
                r.matched = r.matched || d.matched;
                r.bestJaccard = std::max(r.bestJaccard.value_or(0.0), d.jaccard);
                r.bestAngleDiff = std::min(r.bestAngleDiff.value_or(kPi), d.angleDiff);
            }
        }
        ++report.total;
        if (r.matched) ++report.correct;
        report.perImage.push_back(std::move(r));
    }
    report.accuracy = report.total == 0 ? 0.0 : static_cast<double>(report.correct) / report.total;
    return report;
}

double measure_fps(const std::function<void(const HeatmapBundle&)>& pipeline,
                   std::span<const HeatmapBundle> bundles, const FpsOptions& options) {
    if (bundles.empty()) throw std::invalid_argument("measure_fps needs at least one input");
    if (options.warmupRuns < 5 || options.timedRuns < 50 || options.repetitions < 1) {
        throw std::invalid_argument("measure_fps needs >= 5 warm-up and >= 50 timed runs");
    }
    using clock = std::chrono::steady_clock;
    std::size_t next = 0;
    auto run_once = [&] {
        pipeline(bundles[next]);
        next = (next + 1) % bundles.size();
    };
    for (int i = 0; i < options.warmupRuns; ++i) run_once();

    std::vector<double> rates;
    for (int rep = 0; rep < options.repetitions; ++rep) {
        const auto start = clock::now();
        for (int i = 0; i < options.timedRuns; ++i) run_once();
        const double secs = std::chrono::duration<double>(clock::now() - start).count();
        rates.push_back(options.timedRuns / std::max(secs, 1e-9));
    }
    std::sort(rates.begin(), rates.end());
    return rates[rates.size() / 2];
}

}  // namespace graspkp
