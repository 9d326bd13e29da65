// SPDX-License-Identifier: Apache-2.0

#include "graspkp/losses.hpp"

#include <algorithm>
#include <cmath>

namespace graspkp {

LossMap LossMap::zeros(int planes, int height, int width) {
    LossMap m;
    m.planes = planes;
    m.height = height;
    m.width = width;
    m.values.assign(static_cast<std::size_t>(planes) * height * width, 0.0);
    return m;
}

LossMap to_loss_map(std::span<const Grid2D> planes) {
    if (planes.empty()) return {};
    LossMap m = LossMap::zeros(static_cast<int>(planes.size()), planes[0].height(), planes[0].width());
    auto out = m.values.begin();
    for (const auto& p : planes) {
        if (!p.same_shape(planes[0])) {
            throw DimensionError("planes of a loss map must share one shape");
        }
        out = std::copy(p.data().begin(), p.data().end(), out);
    }
    return m;
}

LossResult<LossMap> detection_loss(const LossMap& pred, const LossMap& truth, int count, FocalParams params) {
    if (!pred.same_shape(truth) || pred.values.size() != truth.values.size()) {
        throw DimensionError("detection_loss: prediction and truth shapes differ");
    }
    const double norm = 1.0 / static_cast<double>(std::max(count, 1));
    const double a = params.alpha;
    const double b = params.beta;

    LossResult<LossMap> out{0.0, LossMap::zeros(pred.planes, pred.height, pred.width)};
    double sum = 0.0;
    for (std::size_t i = 0; i < pred.values.size(); ++i) {
        const double p = std::clamp(pred.values[i], kLogClamp, 1.0 - kLogClamp);
        const double y = truth.values[i];
        double term;
        double dterm;
        if (y == 1.0) {
            const double q = 1.0 - p;
            const double lp = std::log(p);
            term = std::pow(q, a) * lp;
            dterm = std::pow(q, a) / p - (a != 0.0 ? a * std::pow(q, a - 1.0) * lp : 0.0);
        } else {
            const double weight = std::pow(1.0 - y, b);
            const double lq = std::log(1.0 - p);
            term = weight * std::pow(p, a) * lq;
            dterm = weight * ((a != 0.0 ? a * std::pow(p, a - 1.0) * lq : 0.0) - std::pow(p, a) / (1.0 - p));
        }
        sum += term;
        out.gradient.values[i] = -norm * dterm;
    }
    out.value = -norm * sum;
    return out;
}

namespace {

double smooth_l1(double d) {
    const double ad = std::abs(d);
    return ad < 1.0 ? 0.5 * d * d : ad - 0.5;
}

double smooth_l1_grad(double d) {
    if (std::abs(d) < 1.0) return d;
    return d > 0.0 ? 1.0 : -1.0;
}

}  // namespace

LossResult<std::vector<Offset2>> offset_loss(std::span<const Offset2> pred, std::span<const Offset2> truth) {
    if (pred.size() != truth.size()) {
        throw DimensionError("offset_loss: prediction and truth lengths differ");
    }
    LossResult<std::vector<Offset2>> out{0.0, std::vector<Offset2>(pred.size())};
    if (pred.empty()) return out;
    const double norm = 1.0 / static_cast<double>(pred.size());
    double sum = 0.0;
    for (std::size_t k = 0; k < pred.size(); ++k) {
        const double dx = pred[k].x - truth[k].x;
        const double dy = pred[k].y - truth[k].y;
        sum += smooth_l1(dx) + smooth_l1(dy);
        out.gradient[k] = {norm * smooth_l1_grad(dx), norm * smooth_l1_grad(dy)};
    }
    out.value = norm * sum;
    return out;
}

Offset2 ground_truth_offset(int i, int j, int ratio) {
    if (i < 0 || j < 0 || ratio < 1) {
        throw std::invalid_argument("ground_truth_offset needs non-negative pixel and ratio >= 1");
    }
    return {static_cast<double>(i % ratio) / ratio, static_cast<double>(j % ratio) / ratio};
}

Offset2 ground_truth_offset(double x, double y, int ratio) {
    if (!(x >= 0.0) || !(y >= 0.0) || ratio < 1) {
        throw std::invalid_argument("ground_truth_offset needs non-negative coordinates and ratio >= 1");
    }
    const double sx = x / ratio;
    const double sy = y / ratio;
    return {sx - std::floor(sx), sy - std::floor(sy)};
}

LossResult<std::vector<EmbeddingPair>> pull_loss(std::span<const EmbeddingPair> pairs) {
    LossResult<std::vector<EmbeddingPair>> out{0.0, std::vector<EmbeddingPair>(pairs.size())};
    if (pairs.empty()) return out;
    const double norm = 1.0 / static_cast<double>(pairs.size());
    double sum = 0.0;
    for (std::size_t k = 0; k < pairs.size(); ++k) {
        const double mean = 0.5 * (pairs[k].left + pairs[k].right);
        const double dl = pairs[k].left - mean;
        const double dr = pairs[k].right - mean;
        sum += dl * dl + dr * dr;
        // d/dl of (l-r)^2/2
        const double g = norm * (pairs[k].left - pairs[k].right);
        out.gradient[k] = {g, -g};
    }
    out.value = norm * sum;
    return out;
}

LossResult<std::vector<EmbeddingPair>> push_loss(std::span<const EmbeddingPair> pairs) {
    const std::size_t n = pairs.size();
    LossResult<std::vector<EmbeddingPair>> out{0.0, std::vector<EmbeddingPair>(n)};
    if (n <= 1) return out;
    std::vector<double> means(n);
    for (std::size_t k = 0; k < n; ++k) means[k] = 0.5 * (pairs[k].left + pairs[k].right);

    const double norm = 1.0 / (static_cast<double>(n) * static_cast<double>(n - 1));
    double sum = 0.0;
    std::vector<double> dmean(n, 0.0);
    for (std::size_t k = 0; k < n; ++k) {
        for (std::size_t j = 0; j < n; ++j) {
            if (j == k) continue;
            const double d = means[k] - means[j];
            const double margin = 1.0 - std::abs(d);
            if (margin > 0.0) {
                sum += margin;
                const double s = d > 0.0 ? 1.0 : (d < 0.0 ? -1.0 : 0.0);
                // The (k, j) and (j, k) terms both move with means[k].
                dmean[k] -= 2.0 * s;
            }
        }
    }
    out.value = norm * sum;
    for (std::size_t k = 0; k < n; ++k) {
        const double g = 0.5 * norm * dmean[k];
        out.gradient[k] = {g, g};
    }
    return out;
}

double total_loss(const LossComponents& parts, const LossWeights& weights) {
    return parts.keypointDetection + parts.centerDetection + weights.pull * parts.pull +
           weights.push * parts.push + weights.offset * parts.offset;
}

GradientReport gradient_check(const ScalarFn& fn, std::span<const double> point,
                              std::span<const double> analytic, double step, double tolerance,
                              double absFloor) {
    if (!(step >= 1e-7 && step <= 1e-3)) {
        throw std::invalid_argument("gradient_check step must lie in [1e-7, 1e-3]");
    }
    if (point.size() != analytic.size()) {
        throw DimensionError("gradient_check: gradient length differs from point length");
    }
    GradientReport report;
    report.coordinates = point.size();
    std::vector<double> x(point.begin(), point.end());
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!std::isfinite(analytic[i])) {
            throw GradientCheckError(i, "non-finite analytic gradient at coordinate " + std::to_string(i));
        }
        const double saved = x[i];
        x[i] = saved + step;
        const double up = fn(x);
        x[i] = saved - step;
        const double down = fn(x);
        x[i] = saved;
        const double numeric = (up - down) / (2.0 * step);
        if (!std::isfinite(numeric)) {
            throw GradientCheckError(i, "non-finite numeric gradient at coordinate " + std::to_string(i));
        }
        const double absErr = std::abs(numeric - analytic[i]);
        const double scale = std::max(std::abs(numeric), std::abs(analytic[i]));
        const double relErr = scale > 0.0 ? absErr / scale : 0.0;
        if (absErr > report.maxAbsError) report.maxAbsError = absErr;
        if (absErr >= absFloor && relErr > report.maxRelError) {
            report.maxRelError = relErr;
            report.worstCoordinate = i;
        }
        if (!(relErr < tolerance || absErr < absFloor)) report.passed = false;
    }
    return report;
}

const char* to_string(LossKind kind) {
    switch (kind) {
        case LossKind::keypoint_detection: return "keypoint_detection";
        case LossKind::center_detection: return "center_detection";
        case LossKind::offset: return "offset";
        case LossKind::pull: return "pull";
        case LossKind::push: return "push";
    }
    return "unknown";
}

namespace {

LossMap random_truth(std::mt19937_64& rng, int planes, int h, int w, int& positives) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    LossMap t = LossMap::zeros(planes, h, w);
    positives = 0;
    for (double& v : t.values) {
        if (u(rng) < 0.1) {
            v = 1.0;
            ++positives;
        } else {
            v = 0.95 * u(rng);
        }
    }
    return t;
}

GradientReport check_detection(std::mt19937_64& rng, int planes, double step, double tol, double floor) {
    constexpr int kSide = 4;
    int positives = 0;
    const LossMap truth = random_truth(rng, planes, kSide, kSide, positives);
    std::uniform_real_distribution<double> u(0.02, 0.98);
    LossMap pred = LossMap::zeros(planes, kSide, kSide);
    for (double& v : pred.values) v = u(rng);
    const auto analytic = detection_loss(pred, truth, positives);
    const ScalarFn fn = [&](std::span<const double> x) {
        LossMap p = pred;
        p.values.assign(x.begin(), x.end());
        return detection_loss(p, truth, positives).value;
    };
    return gradient_check(fn, pred.values, analytic.gradient.values, step, tol, floor);
}

GradientReport check_offset(std::mt19937_64& rng, double step, double tol, double floor) {
    std::uniform_int_distribution<int> count(1, 6);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::uniform_real_distribution<double> delta(-2.5, 2.5);
    const int n = count(rng);
    std::vector<Offset2> truth(static_cast<std::size_t>(n));
    std::vector<double> flat;
    auto draw_delta = [&] {
        double d;
        do {
            d = delta(rng);
        } while (std::abs(std::abs(d) - 1.0) < 10.0 * step);
        return d;
    };
    for (auto& t : truth) {
        t = {unit(rng), unit(rng)};
        flat.push_back(t.x + draw_delta());
        flat.push_back(t.y + draw_delta());
    }
    auto unpack = [](std::span<const double> x) {
        std::vector<Offset2> p(x.size() / 2);
        for (std::size_t k = 0; k < p.size(); ++k) p[k] = {x[2 * k], x[2 * k + 1]};
        return p;
    };
    const auto analytic = offset_loss(unpack(flat), truth);
    std::vector<double> grad;
    for (const auto& g : analytic.gradient) {
        grad.push_back(g.x);
        grad.push_back(g.y);
    }
    const ScalarFn fn = [&](std::span<const double> x) { return offset_loss(unpack(x), truth).value; };
    return gradient_check(fn, flat, grad, step, tol, floor);
}

std::vector<EmbeddingPair> unpack_pairs(std::span<const double> x) {
    std::vector<EmbeddingPair> p(x.size() / 2);
    for (std::size_t k = 0; k < p.size(); ++k) p[k] = {x[2 * k], x[2 * k + 1]};
    return p;
}

std::vector<double> flatten(const std::vector<EmbeddingPair>& pairs) {
    std::vector<double> flat;
    for (const auto& p : pairs) {
        flat.push_back(p.left);
        flat.push_back(p.right);
    }
    return flat;
}

GradientReport check_pull(std::mt19937_64& rng, double step, double tol, double floor) {
    std::uniform_int_distribution<int> count(1, 8);
    std::normal_distribution<double> e(0.0, 2.0);
    std::vector<EmbeddingPair> pairs(static_cast<std::size_t>(count(rng)));
    for (auto& p : pairs) p = {e(rng), e(rng)};
    const auto flat = flatten(pairs);
    const auto grad = flatten(pull_loss(pairs).gradient);
    const ScalarFn fn = [](std::span<const double> x) { return pull_loss(unpack_pairs(x)).value; };
    return gradient_check(fn, flat, grad, step, tol, floor);
}

GradientReport check_push(std::mt19937_64& rng, double step, double tol, double floor) {
    std::uniform_int_distribution<int> count(2, 8);
    std::uniform_real_distribution<double> e(-2.0, 2.0);
    const int n = count(rng);
    // Each embedding moves its pair mean by step/2, so a gap of 10*step from
    // either kink keeps both central-difference probes on one linear piece.
    const double guard = 10.0 * step;
    std::vector<EmbeddingPair> pairs;
    while (static_cast<int>(pairs.size()) < n) {
        const EmbeddingPair cand{e(rng), e(rng)};
        const double m = 0.5 * (cand.left + cand.right);
        const bool clear = std::all_of(pairs.begin(), pairs.end(), [&](const EmbeddingPair& p) {
            const double d = std::abs(m - 0.5 * (p.left + p.right));
            return d > guard && std::abs(d - 1.0) > guard;
        });
        if (clear) pairs.push_back(cand);
    }
    const auto flat = flatten(pairs);
    const auto grad = flatten(push_loss(pairs).gradient);
    const ScalarFn fn = [](std::span<const double> x) { return push_loss(unpack_pairs(x)).value; };
    return gradient_check(fn, flat, grad, step, tol, floor);
}

}  // namespace

GradientReport check_random_point(LossKind kind, std::mt19937_64& rng, double step, double tolerance,
                                  double absFloor) {
    switch (kind) {
        case LossKind::keypoint_detection: return check_detection(rng, 2, step, tolerance, absFloor);
        case LossKind::center_detection: return check_detection(rng, 1, step, tolerance, absFloor);
        case LossKind::offset: return check_offset(rng, step, tolerance, absFloor);
        case LossKind::pull: return check_pull(rng, step, tolerance, absFloor);
        case LossKind::push: return check_push(rng, step, tolerance, absFloor);
    }
    throw std::invalid_argument("unknown loss kind");
}

}  // namespace graspkp
