// SPDX-License-Identifier: Apache-2.0

#include "graspkp/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace graspkp {

double norm(Vec2 v) { return std::hypot(v.x, v.y); }

double fold_angle(double theta) {
    if (!std::isfinite(theta)) {
        throw GeometryError("angle must be finite");
    }
    double t = std::fmod(theta, kPi);
    if (t > kHalfPi) {
        t -= kPi;
    } else if (t <= -kHalfPi) {
        t += kPi;
    }
    return t;
}

double angle_distance(double a, double b) {
    const double d = std::fmod(std::abs(a - b), kPi);
    return std::min(d, kPi - d);
}

bool canonical_before(Vec2 a, Vec2 b) {
    return a.x < b.x || (a.x == b.x && a.y < b.y);
}

KeypointPair KeypointPair::make(Vec2 a, Vec2 b) {
    if (a == b) {
        throw GeometryError("degenerate grasp: keypoints coincide");
    }
    return canonical_before(a, b) ? KeypointPair(a, b) : KeypointPair(b, a);
}

void validate(const Grasp& g) {
    if (!std::isfinite(g.x) || !std::isfinite(g.y)) {
        throw GeometryError("grasp center must be finite");
    }
    if (!(g.theta > -kHalfPi && g.theta <= kHalfPi)) {
        throw GeometryError("grasp theta outside (-pi/2, pi/2]");
    }
    if (!(g.w > 0.0) || !std::isfinite(g.w)) {
        throw GeometryError("grasp width must be positive");
    }
    if (g.h && (!(*g.h > 0.0) || !std::isfinite(*g.h))) {
        throw GeometryError("grasp height must be positive");
    }
}

Grasp pair_to_grasp(const KeypointPair& pair) {
    const Vec2 l = pair.left();
    const Vec2 r = pair.right();
    const Vec2 d = r - l;
    Grasp g;
    g.x = 0.5 * (l.x + r.x);
    g.y = 0.5 * (l.y + r.y);
    g.theta = fold_angle(std::atan2(d.y, d.x));
    g.w = norm(d);
    return g;
}

KeypointPair grasp_to_pair(const Grasp& g) {
    validate(g);
    const Vec2 half{0.5 * g.w * std::cos(g.theta), 0.5 * g.w * std::sin(g.theta)};
    return KeypointPair::make(g.center() - half, g.center() + half);
}

OrientationClasses::OrientationClasses(int count) : count_(count) {
    if (count <= 0) {
        throw std::invalid_argument("orientation class count must be positive");
    }
}

double OrientationClasses::class_to_angle(int c) const {
    if (c < 0 || c >= count_) {
        throw std::out_of_range("orientation class " + std::to_string(c) + " outside [0, " +
                                std::to_string(count_) + ")");
    }
    return kPi / count_ * c - kHalfPi;
}

int OrientationClasses::angle_to_class(double theta) const {
    const double t = fold_angle(theta);
    const double u = (t + kHalfPi) * count_ / kPi;
    const int lo = static_cast<int>(std::floor(u));
    int best = -1;
    double bestDist = 0.0;
    for (int raw : {lo - 1, lo, lo + 1}) {
        const int c = ((raw % count_) + count_) % count_;
        const double d = angle_distance(t, class_to_angle(c));
        if (best < 0 || d < bestDist || (d == bestDist && c < best)) {
            best = c;
            bestDist = d;
        }
    }
    return best;
}

std::array<Vec2, 4> OrientedRect::corners() const {
    const double c = std::cos(theta);
    const double s = std::sin(theta);
    const double hw = 0.5 * width;
    const double hh = 0.5 * height;
    const std::array<Vec2, 4> local = {Vec2{-hw, -hh}, Vec2{hw, -hh}, Vec2{hw, hh}, Vec2{-hw, hh}};
    std::array<Vec2, 4> out;
    for (std::size_t i = 0; i < 4; ++i) {
        out[i] = {center.x + c * local[i].x - s * local[i].y, center.y + s * local[i].x + c * local[i].y};
    }
    return out;
}

OrientedRect to_rect(const Grasp& g, double defaultHeight) {
    return {g.center(), g.w, g.h.value_or(defaultHeight), g.theta};
}

bool contains(const OrientedRect& r, Vec2 p) {
    const Vec2 d = p - r.center;
    const Vec2 axis{std::cos(r.theta), std::sin(r.theta)};
    const Vec2 perp{-axis.y, axis.x};
    return std::abs(dot(d, axis)) <= 0.5 * r.width && std::abs(dot(d, perp)) <= 0.5 * r.height;
}

namespace {

double shoelace(const std::vector<Vec2>& poly) {
    double twice = 0.0;
    for (std::size_t i = 0; i < poly.size(); ++i) {
        twice += cross(poly[i], poly[(i + 1) % poly.size()]);
    }
    return 0.5 * twice;
}

bool same_corner_set(const std::array<Vec2, 4>& a, const std::array<Vec2, 4>& b, double tol) {
    for (const Vec2& p : a) {
        const bool found = std::any_of(b.begin(), b.end(), [&](Vec2 q) { return norm(p - q) <= tol; });
        if (!found) return false;
    }
    return true;
}

}  // namespace

double convex_intersection_area(const std::array<Vec2, 4>& subject, const std::array<Vec2, 4>& clip) {
    // Sutherland-Hodgman against each clip edge; two quads give at most 8 vertices.
    std::vector<Vec2> poly(subject.begin(), subject.end());
    std::vector<Vec2> next;
    next.reserve(12);
    for (std::size_t e = 0; e < 4 && !poly.empty(); ++e) {
        const Vec2 e0 = clip[e];
        const Vec2 edge = clip[(e + 1) % 4] - e0;
        next.clear();
        for (std::size_t i = 0; i < poly.size(); ++i) {
            const Vec2 p = poly[i];
            const Vec2 q = poly[(i + 1) % poly.size()];
            const double dp = cross(edge, p - e0);
            const double dq = cross(edge, q - e0);
            if (dp >= 0.0) next.push_back(p);
            if ((dp >= 0.0) != (dq >= 0.0)) {
                const double t = dp / (dp - dq);
                next.push_back(p + (q - p) * t);
            }
        }
        poly.swap(next);
    }
    if (poly.size() < 3) return 0.0;
    return std::max(0.0, shoelace(poly));
}

double rotated_iou(const OrientedRect& first, const OrientedRect& second) {
    // Fixed argument order keeps the result bit-symmetric.
    const auto key = [](const OrientedRect& r) {
        return std::array<double, 5>{r.center.x, r.center.y, r.width, r.height, r.theta};
    };
    const bool swap = key(second) < key(first);
    const OrientedRect& a = swap ? second : first;
    const OrientedRect& b = swap ? first : second;

    const double reachA = 0.5 * std::hypot(a.width, a.height);
    const double reachB = 0.5 * std::hypot(b.width, b.height);
    if (norm(a.center - b.center) >= reachA + reachB) {
        return 0.0;
    }
    const auto ca = a.corners();
    const auto cb = b.corners();
    const double scale = std::max({reachA, reachB, std::abs(a.center.x), std::abs(a.center.y)});
    if (same_corner_set(ca, cb, 1e-12 * scale)) {
        return 1.0;
    }
    const double inter = convex_intersection_area(ca, cb);
    const double uni = a.area() + b.area() - inter;
    if (uni <= 0.0) return 0.0;
    return std::clamp(inter / uni, 0.0, 1.0);
}

}  // namespace graspkp
