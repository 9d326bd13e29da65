#include <doctest.h>

#include <cmath>
#include <random>

#include "graspkp/geometry.hpp"
#include "oracles.hpp"

using namespace graspkp;
using doctest::Approx;

namespace {

oracle::Rect as_oracle(const OrientedRect& r) { return {r.center.x, r.center.y, r.width, r.height, r.theta}; }

OrientedRect random_rect(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> pos(-20.0, 20.0);
    std::uniform_real_distribution<double> size(1.0, 30.0);
    std::uniform_real_distribution<double> ang(-kPi, kPi);
    return {{pos(rng), pos(rng)}, size(rng), size(rng), ang(rng)};
}

}  // namespace

TEST_CASE("pair_to_grasp worked examples") {
    auto g = pair_to_grasp(KeypointPair::make({0, 0}, {4, 0}));
    CHECK(g.x == 2.0);
    CHECK(g.y == 0.0);
    CHECK(g.theta == 0.0);
    CHECK(g.w == 4.0);

    g = pair_to_grasp(KeypointPair::make({0, 0}, {2, 2}));
    CHECK(g.x == Approx(1.0));
    CHECK(g.y == Approx(1.0));
    CHECK(g.theta == Approx(kPi / 4));
    CHECK(g.w == Approx(2.8284271).epsilon(1e-8));

    g = pair_to_grasp(KeypointPair::make({3, 7}, {9, 4}));
    CHECK(g.w == Approx(std::sqrt(45.0)));
    CHECK(g.theta == Approx(-0.46365).epsilon(1e-5));
    CHECK(g.theta == Approx(std::atan2(-3.0, 6.0)));
    CHECK(g.x == Approx(6.0));
    CHECK(g.y == Approx(5.5));
}

TEST_CASE("keypoint pairs are canonical and non-degenerate") {
    const auto p = KeypointPair::make({4, 0}, {0, 0});
    CHECK(p.left() == Vec2{0, 0});
    CHECK(p.right() == Vec2{4, 0});
    const auto v = KeypointPair::make({1, 5}, {1, 2});
    CHECK(v.left() == Vec2{1, 2});
    CHECK(pair_to_grasp(v).theta == Approx(kHalfPi));
    CHECK_THROWS_AS(KeypointPair::make({1, 1}, {1, 1}), GeometryError);
    CHECK(canonical_before({0, 5}, {1, 0}));
    CHECK(canonical_before({1, 0}, {1, 5}));
    CHECK_FALSE(canonical_before({1, 5}, {1, 5}));
}

TEST_CASE("grasp_to_pair worked examples") {
    auto p = grasp_to_pair({2, 0, 0, 4, std::nullopt});
    CHECK(p.left().x == Approx(0.0));
    CHECK(p.left().y == Approx(0.0));
    CHECK(p.right().x == Approx(4.0));
    p = grasp_to_pair({1, 1, kPi / 4, 2 * std::sqrt(2.0), std::nullopt});
    CHECK(p.left().x == Approx(0.0));
    CHECK(p.left().y == Approx(0.0));
    CHECK(p.right().x == Approx(2.0));
    CHECK(p.right().y == Approx(2.0));
}

TEST_CASE("grasp -> pair -> grasp is the identity") {
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> pos(0.0, 500.0);
    std::uniform_real_distribution<double> ang(-kHalfPi, kHalfPi);
    std::uniform_real_distribution<double> width(0.5, 100.0);
    for (int i = 0; i < 500; ++i) {
        Grasp g{pos(rng), pos(rng), fold_angle(ang(rng)), width(rng), std::nullopt};
        const auto p = grasp_to_pair(g);
        CHECK(canonical_before(p.left(), p.right()));
        const Grasp back = pair_to_grasp(p);
        CHECK(std::abs(back.x - g.x) < 1e-9);
        CHECK(std::abs(back.y - g.y) < 1e-9);
        CHECK(angle_distance(back.theta, g.theta) < 1e-9);
        CHECK(std::abs(back.w - g.w) < 1e-9);
    }
}

TEST_CASE("half-open angle range") {
    CHECK(fold_angle(kHalfPi) == Approx(kHalfPi));
    CHECK(fold_angle(-kHalfPi) == Approx(kHalfPi));
    CHECK(fold_angle(kPi) == Approx(0.0).epsilon(1e-12));
    CHECK(fold_angle(3.0) == Approx(3.0 - kPi));
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> ang(-20.0, 20.0);
    for (int i = 0; i < 1000; ++i) {
        const double t = fold_angle(ang(rng));
        CHECK(t > -kHalfPi);
        CHECK(t <= kHalfPi);
    }
    CHECK(angle_distance(-kHalfPi + 0.01, kHalfPi - 0.01) == Approx(0.02));
    Grasp bad{0, 0, -kHalfPi, 1, std::nullopt};
    CHECK_THROWS_AS(validate(bad), GeometryError);
    CHECK_THROWS_AS(validate(Grasp{0, 0, 0, 0, std::nullopt}), GeometryError);
    CHECK_THROWS_AS(validate(Grasp{0, 0, 0, 1, -1.0}), GeometryError);
}

TEST_CASE("orientation class examples") {
    const OrientationClasses c18(18);
    CHECK(c18.angle_to_class(0.0) == 9);
    CHECK(c18.angle_to_class(-kHalfPi) == 0);
    CHECK(c18.angle_to_class(kHalfPi) == 0);
    CHECK(c18.angle_to_class(0.52) == 12);
    CHECK(c18.class_to_angle(9) == 0.0);
    CHECK(c18.class_to_angle(0) == -kHalfPi);
    CHECK(c18.class_to_angle(11) == Approx(0.349066).epsilon(1e-6));
    CHECK_THROWS_AS(c18.class_to_angle(18), std::out_of_range);
    CHECK_THROWS_AS(c18.class_to_angle(-1), std::out_of_range);
    CHECK_THROWS_AS(OrientationClasses(0), std::invalid_argument);
}

TEST_CASE("class assignment agrees with exhaustive search") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> ang(-4.0, 4.0);
    for (int count : {18, 36}) {
        const OrientationClasses classes(count);
        for (int c = 0; c < count; ++c) CHECK(classes.angle_to_class(classes.class_to_angle(c)) == c);
        for (int i = 0; i < 2000; ++i) {
            const double t = ang(rng);
            const int c = classes.angle_to_class(t);
            CHECK(c == oracle::nearest_class(fold_angle(t), count));
            CHECK(oracle::wrapped(classes.class_to_angle(c), t) <= kPi / (2 * count) + 1e-12);
        }
        // Exact midpoints between neighbours go to the smaller index.
        const double mid = classes.class_to_angle(3) + kPi / (2 * count);
        CHECK(classes.angle_to_class(mid) == 3);
    }
}

TEST_CASE("rectangle corners and area") {
    const OrientedRect r{{5, 5}, 4, 2, 0.3};
    const auto cs = r.corners();
    double twiceArea = 0.0;
    for (int i = 0; i < 4; ++i) twiceArea += cross(cs[i], cs[(i + 1) % 4]);
    CHECK(twiceArea > 0.0);  // positive orientation
    CHECK(0.5 * twiceArea == Approx(r.area()).epsilon(1e-9));
    CHECK(r.area() == 8.0);
    CHECK(to_rect(Grasp{1, 2, 0.1, 30, std::nullopt}, 20).height == 20);
    CHECK(to_rect(Grasp{1, 2, 0.1, 30, 12.0}, 20).height == 12);
}

TEST_CASE("rotated IoU examples") {
    const OrientedRect a{{3, 4}, 10, 5, 0.7};
    CHECK(rotated_iou(a, a) == 1.0);
    OrientedRect flipped = a;
    flipped.theta += kPi;
    CHECK(rotated_iou(a, flipped) == Approx(1.0).epsilon(1e-12));
    const OrientedRect far{{40, 4}, 10, 5, -0.2};
    CHECK(rotated_iou(a, far) == 0.0);

    const OrientedRect s1{{0, 0}, 1, 1, 0};
    const OrientedRect s2{{0.5, 0}, 1, 1, 0};
    CHECK(rotated_iou(s1, s2) == Approx(1.0 / 3.0).epsilon(1e-12));
    CHECK(std::abs(oracle::raster_iou(as_oracle(s1), as_oracle(s2)) - 1.0 / 3.0) < 0.01);

    const OrientedRect big{{0, 0}, 4, 2, 0};
    const OrientedRect half{{-1, 0}, 2, 2, 0};
    CHECK(rotated_iou(big, half) == Approx(0.5));
}

TEST_CASE("rotated IoU properties") {
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> ang(-kPi, kPi);
    std::uniform_real_distribution<double> shift(-50.0, 50.0);
    for (int i = 0; i < 300; ++i) {
        const auto a = random_rect(rng);
        const auto b = random_rect(rng);
        const double iou = rotated_iou(a, b);
        CHECK(iou >= 0.0);
        CHECK(iou <= 1.0);
        CHECK(rotated_iou(b, a) == iou);

        const double phi = ang(rng);
        const Vec2 t{shift(rng), shift(rng)};
        auto move = [&](OrientedRect r) {
            const double c = std::cos(phi), s = std::sin(phi);
            r.center = Vec2{c * r.center.x - s * r.center.y, s * r.center.x + c * r.center.y} + t;
            r.theta += phi;
            return r;
        };
        CHECK(rotated_iou(move(a), move(b)) == Approx(iou).epsilon(1e-6));
    }
}

TEST_CASE("rotated IoU matches the rasterization oracle") {
    std::mt19937_64 rng(5);
    for (int i = 0; i < 20; ++i) {
        const auto a = random_rect(rng);
        auto b = random_rect(rng);
        b.center = a.center + Vec2{b.center.x * 0.3, b.center.y * 0.3};
        CHECK(std::abs(rotated_iou(a, b) - oracle::raster_iou(as_oracle(a), as_oracle(b), 600)) < 0.01);
    }
}

TEST_CASE("point containment") {
    const OrientedRect r{{0, 0}, 4, 2, kHalfPi};
    CHECK(contains(r, {0, 1.9}));
    CHECK_FALSE(contains(r, {1.5, 0}));
    CHECK(contains(r, {0.9, -1.9}));
}
