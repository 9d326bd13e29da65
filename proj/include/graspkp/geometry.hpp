// SPDX-License-Identifier: Apache-2.0
//
// Grasp representations and planar rectangle geometry.
//
// Conventions: pixel frame with x to the right and y down. Angles are the
// direction of (right - left) measured with atan2(dy, dx) and folded into
// (-pi/2, pi/2], since a parallel gripper is symmetric under a half turn.

#pragma once

#include <array>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>

namespace graspkp {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kHalfPi = std::numbers::pi / 2.0;

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    friend Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
    friend Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
    friend Vec2 operator*(Vec2 a, double s) { return {a.x * s, a.y * s}; }
    friend bool operator==(Vec2, Vec2) = default;
};

inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
double norm(Vec2 v);

class GeometryError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Folds any finite angle into (-pi/2, pi/2].
double fold_angle(double theta);

/// Distance between two undirected orientations, in [0, pi/2].
double angle_distance(double a, double b);

/// Left-middle / right-middle keypoints of a grasp, stored in canonical
/// order (smaller x first, then smaller y).
class KeypointPair {
public:
    /// Orders the two points canonically. Throws GeometryError when they
    /// coincide.
    static KeypointPair make(Vec2 a, Vec2 b);

    Vec2 left() const { return left_; }
    Vec2 right() const { return right_; }

private:
    KeypointPair(Vec2 l, Vec2 r) : left_(l), right_(r) {}
    Vec2 left_;
    Vec2 right_;
};

/// True when `a` precedes `b` in the canonical keypoint order.
bool canonical_before(Vec2 a, Vec2 b);

/// Planar grasp (x, y, theta, w). `h` only matters for rectangle metrics.
struct Grasp {
    double x = 0.0;
    double y = 0.0;
    double theta = 0.0;
    double w = 1.0;
    std::optional<double> h;

    Vec2 center() const { return {x, y}; }
};

/// Throws GeometryError unless theta is in (-pi/2, pi/2], w > 0 and h > 0.
void validate(const Grasp& g);

Grasp pair_to_grasp(const KeypointPair& pair);
KeypointPair grasp_to_pair(const Grasp& g);

class OrientationClasses {
public:
    explicit OrientationClasses(int count);
    int count() const { return count_; }

    /// Representative angle pi*c/|C| - pi/2. Throws std::out_of_range.
    double class_to_angle(int c) const;

    /// Nearest representative, wrapping -pi/2 onto pi/2; ties go to the
    /// smaller index.
    int angle_to_class(double theta) const;

private:
    int count_;
};

struct OrientedRect {
    Vec2 center;
    double width = 1.0;   // along the grasp axis
    double height = 1.0;  // across it
    double theta = 0.0;

    /// Corners with positive signed area in (x, y) coordinates.
    std::array<Vec2, 4> corners() const;
    double area() const { return width * height; }
};

OrientedRect to_rect(const Grasp& g, double defaultHeight);

/// Jaccard overlap of two rotated rectangles via convex clipping.
double rotated_iou(const OrientedRect& a, const OrientedRect& b);

/// Area of the intersection of two convex polygons given with positive
/// orientation. Exposed for the coverage tools and tests.
double convex_intersection_area(const std::array<Vec2, 4>& subject, const std::array<Vec2, 4>& clip);

/// Point-in-rectangle test (boundary counts as inside).
bool contains(const OrientedRect& r, Vec2 p);

}  // namespace graspkp
