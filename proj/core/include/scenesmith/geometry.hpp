#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace scenesmith {

// World axes: +x front, -x back, +y left, -y right, +z up.  Units are meters.
// Yaw is counterclockwise about +z; yaw 0 faces +x.

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
    Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
    Vec2 operator*(double s) const { return {x * s, y * s}; }
    double dot(Vec2 o) const { return x * o.x + y * o.y; }
    double cross(Vec2 o) const { return x * o.y - y * o.x; }
    double norm() const { return std::hypot(x, y); }
};

struct Vec3 {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
    Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
    Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
    Vec2 xy() const { return {x, y}; }
};

inline Vec2 rotate(Vec2 p, double yaw) {
    const double c = std::cos(yaw), s = std::sin(yaw);
    return {c * p.x - s * p.y, s * p.x + c * p.y};
}

struct Pose {
    Vec3 position;   // world location of the asset origin (footprint centroid at base height)
    double yaw = 0.0;
};

struct Aabb2 {
    double min_x = 0.0, max_x = 0.0;
    double min_y = 0.0, max_y = 0.0;

    double width_x() const { return max_x - min_x; }
    double width_y() const { return max_y - min_y; }
    Vec2 center() const { return {(min_x + max_x) * 0.5, (min_y + max_y) * 0.5}; }
};

struct Aabb3 {
    Vec3 min;
    Vec3 max;

    Vec3 center() const { return {(min.x + max.x) * 0.5, (min.y + max.y) * 0.5, (min.z + max.z) * 0.5}; }
    Aabb2 xy() const { return {min.x, max.x, min.y, max.y}; }
};

class DegenerateInput : public std::runtime_error {
  public:
    explicit DegenerateInput(const std::string& what) : std::runtime_error(what) {}
};

// Convex polygon, counterclockwise, no repeated vertices.
struct Footprint {
    std::vector<Vec2> hull;

    double area() const;
    Aabb2 aabb() const;
    Vec2 centroid() const;
    bool empty() const { return hull.empty(); }
};

// Smallest convex polygon containing the points (Andrew monotone chain).
// Throws DegenerateInput when all points are collinear or fewer than 3 distinct.
Footprint convex_hull_2d(std::span<const Vec2> points);

// Signed area of a simple polygon; positive when counterclockwise.
double signed_area(std::span<const Vec2> poly);

// Closed containment: boundary points count as inside (tolerance eps, absolute).
bool point_in_convex(const Footprint& fp, Vec2 p, double eps = 1e-9);

// Distance from p to the convex set (0 when inside).  Works for degenerate
// point/segment "hulls" passed as raw vertex lists.
double distance_to_convex(std::span<const Vec2> hull, Vec2 p);

// Intersection of two convex polygons (Sutherland-Hodgman).  Result may be
// empty or degenerate (area 0).
std::vector<Vec2> clip_convex(std::span<const Vec2> subject, std::span<const Vec2> clip);

// Area of the intersection of two convex polygons.
double overlap_area(const Footprint& a, const Footprint& b);

// How far the footprint pokes outside an axis-aligned rectangle:
// max over vertices of the Euclidean distance from the vertex to the rect
// (0 when fully inside).
double boundary_violation(const Footprint& fp, const Aabb2& rect);

// Convex hull of points that may be degenerate: returns the input reduced to
// distinct extreme points (1 = point, 2 = segment, >=3 = CCW polygon).
std::vector<Vec2> hull_or_degenerate(std::span<const Vec2> points);

}  // namespace scenesmith
