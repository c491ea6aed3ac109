#pragma once

#include <array>
#include <limits>
#include <span>
#include <vector>

#include "sightline/vec.hpp"

namespace sightline {

/// Axis plane onto which 3D geometry is projected (the dropped coordinate
/// is the one missing from the name). Ground is the XY plane; z is up.
enum class Plane { XY, XZ, YZ };

constexpr std::array<Plane, 3> kAllPlanes{Plane::XY, Plane::XZ, Plane::YZ};

/// Oriented box: the LoD1 abstraction unit. Rotation is yaw-only (about +z).
struct Cuboid {
    Point3 center;
    Vec3 half_extents;  // strictly positive
    double yaw = 0.0;   // radians, [0, 2*pi)

    /// Validates invariants and normalizes yaw into [0, 2*pi).
    static Cuboid make(const Point3& center, const Vec3& half_extents, double yaw = 0.0);

    /// The 8 corners in fixed index order: bit0 -> +x, bit1 -> +y, bit2 -> +z
    /// of the local offset before the yaw rotation is applied.
    std::array<Point3, 8> corners() const;

    double volume() const { return 8.0 * half_extents.x * half_extents.y * half_extents.z; }

    /// True iff p is strictly inside (boundary excluded).
    bool strictly_inside(const Point3& p) const;
};

/// Closed simple polygon in CCW orientation, >= 3 vertices.
struct Polygon2 {
    std::vector<Vec2> vertices;

    /// Validates simplicity and CCW orientation; throws DegenerateGeometry /
    /// Validation errors otherwise.
    static Polygon2 make(std::vector<Vec2> vertices);

    double signed_area() const;
    Vec2 vertex_mean() const;
};

struct Triangle {
    Point3 a, b, c;
};
using Mesh = std::vector<Triangle>;

Vec2 project_point(const Point3& p, Plane plane);

/// All 8*n cuboid corners with the dropped coordinate removed, in
/// (cuboid order, corner index) order. Throws EmptyInput on empty input.
std::vector<Vec2> project_cuboids(std::span<const Cuboid> cuboids, Plane plane);

constexpr double kAlphaInfinity = std::numeric_limits<double>::infinity();

/// Boundary polygon of a point set. With alpha = infinity (the default) this
/// is the convex hull; a finite alpha keeps only Delaunay triangles with
/// circumradius <= alpha and returns the outer boundary of that complex.
/// Throws DegenerateGeometry for < 3 distinct points, collinear input, or a
/// finite alpha too small to leave a single closed boundary.
Polygon2 alpha_shape(const std::vector<Vec2>& points, double alpha = kAlphaInfinity);

/// Convex hull (Andrew monotone chain), CCW, collinear boundary points dropped.
Polygon2 convex_hull(std::vector<Vec2> points);

/// Max pairwise vertex distance d_alpha; the natural length scale of a shape.
double max_diagonal(const Polygon2& poly);

/// Euclidean distance from p to the polygon boundary, negative strictly
/// inside, zero on the boundary.
double signed_distance(const Vec2& p, const Polygon2& poly);

/// Distance from p to the closed segment ab.
double segment_distance(const Vec2& p, const Vec2& a, const Vec2& b);

/// True iff p is strictly inside poly (boundary excluded), by edge crossing
/// parity.
bool point_strictly_inside(const Vec2& p, const Polygon2& poly);

/// Decomposes a triangle soup into 1..max_boxes yaw-oriented cuboids whose
/// union contains every mesh vertex. Greedy top-down: fit a principal-axis
/// box, split the box with the largest relative volume reduction while the
/// reduction exceeds 15% and the budget allows. Deterministic.
std::vector<Cuboid> abstract_to_cuboids(const Mesh& mesh, int max_boxes = 5);

}  // namespace sightline
