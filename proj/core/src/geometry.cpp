#include "sightline/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <optional>
#include <set>

#include "sightline/errors.hpp"

namespace sightline {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double cross3(const Vec2& o, const Vec2& a, const Vec2& b) {
    return (a - o).cross(b - o);
}

}  // namespace

// ---------------------------------------------------------------------------
// Cuboid
// ---------------------------------------------------------------------------

Cuboid Cuboid::make(const Point3& center, const Vec3& half_extents, double yaw) {
    if (!center.finite() || !half_extents.finite() || !std::isfinite(yaw))
        throw Error(ErrorKind::Validation, "cuboid fields must be finite");
    if (half_extents.x <= 0.0 || half_extents.y <= 0.0 || half_extents.z <= 0.0)
        throw Error(ErrorKind::Validation, "cuboid half_extents must be strictly positive");
    Cuboid c;
    c.center = center;
    c.half_extents = half_extents;
    c.yaw = wrap_two_pi(yaw);
    return c;
}

std::array<Point3, 8> Cuboid::corners() const {
    const double cy = std::cos(yaw), sy = std::sin(yaw);
    std::array<Point3, 8> out;
    for (int k = 0; k < 8; ++k) {
        const double lx = (k & 1) ? half_extents.x : -half_extents.x;
        const double ly = (k & 2) ? half_extents.y : -half_extents.y;
        const double lz = (k & 4) ? half_extents.z : -half_extents.z;
        out[static_cast<std::size_t>(k)] = {center.x + lx * cy - ly * sy,
                                            center.y + lx * sy + ly * cy,
                                            center.z + lz};
    }
    return out;
}

bool Cuboid::strictly_inside(const Point3& p) const {
    const double cy = std::cos(yaw), sy = std::sin(yaw);
    const Vec3 d = p - center;
    // Rotate into the local frame (inverse yaw).
    const double lx = d.x * cy + d.y * sy;
    const double ly = -d.x * sy + d.y * cy;
    return std::abs(lx) < half_extents.x && std::abs(ly) < half_extents.y &&
           std::abs(d.z) < half_extents.z;
}

// ---------------------------------------------------------------------------
// Polygon2
// ---------------------------------------------------------------------------

double Polygon2::signed_area() const {
    double a = 0.0;
    const std::size_t n = vertices.size();
    for (std::size_t i = 0; i < n; ++i) a += vertices[i].cross(vertices[(i + 1) % n]);
    return 0.5 * a;
}

Vec2 Polygon2::vertex_mean() const {
    Vec2 m;
    for (const auto& v : vertices) m = m + v;
    return m / static_cast<double>(vertices.size());
}

namespace {

bool segments_properly_intersect(const Vec2& a, const Vec2& b, const Vec2& c, const Vec2& d) {
    const double d1 = cross3(c, d, a);
    const double d2 = cross3(c, d, b);
    const double d3 = cross3(a, b, c);
    const double d4 = cross3(a, b, d);
    return ((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) &&
           ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0));
}

}  // namespace

Polygon2 Polygon2::make(std::vector<Vec2> vertices) {
    if (vertices.size() < 3)
        throw Error(ErrorKind::DegenerateGeometry, "polygon needs at least 3 vertices");
    Polygon2 poly{std::move(vertices)};
    const std::size_t n = poly.vertices.size();
    for (const auto& v : poly.vertices)
        if (!std::isfinite(v.x) || !std::isfinite(v.y))
            throw Error(ErrorKind::Validation, "polygon vertices must be finite");
    if (poly.signed_area() <= 0.0)
        throw Error(ErrorKind::Validation, "polygon must be counter-clockwise with positive area");
    // Non-adjacent edges must not cross.
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            if (j == i + 1 || (i == 0 && j == n - 1)) continue;
            if (segments_properly_intersect(poly.vertices[i], poly.vertices[(i + 1) % n],
                                            poly.vertices[j], poly.vertices[(j + 1) % n]))
                throw Error(ErrorKind::Validation, "polygon is self-intersecting");
        }
    }
    return poly;
}

// ---------------------------------------------------------------------------
// Projection
// ---------------------------------------------------------------------------

Vec2 project_point(const Point3& p, Plane plane) {
    switch (plane) {
        case Plane::XY: return {p.x, p.y};
        case Plane::XZ: return {p.x, p.z};
        case Plane::YZ: return {p.y, p.z};
    }
    return {};
}

std::vector<Vec2> project_cuboids(std::span<const Cuboid> cuboids, Plane plane) {
    if (cuboids.empty())
        throw Error(ErrorKind::EmptyInput, "project_cuboids: no cuboids given");
    std::vector<Vec2> out;
    out.reserve(cuboids.size() * 8);
    for (const auto& c : cuboids)
        for (const auto& corner : c.corners()) out.push_back(project_point(corner, plane));
    return out;
}

// ---------------------------------------------------------------------------
// Convex hull / alpha-shape
// ---------------------------------------------------------------------------

Polygon2 convex_hull(std::vector<Vec2> points) {
    std::sort(points.begin(), points.end(), [](const Vec2& a, const Vec2& b) {
        return a.x < b.x || (a.x == b.x && a.y < b.y);
    });
    points.erase(std::unique(points.begin(), points.end()), points.end());
    if (points.size() < 3)
        throw Error(ErrorKind::DegenerateGeometry, "convex hull needs >= 3 distinct points");

    const std::size_t n = points.size();
    std::vector<Vec2> hull(2 * n);
    std::size_t k = 0;
    for (std::size_t i = 0; i < n; ++i) {  // lower chain
        while (k >= 2 && cross3(hull[k - 2], hull[k - 1], points[i]) <= 0.0) --k;
        hull[k++] = points[i];
    }
    const std::size_t lower = k + 1;
    for (std::size_t i = n - 1; i-- > 0;) {  // upper chain
        while (k >= lower && cross3(hull[k - 2], hull[k - 1], points[i]) <= 0.0) --k;
        hull[k++] = points[i];
    }
    hull.resize(k - 1);
    if (hull.size() < 3)
        throw Error(ErrorKind::DegenerateGeometry, "points are collinear; hull is degenerate");
    return Polygon2{std::move(hull)};
}

namespace {

// Bowyer-Watson Delaunay triangulation; adequate for the corner-set sizes
// this engine sees (tens of points).
struct DelaunayTri {
    std::size_t a, b, c;
    Vec2 circumcenter;
    double circumradius_sq;
};

std::optional<DelaunayTri> make_tri(const std::vector<Vec2>& pts, std::size_t a, std::size_t b,
                                    std::size_t c) {
    const Vec2 A = pts[a], B = pts[b], C = pts[c];
    const double d = 2.0 * (A.x * (B.y - C.y) + B.x * (C.y - A.y) + C.x * (A.y - B.y));
    if (d == 0.0) return std::nullopt;
    const double asq = A.norm_sq(), bsq = B.norm_sq(), csq = C.norm_sq();
    Vec2 cc{(asq * (B.y - C.y) + bsq * (C.y - A.y) + csq * (A.y - B.y)) / d,
            (asq * (C.x - B.x) + bsq * (A.x - C.x) + csq * (B.x - A.x)) / d};
    return DelaunayTri{a, b, c, cc, (cc - A).norm_sq()};
}

std::vector<DelaunayTri> delaunay(const std::vector<Vec2>& pts) {
    // Super-triangle enclosing everything.
    double min_x = pts[0].x, max_x = pts[0].x, min_y = pts[0].y, max_y = pts[0].y;
    for (const auto& p : pts) {
        min_x = std::min(min_x, p.x);
        max_x = std::max(max_x, p.x);
        min_y = std::min(min_y, p.y);
        max_y = std::max(max_y, p.y);
    }
    const double span = std::max({max_x - min_x, max_y - min_y, 1.0});
    const Vec2 mid{0.5 * (min_x + max_x), 0.5 * (min_y + max_y)};
    std::vector<Vec2> all = pts;
    const std::size_t s0 = all.size(), s1 = s0 + 1, s2 = s0 + 2;
    all.push_back({mid.x - 30.0 * span, mid.y - 10.0 * span});
    all.push_back({mid.x + 30.0 * span, mid.y - 10.0 * span});
    all.push_back({mid.x, mid.y + 30.0 * span});

    std::vector<DelaunayTri> tris;
    tris.push_back(*make_tri(all, s0, s1, s2));

    for (std::size_t i = 0; i < pts.size(); ++i) {
        const Vec2 p = all[i];
        std::vector<DelaunayTri> keep;
        std::map<std::pair<std::size_t, std::size_t>, int> edge_count;
        for (const auto& t : tris) {
            if ((p - t.circumcenter).norm_sq() <= t.circumradius_sq) {
                auto add = [&](std::size_t u, std::size_t v) {
                    edge_count[{std::min(u, v), std::max(u, v)}] += 1;
                };
                add(t.a, t.b);
                add(t.b, t.c);
                add(t.c, t.a);
            } else {
                keep.push_back(t);
            }
        }
        for (const auto& [edge, count] : edge_count) {
            if (count != 1) continue;  // interior edge of the cavity
            if (auto t = make_tri(all, edge.first, edge.second, i)) keep.push_back(*t);
        }
        tris = std::move(keep);
    }

    std::vector<DelaunayTri> out;
    for (const auto& t : tris)
        if (t.a < pts.size() && t.b < pts.size() && t.c < pts.size()) out.push_back(t);
    return out;
}

Polygon2 alpha_shape_finite(const std::vector<Vec2>& pts, double alpha) {
    const auto tris = delaunay(pts);
    const double alpha_sq = alpha * alpha;
    std::map<std::pair<std::size_t, std::size_t>, int> edge_use;
    std::size_t kept = 0;
    for (const auto& t : tris) {
        if (t.circumradius_sq > alpha_sq) continue;
        ++kept;
        auto add = [&](std::size_t u, std::size_t v) {
            edge_use[{std::min(u, v), std::max(u, v)}] += 1;
        };
        add(t.a, t.b);
        add(t.b, t.c);
        add(t.c, t.a);
    }
    if (kept == 0)
        throw Error(ErrorKind::DegenerateGeometry,
                    "alpha too small: no triangle survives the radius filter");

    // Boundary = edges used by exactly one kept triangle; stitch into loops.
    std::multimap<std::size_t, std::size_t> adj;
    for (const auto& [edge, count] : edge_use) {
        if (count != 1) continue;
        adj.insert({edge.first, edge.second});
        adj.insert({edge.second, edge.first});
    }
    if (adj.empty())
        throw Error(ErrorKind::DegenerateGeometry, "alpha complex has no boundary");

    std::set<std::pair<std::size_t, std::size_t>> visited;
    std::vector<std::vector<std::size_t>> loops;
    for (const auto& [start, first] : adj) {
        if (visited.count({start, first})) continue;
        std::vector<std::size_t> loop{start};
        std::size_t prev = start, cur = first;
        visited.insert({start, first});
        bool closed = false;
        while (loop.size() <= adj.size()) {
            loop.push_back(cur);
            if (cur == start) {
                closed = true;
                break;
            }
            auto [lo, hi] = adj.equal_range(cur);
            std::size_t next = cur;
            bool found = false;
            for (auto it = lo; it != hi; ++it) {
                if (it->second == prev || visited.count({cur, it->second})) continue;
                next = it->second;
                found = true;
                break;
            }
            if (!found) break;
            visited.insert({cur, next});
            prev = cur;
            cur = next;
        }
        if (closed && loop.size() >= 4) {
            loop.pop_back();  // drop repeated start
            loops.push_back(std::move(loop));
        }
    }
    if (loops.empty())
        throw Error(ErrorKind::DegenerateGeometry, "alpha boundary does not close");

    // Outer boundary = loop with the largest absolute area.
    std::size_t best = 0;
    double best_area = -1.0;
    for (std::size_t i = 0; i < loops.size(); ++i) {
        double a = 0.0;
        const auto& l = loops[i];
        for (std::size_t k = 0; k < l.size(); ++k)
            a += pts[l[k]].cross(pts[l[(k + 1) % l.size()]]);
        if (std::abs(a) > best_area) {
            best_area = std::abs(a);
            best = i;
        }
    }
    std::vector<Vec2> verts;
    verts.reserve(loops[best].size());
    for (std::size_t idx : loops[best]) verts.push_back(pts[idx]);
    Polygon2 poly{std::move(verts)};
    if (poly.signed_area() < 0.0) std::reverse(poly.vertices.begin(), poly.vertices.end());
    if (poly.vertices.size() < 3 || poly.signed_area() <= 0.0)
        throw Error(ErrorKind::DegenerateGeometry, "alpha boundary is degenerate");
    return poly;
}

}  // namespace

Polygon2 alpha_shape(const std::vector<Vec2>& points, double alpha) {
    std::vector<Vec2> distinct = points;
    std::sort(distinct.begin(), distinct.end(), [](const Vec2& a, const Vec2& b) {
        return a.x < b.x || (a.x == b.x && a.y < b.y);
    });
    distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
    if (distinct.size() < 3)
        throw Error(ErrorKind::DegenerateGeometry, "alpha_shape needs >= 3 distinct points");
    if (!(alpha > 0.0))
        throw Error(ErrorKind::Validation, "alpha must be positive");
    if (std::isinf(alpha)) return convex_hull(std::move(distinct));
    return alpha_shape_finite(distinct, alpha);
}

double max_diagonal(const Polygon2& poly) {
    double best = 0.0;
    const auto& v = poly.vertices;
    for (std::size_t i = 0; i < v.size(); ++i)
        for (std::size_t j = i + 1; j < v.size(); ++j)
            best = std::max(best, (v[i] - v[j]).norm_sq());
    return std::sqrt(best);
}

// ---------------------------------------------------------------------------
// Point/polygon distance
// ---------------------------------------------------------------------------

double segment_distance(const Vec2& p, const Vec2& a, const Vec2& b) {
    const Vec2 e = b - a;
    const Vec2 w = p - a;
    const double len_sq = e.norm_sq();
    const double t = len_sq > 0.0 ? std::clamp(w.dot(e) / len_sq, 0.0, 1.0) : 0.0;
    return (w - e * t).norm();
}

bool point_strictly_inside(const Vec2& p, const Polygon2& poly) {
    // Crossing parity; points on the boundary are reported outside.
    const auto& v = poly.vertices;
    const std::size_t n = v.size();
    for (std::size_t i = 0, j = n - 1; i < n; j = i++)
        if (segment_distance(p, v[j], v[i]) == 0.0) return false;
    bool inside = false;
    for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
        if ((v[i].y > p.y) != (v[j].y > p.y)) {
            const double x_int = v[j].x + (v[i].x - v[j].x) * (p.y - v[j].y) / (v[i].y - v[j].y);
            if (p.x < x_int) inside = !inside;
        }
    }
    return inside;
}

double signed_distance(const Vec2& p, const Polygon2& poly) {
    const auto& v = poly.vertices;
    const std::size_t n = v.size();
    double dist = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0, j = n - 1; i < n; j = i++)
        dist = std::min(dist, segment_distance(p, v[j], v[i]));
    if (dist == 0.0) return 0.0;
    return point_strictly_inside(p, poly) ? -dist : dist;
}

// ---------------------------------------------------------------------------
// Mesh -> cuboid abstraction
// ---------------------------------------------------------------------------

namespace {

void sort_dedup(std::vector<Point3>& pts) {
    std::sort(pts.begin(), pts.end(), [](const Point3& a, const Point3& b) {
        if (a.x != b.x) return a.x < b.x;
        if (a.y != b.y) return a.y < b.y;
        return a.z < b.z;
    });
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
}

// Surface samples: vertices plus edge midpoints. Fitting boxes to vertices
// alone lets a split collapse a solid box into two zero-thickness corner
// plates; midpoints keep the cross-sections represented. Triangle centroids
// are left out: a quad's diagonal split would skew the footprint covariance.
std::vector<Point3> mesh_samples(const Mesh& mesh) {
    std::vector<Point3> pts;
    pts.reserve(mesh.size() * 6);
    for (const auto& t : mesh) {
        pts.push_back(t.a);
        pts.push_back(t.b);
        pts.push_back(t.c);
        pts.push_back((t.a + t.b) * 0.5);
        pts.push_back((t.b + t.c) * 0.5);
        pts.push_back((t.c + t.a) * 0.5);
    }
    sort_dedup(pts);
    return pts;
}

// Yaw angle of the dominant principal axis of the xy footprint, canonical
// in [0, pi/2) so an axis-aligned cloud fits with yaw exactly 0.
double principal_yaw(std::span<const Point3> verts) {
    Vec2 mean;
    for (const auto& v : verts) mean = mean + Vec2{v.x, v.y};
    mean = mean / static_cast<double>(verts.size());
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (const auto& v : verts) {
        const double dx = v.x - mean.x, dy = v.y - mean.y;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    if (sxy == 0.0) return 0.0;  // already axis-aligned (or isotropic)
    const double theta = 0.5 * std::atan2(2.0 * sxy, sxx - syy);
    double yaw = std::fmod(theta, std::numbers::pi / 2.0);
    if (yaw < 0.0) yaw += std::numbers::pi / 2.0;
    return yaw;
}

Cuboid fit_box_yawed(std::span<const Point3> verts, double yaw) {
    const double cy = std::cos(yaw), sy = std::sin(yaw);
    double min_u = std::numeric_limits<double>::infinity(), max_u = -min_u;
    double min_v = min_u, max_v = -min_u;
    double min_z = min_u, max_z = -min_u;
    for (const auto& p : verts) {
        const double u = p.x * cy + p.y * sy;
        const double v = -p.x * sy + p.y * cy;
        min_u = std::min(min_u, u);
        max_u = std::max(max_u, u);
        min_v = std::min(min_v, v);
        max_v = std::max(max_v, v);
        min_z = std::min(min_z, p.z);
        max_z = std::max(max_z, p.z);
    }
    const double cu = 0.5 * (min_u + max_u), cv = 0.5 * (min_v + max_v);
    // Degenerate flat extents get a small positive thickness.
    const double diag = std::hypot(max_u - min_u, max_v - min_v, max_z - min_z);
    const double floor_extent = std::max(1e-9, 1e-6 * std::max(diag, 1.0));
    const Vec3 half{std::max(0.5 * (max_u - min_u), floor_extent),
                    std::max(0.5 * (max_v - min_v), floor_extent),
                    std::max(0.5 * (max_z - min_z), floor_extent)};
    const Point3 center{cu * cy - cv * sy, cu * sy + cv * cy, 0.5 * (min_z + max_z)};
    return Cuboid::make(center, half, yaw);
}

// Principal-axis fit, falling back to the axis-aligned box when that is
// tighter (seam faces can skew the footprint covariance).
Cuboid fit_box(std::span<const Point3> verts) {
    const Cuboid aligned = fit_box_yawed(verts, 0.0);
    const double yaw = principal_yaw(verts);
    if (yaw == 0.0) return aligned;
    const Cuboid rotated = fit_box_yawed(verts, yaw);
    return rotated.volume() < aligned.volume() ? rotated : aligned;
}

struct BoxNode {
    Mesh triangles;
    Cuboid box;
};

Cuboid fit_box_to(const Mesh& triangles) { return fit_box(mesh_samples(triangles)); }

// Axis directions considered when splitting: local box axes and world axes.
std::vector<Vec3> split_axes(const Cuboid& box) {
    const double cy = std::cos(box.yaw), sy = std::sin(box.yaw);
    return {{cy, sy, 0.0}, {-sy, cy, 0.0}, {0.0, 0.0, 1.0},
            {1.0, 0.0, 0.0}, {0.0, 1.0, 0.0}};
}

// Candidate cut positions along an axis: extent midpoint, vertex median, and
// the most shared vertex values (welded seams are exactly the coordinates
// many vertices agree on).
std::vector<double> candidate_planes(const Mesh& triangles, const Vec3& axis) {
    std::vector<double> values;
    for (const auto& t : triangles)
        for (const Point3* p : {&t.a, &t.b, &t.c}) values.push_back(p->dot(axis));
    std::sort(values.begin(), values.end());

    std::vector<double> planes{0.5 * (values.front() + values.back()),
                               values[values.size() / 2]};
    std::vector<std::pair<std::size_t, double>> popular;  // (count, value)
    for (std::size_t i = 0; i < values.size();) {
        std::size_t j = i;
        while (j < values.size() && values[j] == values[i]) ++j;
        popular.push_back({j - i, values[i]});
        i = j;
    }
    std::sort(popular.begin(), popular.end(), [](const auto& a, const auto& b) {
        return a.first > b.first || (a.first == b.first && a.second < b.second);
    });
    for (std::size_t k = 0; k < popular.size() && k < 3; ++k)
        planes.push_back(popular[k].second);
    return planes;
}

struct SplitResult {
    double reduction = -std::numeric_limits<double>::infinity();
    Mesh left, right;
    Cuboid left_box, right_box;
};

SplitResult best_split(const BoxNode& node) {
    SplitResult best;
    if (node.triangles.size() < 4) return best;
    for (const Vec3& axis : split_axes(node.box)) {
        for (const double plane : candidate_planes(node.triangles, axis)) {
            Mesh left, right;
            for (const auto& t : node.triangles) {
                const double centroid = (t.a + t.b + t.c).dot(axis) / 3.0;
                (centroid <= plane ? left : right).push_back(t);
            }
            if (left.size() < 2 || right.size() < 2) continue;
            const Cuboid lb = fit_box_to(left), rb = fit_box_to(right);
            const double reduction =
                (node.box.volume() - (lb.volume() + rb.volume())) / node.box.volume();
            if (reduction > best.reduction) {
                best.reduction = reduction;
                best.left = std::move(left);
                best.right = std::move(right);
                best.left_box = lb;
                best.right_box = rb;
            }
        }
    }
    return best;
}

}  // namespace

std::vector<Cuboid> abstract_to_cuboids(const Mesh& mesh, int max_boxes) {
    if (mesh.empty()) throw Error(ErrorKind::EmptyInput, "abstract_to_cuboids: empty mesh");
    if (max_boxes < 1) throw Error(ErrorKind::Validation, "max_boxes must be >= 1");

    std::vector<BoxNode> nodes;
    nodes.push_back({mesh, fit_box_to(mesh)});

    constexpr double kMinReduction = 0.15;
    while (static_cast<int>(nodes.size()) < max_boxes) {
        // Split the node with the largest relative volume reduction.
        std::size_t pick = nodes.size();
        SplitResult pick_split;
        for (std::size_t i = 0; i < nodes.size(); ++i) {
            SplitResult s = best_split(nodes[i]);
            if (s.reduction > kMinReduction &&
                (pick == nodes.size() || s.reduction > pick_split.reduction)) {
                pick = i;
                pick_split = std::move(s);
            }
        }
        if (pick == nodes.size()) break;
        BoxNode left{std::move(pick_split.left), pick_split.left_box};
        BoxNode right{std::move(pick_split.right), pick_split.right_box};
        nodes[pick] = std::move(left);
        nodes.push_back(std::move(right));
    }

    std::vector<Cuboid> out;
    out.reserve(nodes.size());
    for (const auto& n : nodes) out.push_back(n.box);

    // Every mesh vertex must land inside the union (strict precision here;
    // Building::validate applies the documented looser tolerance).
    for (const auto& t : mesh) {
        for (const Point3* p : {&t.a, &t.b, &t.c}) {
            bool covered = false;
            for (const auto& box : out) {
                const double cy = std::cos(box.yaw), sy = std::sin(box.yaw);
                const Vec3 d = *p - box.center;
                const double lx = d.x * cy + d.y * sy;
                const double ly = -d.x * sy + d.y * cy;
                const double tol = 1e-9 * (1.0 + box.half_extents.norm());
                if (std::abs(lx) <= box.half_extents.x + tol &&
                    std::abs(ly) <= box.half_extents.y + tol &&
                    std::abs(d.z) <= box.half_extents.z + tol) {
                    covered = true;
                    break;
                }
            }
            if (!covered)
                throw Error(ErrorKind::Validation,
                            "cuboid abstraction failed to cover a mesh vertex");
        }
    }
    return out;
}

}  // namespace sightline
