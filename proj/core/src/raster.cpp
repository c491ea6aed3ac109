#include "sightline/raster.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include "sightline/errors.hpp"
#include "sightline/parallel.hpp"

namespace sightline {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct ViewBasis {
    Point3 origin;
    Vec3 right, up, forward;
};

ViewBasis make_basis(const Camera& cam) {
    const Vec3 forward = (cam.look_at - cam.position).normalized();
    Vec3 up_hint = cam.up;
    if (forward.cross(up_hint).norm() < 1e-9) {
        // Forward parallel to the up hint; fall back to a stable axis.
        up_hint = std::abs(forward.y) < 0.9 ? Vec3{0.0, 1.0, 0.0} : Vec3{1.0, 0.0, 0.0};
    }
    const Vec3 right = forward.cross(up_hint).normalized();
    const Vec3 up = right.cross(forward);
    return {cam.position, right, up, forward};
}

struct ViewVertex {
    double x, y, d;  // camera-frame lateral coords and forward depth
};

ViewVertex to_view(const ViewBasis& basis, const Point3& p) {
    const Vec3 q = p - basis.origin;
    return {q.dot(basis.right), q.dot(basis.up), q.dot(basis.forward)};
}

struct ScreenVertex {
    double x, y;       // pixel coordinates, y down
    double depth;      // view-space depth (> 0)
    double depth_key;  // affine-in-screen interpolant, monotone in depth
};

// Clips a view-space triangle against depth >= near. Appends 0-2 triangles.
void clip_near(const std::array<ViewVertex, 3>& tri, double near,
               std::vector<std::array<ViewVertex, 3>>& out) {
    std::array<ViewVertex, 4> poly;
    int n = 0;
    for (int i = 0; i < 3; ++i) {
        const ViewVertex& a = tri[static_cast<std::size_t>(i)];
        const ViewVertex& b = tri[static_cast<std::size_t>((i + 1) % 3)];
        const bool a_in = a.d >= near, b_in = b.d >= near;
        if (a_in) poly[static_cast<std::size_t>(n++)] = a;
        if (a_in != b_in) {
            const double t = (near - a.d) / (b.d - a.d);
            poly[static_cast<std::size_t>(n++)] = {a.x + t * (b.x - a.x), a.y + t * (b.y - a.y),
                                                   near};
        }
    }
    for (int i = 2; i < n; ++i) out.push_back({poly[0], poly[static_cast<std::size_t>(i - 1)],
                                               poly[static_cast<std::size_t>(i)]});
}

struct RasterTriangle {
    std::array<ScreenVertex, 3> v;
    PixelClass cls;
    int min_row, max_row;  // inclusive pixel-row span
};

// D3D-style top-left fill rule in y-down pixel coordinates. Triangles are
// reordered to positive doubled area; an edge owns its pixels when it is
// exactly horizontal going +x (top) or heading -y (left).
bool edge_accepts(double e, double dx, double dy) {
    if (e > 0.0) return true;
    if (e < 0.0) return false;
    return (dy == 0.0 && dx > 0.0) || dy < 0.0;
}

}  // namespace

void Camera::validate() const {
    if (!(position.finite() && look_at.finite()))
        throw Error(ErrorKind::Validation, "camera position/look_at must be finite");
    if ((look_at - position).norm() == 0.0)
        throw Error(ErrorKind::Validation, "camera position must differ from look_at");
    if (projection == Projection::Perspective &&
        !(fov_y > 0.0 && fov_y < std::numbers::pi))
        throw Error(ErrorKind::Validation, "perspective fov_y must be in (0, pi)");
    if (projection == Projection::Orthographic && !(half_height > 0.0))
        throw Error(ErrorKind::Validation, "orthographic half_height must be positive");
}

MaskBuffer::MaskBuffer(int resolution) {
    if (resolution <= 0 || resolution % 10 != 0)
        throw Error(ErrorKind::Validation,
                    "resolution must be positive and divisible by 10 (10x10 count grid)");
    width = height = resolution;
    pixels.assign(static_cast<std::size_t>(resolution) * static_cast<std::size_t>(resolution),
                  PixelClass::Background);
    depth.assign(pixels.size(), kInf);
}

MaskBuffer render_triangles(std::span<const ClassifiedTriangle> triangles, const Camera& camera,
                            int resolution, const RenderOptions& options) {
    camera.validate();
    MaskBuffer buffer(resolution);
    const ViewBasis basis = make_basis(camera);
    const bool perspective = camera.projection == Camera::Projection::Perspective;
    const double w = static_cast<double>(resolution);

    // Near plane: a vanishing fraction of the geometry depth range.
    double max_depth = 0.0;
    for (const auto& ct : triangles)
        for (const Point3* p : {&ct.tri.a, &ct.tri.b, &ct.tri.c})
            max_depth = std::max(max_depth, to_view(basis, *p).d);
    const double near = std::max(1e-12, 1e-7 * max_depth);

    const double proj_scale = perspective ? 1.0 / std::tan(0.5 * camera.fov_y) : 0.0;

    // Project every triangle up front (sequential: order defines tie wins).
    std::vector<RasterTriangle> raster;
    raster.reserve(triangles.size());
    std::vector<std::array<ViewVertex, 3>> clipped;
    for (const auto& ct : triangles) {
        clipped.clear();
        clip_near({to_view(basis, ct.tri.a), to_view(basis, ct.tri.b), to_view(basis, ct.tri.c)},
                  near, clipped);
        for (const auto& tv : clipped) {
            RasterTriangle rt;
            rt.cls = ct.cls;
            for (int i = 0; i < 3; ++i) {
                const ViewVertex& vv = tv[static_cast<std::size_t>(i)];
                double ndc_x, ndc_y;
                if (perspective) {
                    ndc_x = vv.x * proj_scale / vv.d;
                    ndc_y = vv.y * proj_scale / vv.d;
                } else {
                    ndc_x = vv.x / camera.half_height;
                    ndc_y = vv.y / camera.half_height;
                }
                ScreenVertex& sv = rt.v[static_cast<std::size_t>(i)];
                sv.x = (ndc_x + 1.0) * 0.5 * w;
                sv.y = (1.0 - ndc_y) * 0.5 * w;
                sv.depth = vv.d;
                sv.depth_key = perspective ? -1.0 / vv.d : vv.d;
            }
            // Double-sided: force positive doubled area (y-down orientation).
            const double area2 = (rt.v[1].x - rt.v[0].x) * (rt.v[2].y - rt.v[0].y) -
                                 (rt.v[1].y - rt.v[0].y) * (rt.v[2].x - rt.v[0].x);
            if (area2 == 0.0) continue;
            if (area2 < 0.0) std::swap(rt.v[1], rt.v[2]);
            const double min_y = std::min({rt.v[0].y, rt.v[1].y, rt.v[2].y});
            const double max_y = std::max({rt.v[0].y, rt.v[1].y, rt.v[2].y});
            if (max_y < 0.0 || min_y > static_cast<double>(resolution)) continue;
            rt.min_row = static_cast<int>(
                std::clamp(std::floor(min_y - 0.5), 0.0, static_cast<double>(resolution - 1)));
            rt.max_row = static_cast<int>(
                std::clamp(std::ceil(max_y), 0.0, static_cast<double>(resolution - 1)));
            if (rt.min_row > rt.max_row) continue;
            raster.push_back(rt);
        }
    }

    parallel_for(static_cast<std::size_t>(resolution), options.threads,
                 [&](std::size_t row_begin, std::size_t row_end) {
        for (std::size_t row = row_begin; row < row_end; ++row) {
            const int y = static_cast<int>(row);
            const double py = y + 0.5;
            for (const auto& rt : raster) {
                if (y < rt.min_row || y > rt.max_row) continue;
                const auto& v = rt.v;
                const double min_x = std::min({v[0].x, v[1].x, v[2].x});
                const double max_x = std::max({v[0].x, v[1].x, v[2].x});
                if (max_x < 0.0 || min_x > static_cast<double>(resolution)) continue;
                const int x0 = static_cast<int>(std::clamp(
                    std::floor(min_x - 0.5), 0.0, static_cast<double>(resolution - 1)));
                const int x1 = static_cast<int>(std::clamp(
                    std::ceil(max_x), 0.0, static_cast<double>(resolution - 1)));
                const double area2 = (v[1].x - v[0].x) * (v[2].y - v[0].y) -
                                     (v[1].y - v[0].y) * (v[2].x - v[0].x);
                for (int x = x0; x <= x1; ++x) {
                    const double px = x + 0.5;
                    // Edge functions; e[k] pairs with vertex k+2.
                    double e[3];
                    bool inside = true;
                    for (int k = 0; k < 3 && inside; ++k) {
                        const ScreenVertex& a = v[static_cast<std::size_t>(k)];
                        const ScreenVertex& b = v[static_cast<std::size_t>((k + 1) % 3)];
                        const double dx = b.x - a.x, dy = b.y - a.y;
                        e[k] = dx * (py - a.y) - dy * (px - a.x);
                        inside = edge_accepts(e[k], dx, dy);
                    }
                    if (!inside) continue;
                    const double l0 = e[1] / area2;  // weight of v[0]
                    const double l1 = e[2] / area2;
                    const double l2 = e[0] / area2;
                    const double key =
                        l0 * v[0].depth_key + l1 * v[1].depth_key + l2 * v[2].depth_key;
                    const double depth = perspective ? -1.0 / key : key;
                    const std::size_t i = buffer.idx(x, y);
                    if (depth < buffer.depth[i]) {
                        buffer.depth[i] = depth;
                        buffer.pixels[i] = rt.cls;
                    }
                }
            }
        }
    });
    return buffer;
}

namespace {

void append_building(std::vector<ClassifiedTriangle>& out, const Building& b, PixelClass cls) {
    if (!b.mesh.empty()) {
        for (const auto& t : b.mesh) out.push_back({t, cls});
        return;
    }
    // Cuboid faces; corner bit order: bit0 +x, bit1 +y, bit2 +z.
    static constexpr int kFaces[6][4] = {
        {0, 1, 3, 2},  // -z
        {4, 6, 7, 5},  // +z
        {0, 4, 5, 1},  // -y
        {2, 3, 7, 6},  // +y
        {0, 2, 6, 4},  // -x
        {1, 5, 7, 3},  // +x
    };
    for (const auto& box : b.cuboids) {
        const auto c = box.corners();
        for (const auto& f : kFaces) {
            out.push_back({{c[static_cast<std::size_t>(f[0])], c[static_cast<std::size_t>(f[1])],
                            c[static_cast<std::size_t>(f[2])]},
                           cls});
            out.push_back({{c[static_cast<std::size_t>(f[0])], c[static_cast<std::size_t>(f[2])],
                            c[static_cast<std::size_t>(f[3])]},
                           cls});
        }
    }
}

}  // namespace

MaskBuffer render_mask(const Scene& scene, const Camera& camera, std::string_view target_id,
                       RenderMode mode, int resolution, const RenderOptions& options) {
    scene.building(target_id);  // NotFound check
    std::vector<ClassifiedTriangle> tris;
    for (const auto& b : scene.buildings) {
        const bool is_target = b.id == target_id;
        if (mode == RenderMode::TargetOnly && !is_target) continue;
        append_building(tris, b, is_target ? PixelClass::Target : PixelClass::Other);
    }
    return render_triangles(tris, camera, resolution, options);
}

PixelCounts count_pixels(const MaskBuffer& b1, const MaskBuffer& b2, int threads) {
    if (b1.width != b2.width || b1.height != b2.height)
        throw Error(ErrorKind::DimensionMismatch, "count_pixels: buffer resolutions differ");
    PixelCounts counts;
    const int cell = b1.width / 10;
    parallel_for(100, threads, [&](std::size_t begin, std::size_t end) {
        for (std::size_t c = begin; c < end; ++c) {
            const int gy = static_cast<int>(c) / 10, gx = static_cast<int>(c) % 10;
            GridCell& out = counts.per_cell[static_cast<std::size_t>(gy)]
                                           [static_cast<std::size_t>(gx)];
            for (int y = gy * cell; y < (gy + 1) * cell; ++y) {
                for (int x = gx * cell; x < (gx + 1) * cell; ++x) {
                    if (b1.at(x, y) == PixelClass::Target) ++out.target_only;
                    if (b2.at(x, y) == PixelClass::Target) ++out.target_in_scene;
                }
            }
        }
    });
    for (const auto& row : counts.per_cell) {
        for (const auto& c : row) {
            counts.target_only += c.target_only;
            counts.target_in_scene += c.target_in_scene;
        }
    }
    return counts;
}

namespace {

Camera aim_at_target(const Scene& scene, std::string_view target_id, const Point3& viewpoint,
                     const VisibilityOptions& options) {
    const Building& target = scene.building(target_id);
    Camera cam;
    cam.position = viewpoint;
    cam.look_at = target.centroid();
    cam.projection = options.projection;
    cam.fov_y = options.fov_y;
    if (options.projection == Camera::Projection::Orthographic)
        cam.half_height = target.bounding_radius() / options.frame_fill;
    return cam;
}

}  // namespace

double visibility(const Scene& scene, const Point3& viewpoint, std::string_view target_id,
                  int resolution, const VisibilityOptions& options) {
    const Camera cam = aim_at_target(scene, target_id, viewpoint, options);
    const RenderOptions render{options.threads};
    const MaskBuffer alone = render_mask(scene, cam, target_id, RenderMode::TargetOnly,
                                         resolution, render);
    const MaskBuffer full = render_mask(scene, cam, target_id, RenderMode::FullScene,
                                        resolution, render);
    const PixelCounts counts = count_pixels(alone, full, options.threads);
    if (counts.target_only == 0)
        throw Error(ErrorKind::DegenerateView,
                    "target has zero projected area from this viewpoint");
    return static_cast<double>(counts.target_in_scene) /
           static_cast<double>(counts.target_only);
}

Vec3 sun_vector(const SunDirection& sun) {
    const double ce = std::cos(sun.elevation);
    return {std::sin(sun.azimuth) * ce, std::cos(sun.azimuth) * ce, std::sin(sun.elevation)};
}

double shading(const Scene& scene, std::string_view candidate_id, const SunDirection& sun,
               std::span<const std::string> static_ids, int resolution,
               const ShadingOptions& options) {
    if (sun.elevation < 0.0)
        throw Error(ErrorKind::NightTime, "sun below horizon; no shading at night");
    scene.building(candidate_id);
    // The candidate never belongs to its own target set.
    std::vector<std::string> target_ids;
    for (const auto& id : static_ids)
        if (id != candidate_id) target_ids.push_back(id);
    if (target_ids.empty())
        throw Error(ErrorKind::EmptyInput, "shading: static target set is empty");

    // Combined centroid and bounding radius of the static target set.
    Point3 centroid;
    double total_volume = 0.0;
    for (const auto& id : target_ids) {
        const Building& b = scene.building(id);
        for (const auto& box : b.cuboids) {
            centroid = centroid + box.center * box.volume();
            total_volume += box.volume();
        }
    }
    centroid = centroid / total_volume;
    double radius_sq = 0.0;
    for (const auto& id : target_ids)
        for (const auto& box : scene.building(id).cuboids)
            for (const auto& corner : box.corners())
                radius_sq = std::max(radius_sq, (corner - centroid).norm_sq());

    Camera cam;
    const double distance =
        std::max(options.camera_distance_factor * scene.bounding_diagonal(), 1.0);
    cam.position = centroid + sun_vector(sun) * distance;
    cam.look_at = centroid;
    cam.projection = options.projection;
    cam.fov_y = options.fov_y;
    cam.half_height = std::sqrt(radius_sq) / options.frame_fill;
    if (cam.projection == Camera::Projection::Perspective)
        cam.fov_y = 2.0 * std::atan(cam.half_height / (options.frame_fill * distance));

    auto is_static_target = [&](const std::string& id) {
        return std::find(target_ids.begin(), target_ids.end(), id) != target_ids.end();
    };

    const RenderOptions render{options.threads};
    // FBO-1: static targets only, candidate excluded.
    std::vector<ClassifiedTriangle> tris1;
    for (const auto& b : scene.buildings)
        if (is_static_target(b.id)) append_building(tris1, b, PixelClass::Target);
    const MaskBuffer alone = render_triangles(tris1, cam, resolution, render);

    // FBO-2: whole scene; static targets classified Target, the rest Other.
    std::vector<ClassifiedTriangle> tris2;
    for (const auto& b : scene.buildings)
        append_building(tris2, b,
                        is_static_target(b.id) ? PixelClass::Target : PixelClass::Other);
    const MaskBuffer full = render_triangles(tris2, cam, resolution, render);

    const PixelCounts counts = count_pixels(alone, full, options.threads);
    if (counts.target_only == 0)
        throw Error(ErrorKind::DegenerateView,
                    "static targets have zero projected area from the sun view");
    const double ratio = static_cast<double>(counts.target_in_scene) /
                         static_cast<double>(counts.target_only);
    return std::clamp(1.0 - ratio, 0.0, 1.0);
}

double shading(const Scene& scene, std::string_view candidate_id, const SunDirection& sun,
               int resolution, const ShadingOptions& options) {
    return shading(scene, candidate_id, sun, scene.ids_with_role(Role::Static), resolution,
                   options);
}

void write_ppm(const MaskBuffer& buffer, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorKind::Io, "cannot open '" + path + "' for writing");
    out << "P6\n" << buffer.width << " " << buffer.height << "\n255\n";
    for (int y = 0; y < buffer.height; ++y) {
        for (int x = 0; x < buffer.width; ++x) {
            unsigned char rgb[3] = {0, 0, 0};
            switch (buffer.at(x, y)) {
                case PixelClass::Target: rgb[2] = 255; break;
                case PixelClass::Other: rgb[0] = 255; break;
                case PixelClass::Background: break;
            }
            out.write(reinterpret_cast<const char*>(rgb), 3);
        }
    }
    if (!out) throw Error(ErrorKind::Io, "failed writing '" + path + "'");
}

}  // namespace sightline
