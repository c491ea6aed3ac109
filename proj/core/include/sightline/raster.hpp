#pragma once

#include <array>
#include <cstdint>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "sightline/scene.hpp"

namespace sightline {

enum class PixelClass : std::uint8_t { Background, Target, Other };

struct Camera {
    enum class Projection { Perspective, Orthographic };

    Point3 position;
    Point3 look_at;
    Vec3 up{0.0, 0.0, 1.0};
    Projection projection = Projection::Perspective;
    double fov_y = std::numbers::pi / 3.0;  // perspective vertical field of view
    double half_height = 1.0;               // orthographic frame half extent

    void validate() const;
};

/// Square offscreen classification + depth buffer (the FBO stand-in).
/// Resolution must be divisible by 10 so the counting grid partitions exactly.
struct MaskBuffer {
    int width = 0;
    int height = 0;
    std::vector<PixelClass> pixels;
    std::vector<double> depth;  // view-space depth; +inf for background

    explicit MaskBuffer(int resolution);

    PixelClass at(int x, int y) const { return pixels[idx(x, y)]; }
    double depth_at(int x, int y) const { return depth[idx(x, y)]; }
    std::size_t idx(int x, int y) const {
        return static_cast<std::size_t>(y) * static_cast<std::size_t>(width) +
               static_cast<std::size_t>(x);
    }
};

struct GridCell {
    long long target_only = 0;      // from buffer 1
    long long target_in_scene = 0;  // from buffer 2
};

struct PixelCounts {
    long long target_only = 0;      // PC1
    long long target_in_scene = 0;  // PC2
    std::array<std::array<GridCell, 10>, 10> per_cell{};
};

enum class RenderMode { TargetOnly, FullScene };

struct RenderOptions {
    int threads = 0;  // 0 = hardware concurrency
};

struct ClassifiedTriangle {
    Triangle tri;
    PixelClass cls = PixelClass::Other;
};

/// Z-buffered flat rasterization of explicit triangles. Deterministic for
/// any thread count: rows are independent and triangles are visited in input
/// order, nearer-strictly wins, ties keep the earlier triangle.
MaskBuffer render_triangles(std::span<const ClassifiedTriangle> triangles, const Camera& camera,
                            int resolution, const RenderOptions& options = {});

/// Renders building geometry (mesh triangles when present, cuboid faces
/// otherwise). TargetOnly skips every other building.
MaskBuffer render_mask(const Scene& scene, const Camera& camera, std::string_view target_id,
                       RenderMode mode, int resolution, const RenderOptions& options = {});

/// Exact integer target-pixel counts of both buffers plus the 10x10 grid
/// decomposition; cells are countable independently and sum to the totals.
PixelCounts count_pixels(const MaskBuffer& b1, const MaskBuffer& b2, int threads = 0);

struct VisibilityOptions {
    Camera::Projection projection = Camera::Projection::Perspective;
    double fov_y = std::numbers::pi / 3.0;
    /// Orthographic frame: target bounding sphere fills this frame fraction.
    double frame_fill = 0.8;
    int threads = 0;
};

/// PC2/PC1 for the target seen from the viewpoint (camera aimed at the
/// target centroid). Throws DegenerateView when PC1 = 0.
double visibility(const Scene& scene, const Point3& viewpoint, std::string_view target_id,
                  int resolution, const VisibilityOptions& options = {});

/// Sun direction given as sky position; elevation <= 0 is night.
struct SunDirection {
    double azimuth = 0.0;    // radians from north (+y), clockwise (towards +x)
    double elevation = 0.0;  // radians above horizon
};

/// Unit vector pointing from the scene towards the sun (x east, y north, z up).
Vec3 sun_vector(const SunDirection& sun);

struct ShadingOptions {
    Camera::Projection projection = Camera::Projection::Orthographic;
    double frame_fill = 0.8;
    double fov_y = std::numbers::pi / 3.0;
    /// Sun camera distance as a multiple of the scene bounding diagonal.
    double camera_distance_factor = 10.0;
    int threads = 0;
};

/// 1 - PC2/PC1 from the sun's view: PC1 over the static targets alone, PC2
/// with the whole scene (candidate included) present. Throws NightTime when
/// the sun is below the horizon and DegenerateView when PC1 = 0.
double shading(const Scene& scene, std::string_view candidate_id, const SunDirection& sun,
               std::span<const std::string> static_ids, int resolution,
               const ShadingOptions& options = {});

/// Convenience: static target set = all static-role buildings.
double shading(const Scene& scene, std::string_view candidate_id, const SunDirection& sun,
               int resolution, const ShadingOptions& options = {});

/// Debug dump: target = blue, other = red, background = black (binary PPM).
void write_ppm(const MaskBuffer& buffer, const std::string& path);

}  // namespace sightline
