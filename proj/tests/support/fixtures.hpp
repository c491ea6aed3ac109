#pragma once

// Shared scene and mesh fixtures for the test suites.

#include <string>
#include <vector>

#include "sightline/scene.hpp"

namespace sightline::testing {

inline Building box_building(std::string id, Role role, const Point3& center, const Vec3& half,
                             double yaw = 0.0) {
    Building b;
    b.id = std::move(id);
    b.role = role;
    b.cuboids.push_back(Cuboid::make(center, half, yaw));
    return b;
}

/// Axis-aligned box as a 12-triangle mesh.
inline Mesh box_mesh(const Point3& lo, const Point3& hi) {
    const Point3 v000{lo.x, lo.y, lo.z}, v100{hi.x, lo.y, lo.z}, v010{lo.x, hi.y, lo.z},
        v110{hi.x, hi.y, lo.z}, v001{lo.x, lo.y, hi.z}, v101{hi.x, lo.y, hi.z},
        v011{lo.x, hi.y, hi.z}, v111{hi.x, hi.y, hi.z};
    return {
        {v000, v100, v110}, {v000, v110, v010},  // bottom
        {v001, v111, v101}, {v001, v011, v111},  // top
        {v000, v101, v100}, {v000, v001, v101},  // -y
        {v010, v110, v111}, {v010, v111, v011},  // +y
        {v000, v010, v011}, {v000, v011, v001},  // -x
        {v100, v101, v111}, {v100, v111, v110},  // +x
    };
}

/// Thin wall target centered at the origin plus one configurable occluder;
/// the workhorse for visibility ratio checks.
inline Scene wall_scene(const Vec3& target_half, bool with_occluder,
                        const Point3& occluder_center = {}, const Vec3& occluder_half = {1, 1, 1}) {
    Scene scene;
    scene.origin = {1.35, 103.82};
    scene.buildings.push_back(
        box_building("target", Role::Landmark, {0.0, 0.0, 0.0}, target_half));
    if (with_occluder)
        scene.buildings.push_back(
            box_building("occluder", Role::Static, occluder_center, occluder_half));
    return scene;
}

}  // namespace sightline::testing
