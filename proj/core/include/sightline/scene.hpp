#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "sightline/geometry.hpp"

namespace sightline {

/// Building role in the analysis: fixed surroundings, a proposed design, the
/// visibility target, or the development parcel.
enum class Role { Static, Candidate, Landmark, Site };

std::string_view role_name(Role role);
Role role_from_name(std::string_view name);

struct Building {
    std::string id;
    Role role = Role::Static;
    Mesh mesh;                    // optional; empty when only cuboids are given
    std::vector<Cuboid> cuboids;  // 1..5, the LoD1 abstraction

    /// Volume-weighted mean of cuboid centers.
    Point3 centroid() const;

    /// Max distance from centroid() to any cuboid corner.
    double bounding_radius() const;

    /// Checks cuboid count and, when a mesh is present, that every mesh
    /// vertex lies in the cuboid union inflated by
    /// mesh_tolerance_factor * mesh bounding diagonal (default 1%).
    void validate(double mesh_tolerance_factor = 0.01) const;
};

struct GeoOrigin {
    double lat = 0.0;  // degrees, WGS-84
    double lon = 0.0;
};

struct Scene {
    std::vector<Building> buildings;
    GeoOrigin origin;
    std::vector<Point3> path;  // observation viewpoints, scene meters

    const Building* find(std::string_view id) const;
    /// Throws NotFound when absent.
    const Building& building(std::string_view id) const;
    Building& building(std::string_view id);

    /// The unique landmark building; throws Validation unless exactly one.
    const Building& landmark() const;

    /// Ids of all buildings with the given role, in scene order.
    std::vector<std::string> ids_with_role(Role role) const;

    /// Unique ids, per-building invariants, origin ranges.
    void validate() const;

    /// Diagonal of the axis-aligned bounding box of all cuboid corners.
    double bounding_diagonal() const;
};

}  // namespace sightline
