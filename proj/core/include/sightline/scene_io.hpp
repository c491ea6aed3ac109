#pragma once

#include <string>

#include <json.hpp>

#include "sightline/scene.hpp"

namespace sightline {

/// Scene ingestion. Document schema:
///   {
///     "origin": {"lat": .., "lon": ..},
///     "up": "z" | "y",            // optional, default "z"
///     "buildings": [{
///        "id": "..", "role": "static|candidate|landmark|site",
///        "mesh": [[[x,y,z],[x,y,z],[x,y,z]], ...]   // optional triangle list
///              | "relative/path.obj",               // or OBJ triangle soup
///        "cuboids": [{"center":[..], "half_extents":[..], "yaw": ..}, ...]
///     }, ...],
///     "path": [[x,y,z], ...]
///   }
/// When cuboids are absent and a mesh is present, the cuboid abstraction runs
/// at load. y-up inputs are mapped to the engine's z-up frame by
/// (x, y, z) -> (x, -z, y); yaw values are unchanged.
Scene load_scene(const std::string& path);
Scene scene_from_json(const nlohmann::json& j, const std::string& base_dir = "");

nlohmann::json scene_to_json(const Scene& scene);
void save_scene(const Scene& scene, const std::string& path);

/// Wavefront-style triangle soup: `v x y z` and `f i j k ...` records only;
/// polygonal faces are fan-triangulated.
Mesh load_obj_mesh(const std::string& path);

}  // namespace sightline
