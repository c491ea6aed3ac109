#include "sightline/scene_io.hpp"

#include <fstream>
#include <sstream>

#include "sightline/errors.hpp"

namespace sightline {

using nlohmann::json;

namespace {

void reject_unknown_keys(const json& j, std::initializer_list<std::string_view> known,
                         const std::string& where) {
    for (const auto& [key, value] : j.items()) {
        bool ok = false;
        for (const auto& k : known)
            if (key == k) ok = true;
        if (!ok)
            throw Error(ErrorKind::Validation, "unknown key '" + key + "' in " + where);
    }
}

Point3 point_from_json(const json& j) {
    if (!j.is_array() || j.size() != 3)
        throw Error(ErrorKind::Validation, "expected a 3-element coordinate array");
    return {j.at(0).get<double>(), j.at(1).get<double>(), j.at(2).get<double>()};
}

// y-up right-handed -> z-up right-handed.
Point3 y_up_to_z_up(const Point3& p) { return {p.x, -p.z, p.y}; }

std::string join_path(const std::string& base, const std::string& rel) {
    if (base.empty() || rel.empty() || rel.front() == '/') return rel;
    return base.back() == '/' ? base + rel : base + "/" + rel;
}

}  // namespace

Mesh load_obj_mesh(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::Io, "cannot open mesh file '" + path + "'");
    std::vector<Point3> vertices;
    Mesh mesh;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::istringstream ss(line);
        std::string tag;
        if (!(ss >> tag) || tag.empty() || tag[0] == '#') continue;
        if (tag == "v") {
            Point3 p;
            if (!(ss >> p.x >> p.y >> p.z))
                throw Error(ErrorKind::Validation,
                            path + ":" + std::to_string(line_no) + ": malformed vertex");
            vertices.push_back(p);
        } else if (tag == "f") {
            std::vector<std::size_t> idx;
            std::string token;
            while (ss >> token) {
                // "i", "i/j", "i/j/k" forms; only the vertex index matters.
                const long v = std::stol(token.substr(0, token.find('/')));
                const long resolved = v > 0 ? v : static_cast<long>(vertices.size()) + v + 1;
                if (resolved < 1 || static_cast<std::size_t>(resolved) > vertices.size())
                    throw Error(ErrorKind::Validation,
                                path + ":" + std::to_string(line_no) + ": face index out of range");
                idx.push_back(static_cast<std::size_t>(resolved - 1));
            }
            if (idx.size() < 3)
                throw Error(ErrorKind::Validation,
                            path + ":" + std::to_string(line_no) + ": face needs >= 3 vertices");
            for (std::size_t k = 2; k < idx.size(); ++k)
                mesh.push_back({vertices[idx[0]], vertices[idx[k - 1]], vertices[idx[k]]});
        }
        // Normals, texcoords, groups and materials are irrelevant here.
    }
    if (mesh.empty()) throw Error(ErrorKind::EmptyInput, "mesh file '" + path + "' has no faces");
    return mesh;
}

Scene scene_from_json(const json& j, const std::string& base_dir) {
    reject_unknown_keys(j, {"origin", "up", "buildings", "path"}, "scene");
    Scene scene;

    const json& origin = j.at("origin");
    reject_unknown_keys(origin, {"lat", "lon"}, "origin");
    scene.origin.lat = origin.at("lat").get<double>();
    scene.origin.lon = origin.at("lon").get<double>();

    bool y_up = false;
    if (j.contains("up")) {
        const std::string up = j.at("up").get<std::string>();
        if (up == "y")
            y_up = true;
        else if (up != "z")
            throw Error(ErrorKind::Validation, "scene 'up' must be \"y\" or \"z\"");
    }
    auto map_point = [&](const Point3& p) { return y_up ? y_up_to_z_up(p) : p; };

    for (const json& bj : j.at("buildings")) {
        reject_unknown_keys(bj, {"id", "role", "mesh", "cuboids"}, "building");
        Building b;
        b.id = bj.at("id").get<std::string>();
        b.role = role_from_name(bj.at("role").get<std::string>());

        if (bj.contains("mesh")) {
            Mesh raw;
            if (bj.at("mesh").is_string()) {
                raw = load_obj_mesh(join_path(base_dir, bj.at("mesh").get<std::string>()));
            } else {
                for (const json& tj : bj.at("mesh")) {
                    if (!tj.is_array() || tj.size() != 3)
                        throw Error(ErrorKind::Validation,
                                    "mesh triangles must have exactly 3 vertices");
                    raw.push_back({point_from_json(tj.at(0)), point_from_json(tj.at(1)),
                                   point_from_json(tj.at(2))});
                }
            }
            for (const auto& t : raw)
                b.mesh.push_back({map_point(t.a), map_point(t.b), map_point(t.c)});
        }

        if (bj.contains("cuboids")) {
            for (const json& cj : bj.at("cuboids")) {
                reject_unknown_keys(cj, {"center", "half_extents", "yaw"}, "cuboid");
                const Point3 center = map_point(point_from_json(cj.at("center")));
                Point3 half = point_from_json(cj.at("half_extents"));
                if (y_up) half = {half.x, half.z, half.y};
                const double yaw = cj.contains("yaw") ? cj.at("yaw").get<double>() : 0.0;
                b.cuboids.push_back(Cuboid::make(center, half, yaw));
            }
        } else if (!b.mesh.empty()) {
            b.cuboids = abstract_to_cuboids(b.mesh);
        } else {
            throw Error(ErrorKind::Validation,
                        "building '" + b.id + "' needs cuboids or a mesh");
        }
        scene.buildings.push_back(std::move(b));
    }

    if (j.contains("path"))
        for (const json& pj : j.at("path")) scene.path.push_back(map_point(point_from_json(pj)));

    scene.validate();
    return scene;
}

Scene load_scene(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::Io, "cannot open scene file '" + path + "'");
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw Error(ErrorKind::Validation, std::string("scene parse error: ") + e.what());
    }
    const auto slash = path.find_last_of('/');
    return scene_from_json(j, slash == std::string::npos ? "" : path.substr(0, slash));
}

json scene_to_json(const Scene& scene) {
    json j;
    j["origin"] = json{{"lat", scene.origin.lat}, {"lon", scene.origin.lon}};
    json buildings = json::array();
    for (const auto& b : scene.buildings) {
        json bj;
        bj["id"] = b.id;
        bj["role"] = std::string(role_name(b.role));
        json cuboids = json::array();
        for (const auto& c : b.cuboids)
            cuboids.push_back(
                json{{"center", json::array({c.center.x, c.center.y, c.center.z})},
                     {"half_extents",
                      json::array({c.half_extents.x, c.half_extents.y, c.half_extents.z})},
                     {"yaw", c.yaw}});
        bj["cuboids"] = cuboids;
        if (!b.mesh.empty()) {
            json mesh = json::array();
            for (const auto& t : b.mesh)
                mesh.push_back(json::array({json::array({t.a.x, t.a.y, t.a.z}),
                                            json::array({t.b.x, t.b.y, t.b.z}),
                                            json::array({t.c.x, t.c.y, t.c.z})}));
            bj["mesh"] = mesh;
        }
        buildings.push_back(bj);
    }
    j["buildings"] = buildings;
    json path = json::array();
    for (const auto& p : scene.path) path.push_back(json::array({p.x, p.y, p.z}));
    j["path"] = path;
    return j;
}

void save_scene(const Scene& scene, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error(ErrorKind::Io, "cannot write scene file '" + path + "'");
    out << scene_to_json(scene).dump(2) << "\n";
}

}  // namespace sightline
