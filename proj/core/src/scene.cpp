#include "sightline/scene.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "sightline/errors.hpp"

namespace sightline {

std::string_view role_name(Role role) {
    switch (role) {
        case Role::Static: return "static";
        case Role::Candidate: return "candidate";
        case Role::Landmark: return "landmark";
        case Role::Site: return "site";
    }
    return "static";
}

Role role_from_name(std::string_view name) {
    if (name == "static") return Role::Static;
    if (name == "candidate") return Role::Candidate;
    if (name == "landmark") return Role::Landmark;
    if (name == "site") return Role::Site;
    throw Error(ErrorKind::Validation, "unknown building role: " + std::string(name));
}

Point3 Building::centroid() const {
    Point3 sum;
    double total = 0.0;
    for (const auto& c : cuboids) {
        const double v = c.volume();
        sum = sum + c.center * v;
        total += v;
    }
    return total > 0.0 ? sum / total : Point3{};
}

double Building::bounding_radius() const {
    const Point3 c = centroid();
    double r_sq = 0.0;
    for (const auto& box : cuboids)
        for (const auto& corner : box.corners()) r_sq = std::max(r_sq, (corner - c).norm_sq());
    return std::sqrt(r_sq);
}

void Building::validate(double mesh_tolerance_factor) const {
    if (id.empty()) throw Error(ErrorKind::Validation, "building id must be non-empty");
    if (cuboids.empty())
        throw Error(ErrorKind::Validation, "building '" + id + "' has no cuboids");
    if (cuboids.size() > 5)
        throw Error(ErrorKind::Validation, "building '" + id + "' exceeds 5 cuboids");
    if (mesh.empty()) return;

    Point3 lo = mesh[0].a, hi = mesh[0].a;
    auto extend = [&](const Point3& p) {
        lo = {std::min(lo.x, p.x), std::min(lo.y, p.y), std::min(lo.z, p.z)};
        hi = {std::max(hi.x, p.x), std::max(hi.y, p.y), std::max(hi.z, p.z)};
    };
    for (const auto& t : mesh) {
        extend(t.a);
        extend(t.b);
        extend(t.c);
    }
    const double tol = mesh_tolerance_factor * (hi - lo).norm();

    auto covered = [&](const Point3& p) {
        for (const auto& box : cuboids) {
            const double cy = std::cos(box.yaw), sy = std::sin(box.yaw);
            const Vec3 d = p - box.center;
            const double lx = d.x * cy + d.y * sy;
            const double ly = -d.x * sy + d.y * cy;
            if (std::abs(lx) <= box.half_extents.x + tol &&
                std::abs(ly) <= box.half_extents.y + tol &&
                std::abs(d.z) <= box.half_extents.z + tol)
                return true;
        }
        return false;
    };
    for (const auto& t : mesh)
        for (const Point3* p : {&t.a, &t.b, &t.c})
            if (!covered(*p))
                throw Error(ErrorKind::Validation,
                            "building '" + id + "': mesh vertex outside cuboid union");
}

const Building* Scene::find(std::string_view id) const {
    for (const auto& b : buildings)
        if (b.id == id) return &b;
    return nullptr;
}

const Building& Scene::building(std::string_view id) const {
    if (const Building* b = find(id)) return *b;
    throw Error(ErrorKind::NotFound, "no building with id '" + std::string(id) + "'");
}

Building& Scene::building(std::string_view id) {
    for (auto& b : buildings)
        if (b.id == id) return b;
    throw Error(ErrorKind::NotFound, "no building with id '" + std::string(id) + "'");
}

const Building& Scene::landmark() const {
    const Building* found = nullptr;
    for (const auto& b : buildings) {
        if (b.role != Role::Landmark) continue;
        if (found)
            throw Error(ErrorKind::Validation, "scene has more than one landmark building");
        found = &b;
    }
    if (!found) throw Error(ErrorKind::Validation, "scene has no landmark building");
    return *found;
}

std::vector<std::string> Scene::ids_with_role(Role role) const {
    std::vector<std::string> out;
    for (const auto& b : buildings)
        if (b.role == role) out.push_back(b.id);
    return out;
}

void Scene::validate() const {
    std::set<std::string_view> ids;
    for (const auto& b : buildings) {
        b.validate();
        if (!ids.insert(b.id).second)
            throw Error(ErrorKind::Validation, "duplicate building id '" + b.id + "'");
    }
    if (std::abs(origin.lat) > 90.0 || std::abs(origin.lon) > 180.0)
        throw Error(ErrorKind::Validation, "scene origin out of WGS-84 range");
    for (const auto& p : path)
        if (!p.finite()) throw Error(ErrorKind::Validation, "path viewpoint must be finite");
}

double Scene::bounding_diagonal() const {
    bool any = false;
    Point3 lo, hi;
    for (const auto& b : buildings) {
        for (const auto& box : b.cuboids) {
            for (const auto& corner : box.corners()) {
                if (!any) {
                    lo = hi = corner;
                    any = true;
                } else {
                    lo = {std::min(lo.x, corner.x), std::min(lo.y, corner.y),
                          std::min(lo.z, corner.z)};
                    hi = {std::max(hi.x, corner.x), std::max(hi.y, corner.y),
                          std::max(hi.z, corner.z)};
                }
            }
        }
    }
    return any ? (hi - lo).norm() : 0.0;
}

}  // namespace sightline
