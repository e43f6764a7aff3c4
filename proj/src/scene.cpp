#include "dtwin/scene.hpp"

#include "dtwin/error.hpp"
#include "dtwin/hash.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <set>

namespace dtwin {

namespace {

using nlohmann::json;

Vec3 read_point(const json& j) {
    if (!j.is_array() || j.size() != 3) fail(ErrorCode::parse, "expected a 3-element coordinate array");
    return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

json write_point(const Vec3& p) { return json::array({p.x(), p.y(), p.z()}); }

std::string describe(const Surface& s, std::size_t index) {
    std::string out = "surface " + std::to_string(index);
    if (!s.name.empty()) out += " (" + s.name + ")";
    return out;
}

bool collinear(const Vec3& a, const Vec3& b, const Vec3& c) {
    const Vec3 e1 = b - a;
    const Vec3 e2 = c - b;
    const double scale = e1.norm() * e2.norm();
    return scale == 0.0 || e1.cross(e2).norm() <= 1e-9 * scale;
}

}  // namespace

std::optional<Plane> plane_of(const Surface& surface) {
    const auto& v = surface.vertices;
    if (v.size() < 3 || collinear(v[0], v[1], v[2])) return std::nullopt;
    Plane plane;
    plane.normal = (v[1] - v[0]).cross(v[2] - v[1]).normalized();
    plane.offset = plane.normal.dot(v[0]);
    return plane;
}

std::vector<Violation> validate_scene(const Scene& scene) {
    std::vector<Violation> out;

    std::set<std::string> names;
    for (const auto& m : scene.materials) {
        const std::string subject = "material '" + m.name + "'";
        if (m.name.empty()) out.push_back({subject, "empty material name"});
        else if (!names.insert(m.name).second) out.push_back({subject, "duplicate material name"});
        if (!(m.reflection_coeff >= 0.0 && m.reflection_coeff <= 1.0))
            out.push_back({subject, "reflection_coeff " + std::to_string(m.reflection_coeff) + " outside [0, 1]"});
    }

    const Aabb& b = scene.bounds;
    if (!(b.min.array() < b.max.array()).all()) out.push_back({"bounds", "min must be strictly below max"});
    if (scene.floor_height < b.min.z() || scene.floor_height > b.max.z())
        out.push_back({"floor_height", "outside bounds"});
    if (scene.surfaces.empty()) out.push_back({"scene", "no surfaces"});

    for (std::size_t i = 0; i < scene.surfaces.size(); ++i) {
        const Surface& s = scene.surfaces[i];
        const std::string subject = describe(s, i);
        const auto& v = s.vertices;
        if (s.material >= scene.materials.size()) out.push_back({subject, "material index out of range"});
        if (v.size() < 3) {
            out.push_back({subject, "fewer than 3 vertices"});
            continue;
        }
        bool degenerate = false;
        for (std::size_t k = 0; k < v.size(); ++k) {
            if (collinear(v[k], v[(k + 1) % v.size()], v[(k + 2) % v.size()])) degenerate = true;
        }
        if (degenerate) {
            out.push_back({subject, "consecutive vertices are collinear"});
            continue;
        }
        const Plane plane = *plane_of(s);
        bool planar = true;
        for (const auto& p : v) planar = planar && std::abs(plane.signed_distance(p)) <= planarity_tolerance;
        if (!planar) {
            out.push_back({subject, "vertices are not coplanar"});
            continue;
        }
        int sign = 0;
        bool convex = true;
        for (std::size_t k = 0; k < v.size(); ++k) {
            const Vec3& a = v[k];
            const Vec3& c = v[(k + 1) % v.size()];
            const Vec3& d = v[(k + 2) % v.size()];
            const double turn = (c - a).cross(d - c).dot(plane.normal);
            const int sk = turn > 0 ? 1 : -1;
            if (sign == 0) sign = sk;
            else if (sk != sign) convex = false;
        }
        if (!convex) out.push_back({subject, "polygon is not convex"});
        for (const auto& p : v) {
            if (!b.contains(p)) {
                out.push_back({subject, "vertex outside scene bounds"});
                break;
            }
        }
    }
    return out;
}

Scene load_scene(const json& doc) {
    Scene scene;
    std::map<std::string, std::size_t> index;
    try {
        for (const auto& m : doc.at("materials")) {
            Material mat{m.at("name").get<std::string>(), m.at("reflection_coeff").get<double>()};
            index.emplace(mat.name, scene.materials.size());
            scene.materials.push_back(std::move(mat));
        }
        for (const auto& s : doc.at("surfaces")) {
            Surface surface;
            surface.name = s.value("name", std::string{});
            for (const auto& p : s.at("vertices")) surface.vertices.push_back(read_point(p));
            const auto material = s.at("material").get<std::string>();
            const auto it = index.find(material);
            if (it == index.end())
                fail(ErrorCode::unknown_material, "surface references unknown material '" + material + "'");
            surface.material = it->second;
            scene.surfaces.push_back(std::move(surface));
        }
        scene.bounds.min = read_point(doc.at("bounds").at("min"));
        scene.bounds.max = read_point(doc.at("bounds").at("max"));
        scene.floor_height = doc.at("floor_height").get<double>();
    } catch (const json::exception& e) {
        fail(ErrorCode::parse, std::string("malformed scene document: ") + e.what());
    }

    for (std::size_t i = 0; i < scene.surfaces.size(); ++i) {
        const Surface& s = scene.surfaces[i];
        const auto plane = plane_of(s);
        if (!plane) continue;  // reported by validate_scene below
        for (const auto& p : s.vertices) {
            if (std::abs(plane->signed_distance(p)) > planarity_tolerance)
                fail(ErrorCode::non_planar, describe(s, i) + " is not planar");
        }
    }
    const auto violations = validate_scene(scene);
    if (!violations.empty())
        fail(ErrorCode::invalid_scene, violations.front().subject + ": " + violations.front().message);
    return scene;
}

Scene load_scene_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) fail(ErrorCode::io, "cannot open scene file " + path.string());
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::exception& e) {
        fail(ErrorCode::parse, path.string() + ": " + e.what());
    }
    return load_scene(doc);
}

json serialize_scene(const Scene& scene) {
    json doc;
    doc["materials"] = json::array();
    for (const auto& m : scene.materials)
        doc["materials"].push_back({{"name", m.name}, {"reflection_coeff", m.reflection_coeff}});
    doc["surfaces"] = json::array();
    for (const auto& s : scene.surfaces) {
        json vertices = json::array();
        for (const auto& p : s.vertices) vertices.push_back(write_point(p));
        json entry = {{"vertices", vertices}, {"material", scene.materials.at(s.material).name}};
        if (!s.name.empty()) entry["name"] = s.name;
        doc["surfaces"].push_back(std::move(entry));
    }
    doc["bounds"] = {{"min", write_point(scene.bounds.min)}, {"max", write_point(scene.bounds.max)}};
    doc["floor_height"] = scene.floor_height;
    return doc;
}

std::uint64_t scene_hash(const Scene& scene) { return fnv1a(serialize_scene(scene).dump()); }

namespace {

// Upward vertical ray from p crosses the polygon strictly inside, below the ceiling height.
bool overhead(const Surface& s, const Vec3& p, double ceiling) {
    const auto plane = plane_of(s);
    if (!plane || std::abs(plane->normal.z()) < 1e-12) return false;
    const double t = (plane->offset - plane->normal.dot(p)) / plane->normal.z();
    if (t <= 1e-9) return false;
    const Vec3 hit = p + t * Vec3::UnitZ();
    if (hit.z() >= ceiling - 1e-9) return false;
    const auto& v = s.vertices;
    int sign = 0;
    for (std::size_t k = 0; k < v.size(); ++k) {
        const Vec3& a = v[k];
        const Vec3& c = v[(k + 1) % v.size()];
        const double turn = (c - a).cross(hit - a).dot(plane->normal);
        if (std::abs(turn) <= 1e-12) continue;
        const int sk = turn > 0 ? 1 : -1;
        if (sign == 0) sign = sk;
        else if (sk != sign) return false;
    }
    return true;
}

}  // namespace

std::vector<Vec3> floor_grid(const Scene& scene, double spacing, double height,
                             const std::optional<FloorRegion>& region) {
    if (!(spacing > 0.0)) fail(ErrorCode::invalid_argument, "grid spacing must be positive");
    if (height < scene.bounds.min.z() || height > scene.bounds.max.z())
        fail(ErrorCode::out_of_range, "grid height outside scene bounds");

    Vec2 lo = scene.bounds.min.head<2>();
    Vec2 hi = scene.bounds.max.head<2>();
    if (region) {
        lo = lo.cwiseMax(region->min);
        hi = hi.cwiseMin(region->max);
        if ((hi.array() < lo.array()).any()) return {};
    }
    // The small slack keeps e.g. 4.0 / 0.05 from rounding down to 79.
    const auto nx = static_cast<std::size_t>(std::floor((hi.x() - lo.x()) / spacing + 1e-9)) + 1;
    const auto ny = static_cast<std::size_t>(std::floor((hi.y() - lo.y()) / spacing + 1e-9)) + 1;

    std::vector<Vec3> points;
    points.reserve(nx * ny);
    for (std::size_t iy = 0; iy < ny; ++iy) {
        for (std::size_t ix = 0; ix < nx; ++ix) {
            const Vec3 p(lo.x() + static_cast<double>(ix) * spacing, lo.y() + static_cast<double>(iy) * spacing,
                         height);
            bool blocked = false;
            for (const auto& s : scene.surfaces) {
                if (overhead(s, p, scene.bounds.max.z())) {
                    blocked = true;
                    break;
                }
            }
            if (!blocked) points.push_back(p);
        }
    }
    return points;
}

}  // namespace dtwin
