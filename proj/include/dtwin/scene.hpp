#pragma once

#include "dtwin/geometry.hpp"

#include <nlohmann/json.hpp>

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace dtwin {

struct Material {
    std::string name;
    double reflection_coeff = 0.0;  // amplitude factor in [0, 1]
};

/// Convex planar polygon. `material` indexes Scene::materials.
struct Surface {
    std::string name;
    std::vector<Vec3> vertices;
    std::size_t material = 0;
};

struct Aabb {
    Vec3 min = Vec3::Zero();
    Vec3 max = Vec3::Zero();

    [[nodiscard]] bool contains(const Vec3& p, double tol = 1e-9) const {
        return (p.array() >= min.array() - tol).all() && (p.array() <= max.array() + tol).all();
    }
};

struct Scene {
    std::vector<Material> materials;
    std::vector<Surface> surfaces;
    Aabb bounds;
    double floor_height = 0.0;

    [[nodiscard]] const Material& material_of(const Surface& s) const { return materials.at(s.material); }
};

/// Plane through the first three vertices of a polygon.
struct Plane {
    Vec3 normal = Vec3::UnitZ();  // unit length
    double offset = 0.0;          // normal . x = offset

    [[nodiscard]] double signed_distance(const Vec3& p) const { return normal.dot(p) - offset; }
};

/// Returns nullopt when the first three vertices are collinear or fewer than three exist.
std::optional<Plane> plane_of(const Surface& surface);

struct Violation {
    std::string subject;  // e.g. "material 'glass'" or "surface 3 (north wall)"
    std::string message;
};

inline constexpr double planarity_tolerance = 1e-9;

Scene load_scene(const nlohmann::json& doc);
Scene load_scene_file(const std::filesystem::path& path);
nlohmann::json serialize_scene(const Scene& scene);

std::vector<Violation> validate_scene(const Scene& scene);

/// Axis-aligned rectangle in the floor plane, used to restrict a grid to a region of interest.
struct FloorRegion {
    Vec2 min = Vec2::Zero();
    Vec2 max = Vec2::Zero();
};

/// Row-major (x fastest) lattice at z = height over the floor footprint of the bounds.
/// Points with any surface overhead (furniture, shelves) other than the ceiling are excluded.
std::vector<Vec3> floor_grid(const Scene& scene, double spacing, double height,
                             const std::optional<FloorRegion>& region = std::nullopt);

/// Stable 64-bit digest of the canonical scene serialization.
std::uint64_t scene_hash(const Scene& scene);

}  // namespace dtwin
