#include "../support.hpp"
#include "dtwin/error.hpp"
#include "dtwin/scene.hpp"

#include <doctest.h>

using namespace dtwin;
using fixture::json;

namespace {

ErrorCode code_of(const json& doc) {
    try {
        (void)load_scene(doc);
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("expected an error");
    return ErrorCode::parse;
}

}  // namespace

TEST_CASE("shoebox document loads with six surfaces") {
    const Scene s = load_scene(fixture::shoebox(4, 3, 2.5));
    CHECK(s.surfaces.size() == 6);
    CHECK(s.materials.size() == 1);
    CHECK(validate_scene(s).empty());
}

TEST_CASE("unknown material is rejected") {
    json doc = fixture::shoebox(4, 3, 2.5);
    doc["surfaces"][2]["material"] = "glass";
    CHECK(code_of(doc) == ErrorCode::unknown_material);
}

TEST_CASE("vertex 1 mm off the plane is non-planar") {
    json doc = fixture::shoebox(4, 3, 2.5);
    // floor: plane z = 0 through the first three vertices; lift the fourth.
    doc["surfaces"][0]["vertices"][3][2] = 0.001;
    CHECK(code_of(doc) == ErrorCode::non_planar);

    Surface s;
    for (const auto& v : doc["surfaces"][0]["vertices"]) s.vertices.emplace_back(v[0], v[1], v[2]);
    const Plane plane = *plane_of(s);
    CHECK(std::abs(plane.signed_distance(s.vertices[3])) == doctest::Approx(0.001).epsilon(1e-12));
}

TEST_CASE("malformed documents are parse errors") {
    CHECK(code_of(json{{"materials", json::array()}}) == ErrorCode::parse);
    json doc = fixture::shoebox(4, 3, 2.5);
    doc["bounds"]["min"] = {0, 0};
    CHECK(code_of(doc) == ErrorCode::parse);
}

TEST_CASE("invalid scene content is reported as invalid_scene") {
    json doc = fixture::shoebox(4, 3, 2.5);
    doc["materials"][0]["reflection_coeff"] = 1.2;
    CHECK(code_of(doc) == ErrorCode::invalid_scene);
}

TEST_CASE("validate_scene names the offending material or surface") {
    Scene s = load_scene(fixture::shoebox(4, 3, 2.5));
    s.materials[0].reflection_coeff = 1.2;
    auto v = validate_scene(s);
    REQUIRE(v.size() == 1);
    CHECK(v[0].subject.find("wall") != std::string::npos);

    s = load_scene(fixture::shoebox(4, 3, 2.5));
    s.surfaces[3].vertices.resize(2);
    v = validate_scene(s);
    REQUIRE(v.size() == 1);
    CHECK(v[0].subject.find("east") != std::string::npos);
}

TEST_CASE("non-convex polygons and out-of-bounds vertices are violations") {
    Scene s = load_scene(fixture::shoebox(4, 3, 2.5));
    s.surfaces[0].vertices = {{0, 0, 0}, {2, 0, 0}, {1, 0.5, 0}, {2, 2, 0}, {0, 2, 0}};
    CHECK(validate_scene(s).size() == 1);
    s = load_scene(fixture::shoebox(4, 3, 2.5));
    s.surfaces[0].vertices[1].x() = 5.0;
    s.surfaces[0].vertices[2].x() = 5.0;
    CHECK(validate_scene(s).size() == 1);
}

TEST_CASE("floor grid counts") {
    const Scene unit = load_scene(fixture::shoebox(1, 1, 2));
    const auto g = floor_grid(unit, 0.5, 0.3);
    REQUIRE(g.size() == 9);
    CHECK(g[1].x() == doctest::Approx(0.5));  // x varies fastest
    CHECK(g[1].y() == doctest::Approx(0.0));
    CHECK(g[3].y() == doctest::Approx(0.5));
    CHECK(g[0].z() == 0.3);

    const Scene room = load_scene(fixture::shoebox(4, 3, 2.5));
    const auto full = floor_grid(room, 0.05, 0.3);
    const auto nx = static_cast<std::size_t>(std::floor(4.0 / 0.05 + 0.5)) + 1;
    const auto ny = static_cast<std::size_t>(std::floor(3.0 / 0.05 + 0.5)) + 1;
    CHECK(full.size() == nx * ny);
    CHECK(full.size() == 4941);

    CHECK_THROWS_AS(floor_grid(room, -0.1, 0.3), Error);
    CHECK_THROWS_AS(floor_grid(room, 0.1, 3.0), Error);
}

TEST_CASE("floor grid respects a region and skips furniture footprints") {
    json doc = fixture::shoebox(4, 3, 2.5);
    doc["surfaces"].push_back({{"name", "table"}, {"vertices", fixture::quad(1, 1, 0.7, 2, 2, 0.7, 2)}, {"material", "wall"}});
    const Scene s = load_scene(doc);
    const auto region = floor_grid(s, 0.5, 0.3, FloorRegion{{0.5, 0.5}, {2.5, 2.5}});
    // 5 x 5 lattice minus the 3 x 3 block at x, y in {1, 1.5, 2} under the table top
    CHECK(region.size() == 25 - 9);
    for (const auto& p : region) CHECK_FALSE((p.x() > 0.99 && p.x() < 2.01 && p.y() > 0.99 && p.y() < 2.01));
}

TEST_CASE("serialization round-trips and the hash tracks content") {
    const Scene s = load_scene(fixture::shoebox(4, 3, 2.5));
    const Scene back = load_scene(serialize_scene(s));
    CHECK(serialize_scene(back) == serialize_scene(s));
    CHECK(scene_hash(back) == scene_hash(s));
    Scene changed = s;
    changed.materials[0].reflection_coeff = 0.4;
    CHECK(scene_hash(changed) != scene_hash(s));
}
