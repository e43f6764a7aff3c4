#pragma once
// Scene and scenario fixtures shared by the unit and acceptance tests.

#include "dtwin/scene.hpp"

#include <nlohmann/json.hpp>

#include <array>
#include <filesystem>
#include <fstream>
#include <string>

namespace fixture {

using nlohmann::json;

inline json quad(double x0, double y0, double z0, double x1, double y1, double z1, int fixed_axis) {
    // Axis-aligned rectangle with the coordinate `fixed_axis` held constant.
    switch (fixed_axis) {
        case 0: return json::array({{x0, y0, z0}, {x0, y1, z0}, {x0, y1, z1}, {x0, y0, z1}});
        case 1: return json::array({{x0, y0, z0}, {x1, y0, z0}, {x1, y0, z1}, {x0, y0, z1}});
        default: return json::array({{x0, y0, z0}, {x1, y0, z0}, {x1, y1, z0}, {x0, y1, z0}});
    }
}

/// Empty rectangular room with every wall made of one material.
inline json shoebox(double W, double D, double H, double coeff = 0.5) {
    json surfaces = json::array();
    auto add = [&](const char* name, json vertices) {
        surfaces.push_back({{"name", name}, {"vertices", std::move(vertices)}, {"material", "wall"}});
    };
    add("floor", quad(0, 0, 0, W, D, 0, 2));
    add("ceiling", quad(0, 0, H, W, D, H, 2));
    add("west", quad(0, 0, 0, 0, D, H, 0));
    add("east", quad(W, 0, 0, W, D, H, 0));
    add("south", quad(0, 0, 0, W, 0, H, 1));
    add("north", quad(0, D, 0, W, D, H, 1));
    return {{"materials", json::array({{{"name", "wall"}, {"reflection_coeff", coeff}}})},
            {"surfaces", surfaces},
            {"bounds", {{"min", {0, 0, 0}}, {"max", {W, D, H}}}},
            {"floor_height", 0.0}};
}

/// A single far-away floor tile: paths in the test region are LoS only (the floor lies outside it).
inline json free_space(double extent) {
    return {{"materials", json::array({{{"name", "absorber"}, {"reflection_coeff", 0.0}}})},
            {"surfaces", json::array({{{"name", "tile"},
                                       {"vertices", quad(-extent, -extent, -extent, -extent + 0.1, -extent + 0.1,
                                                         -extent, 2)},
                                       {"material", "absorber"}}})},
            {"bounds", {{"min", {-extent, -extent, -extent}}, {"max", {extent, extent, extent}}}},
            {"floor_height", -extent}};
}

inline std::filesystem::path scratch_dir(const std::string& name) {
    auto dir = std::filesystem::temp_directory_path() / ("dtwin_test_" + name);
    std::filesystem::create_directories(dir);
    return dir;
}

}  // namespace fixture

namespace fixture {

/// Small two-AP scenario in a shoebox room; writes the scene next to the returned scenario document.
inline json small_scenario(const std::filesystem::path& dir, int steps = 10) {
    std::ofstream(dir / "room.scene.json") << shoebox(4, 3, 2.5, 0.5).dump();
    json doc = json::parse(R"({
      "scene": "room.scene.json",
      "ofdm": {"n_subcarriers": 16, "n_symbols": 2, "delta_f_hz": 78125.0, "carrier_hz": 2.4e9},
      "network": {
        "nodes": [
          {"id": "ap1", "role": "tx", "array": {"elements": 4, "spacing_wavelengths": 0.5},
           "initial_pose": {"position": [3.8, 2.8, 1.0]}},
          {"id": "ap2", "role": "tx", "array": {"elements": 1},
           "initial_pose": {"position": [0.1, 1.5, 1.0]}},
          {"id": "robot", "role": "rx", "array": {"elements": 2, "spacing_wavelengths": 0.5},
           "initial_pose": {"position": [2.0, 1.0, 0.3]}}
        ],
        "edges": [["ap1", "robot"], ["ap2", "robot"]],
        "resources": {
          "N": 16, "K": 2, "delta_f_hz": 78125.0,
          "users": [
            {"id": "ap1", "subcarriers": {"from": 1, "to": 8}, "symbols": [1, 2], "power_w": 0.01},
            {"id": "ap2", "subcarriers": {"from": 9, "to": 16}, "symbols": [1, 2], "power_w": 0.01}
          ]
        }
      },
      "raytrace": {"max_order": 1},
      "agents": [
        {"id": "robot", "initial_pose": {"position": [2.0, 1.0, 0.3]},
         "path": {"waypoints": [[2.5, 1.0], [2.5, 1.5]]},
         "initial_control": {"v": 0.1, "w": 0.0}}
      ],
      "noise": {"state_var": 0.0, "obs_var": 0.0, "noise_power_w": 1e-12},
      "sim": {"dt_s": 0.1, "max_steps": 10, "seed": 42},
      "db": {"path": "room.fpdb",
             "build": {"spacing_m": 0.05, "bin_width_s": 5e-9, "num_bins": 64, "height_m": 0.3,
                       "region": {"min": [1.8, 0.8], "max": [2.7, 1.7]}}},
      "output": {"trace_csv": "trace.csv"}
    })");
    doc["sim"]["max_steps"] = steps;
    return doc;
}

inline std::filesystem::path write_json(const std::filesystem::path& path, const json& doc) {
    std::ofstream(path) << doc.dump(2);
    return path;
}

}  // namespace fixture
