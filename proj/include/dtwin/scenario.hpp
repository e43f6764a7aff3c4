#pragma once

#include "dtwin/agent.hpp"
#include "dtwin/channel.hpp"
#include "dtwin/network.hpp"
#include "dtwin/raytrace.hpp"
#include "dtwin/scene.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace dtwin {

struct AgentConfig {
    std::string id;  // must name a receiving node of the network
    Pose initial_pose;
    std::vector<Vec2> path;
    ControllerConfig controller;
    Control initial_control;
    Vec2 map_offset = Vec2::Zero();  // twin pose minus ground truth at start, meters
};

struct NoiseConfig {
    double state_var = 0.0;     // per pose component (x, y, yaw)
    double obs_var = 0.0;       // additive on every observation component
    double noise_power_w = 1e-12;  // receiver noise per resource element
    std::optional<double> fingerprint_snr_db;  // per-bin perturbation of measured fingerprints
};

struct SimConfig {
    double dt = 0.1;
    std::int64_t max_steps = 100;
    std::uint64_t seed = 0;
};

struct DbConfig {
    std::optional<std::filesystem::path> path;
    bool buildable = false;
    double spacing = 0.05;
    std::optional<double> bin_width;  // defaults to 1 / (N delta_f)
    std::size_t num_bins = 64;
    std::optional<double> height;     // defaults to the first agent's antenna height
    std::optional<FloorRegion> region;
};

struct ScenarioConfig {
    std::filesystem::path source;  // scenario file, for diagnostics
    std::filesystem::path scene_path;
    std::vector<NodeDescriptor> nodes;
    std::vector<std::pair<std::string, std::string>> edges;
    std::vector<UserRequest> users;
    OfdmParams ofdm;
    RayTraceOptions tracing;
    std::vector<AgentConfig> agents;
    NoiseConfig noise;
    SimConfig sim;
    DbConfig db;
    std::optional<std::filesystem::path> trace_csv;
};

/// Parses a scenario document; relative paths resolve against `base_dir`.
ScenarioConfig parse_scenario(const nlohmann::json& doc, const std::filesystem::path& base_dir);
ScenarioConfig load_scenario(const std::filesystem::path& path);

/// Problems that prevent a run; empty when the scenario is usable.
std::vector<std::string> validate_scenario(const ScenarioConfig& config);

}  // namespace dtwin
