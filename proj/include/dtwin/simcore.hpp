#pragma once

#include "dtwin/agent.hpp"
#include "dtwin/bus.hpp"
#include "dtwin/channel.hpp"
#include "dtwin/localization.hpp"
#include "dtwin/network.hpp"
#include "dtwin/raytrace.hpp"
#include "dtwin/scenario.hpp"
#include "dtwin/scene.hpp"
#include "dtwin/trace.hpp"

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace dtwin {

struct AgentRuntime {
    AgentConfig config;
    NodeIndex node = 0;
    AgentState twin;  // pose inside the twin; carries the map offset and state noise
    Pose odometry;    // ground truth
    Control control;  // command applied at the next state update
    PathProgress progress;
    LocationEstimate estimate;
};

struct Link {
    NodeIndex rx;
    NodeIndex tx;
    std::string column;
};

/// Everything a run mutates. Holds internal pointers, so it is neither copyable nor movable.
class World {
public:
    World(ScenarioConfig config, FingerprintDB db);
    World(const World&) = delete;
    World& operator=(const World&) = delete;

    ScenarioConfig config;
    Scene scene;
    TracingScene tracing;
    NetworkGraph graph;
    ResourceAllocation allocation;
    std::vector<AccessPoint> access_points;
    FingerprintDB db;
    Localizer localizer;
    std::vector<Pose> poses;  // current pose per node
    std::vector<AgentRuntime> agents;
    std::vector<Link> links;
    Bus bus;
    Rng state_rng;
    Rng obs_rng;
    Rng fingerprint_rng;
    Rng symbol_rng;
    std::int64_t step = 0;

    [[nodiscard]] std::vector<std::string> rate_columns() const;
    [[nodiscard]] bool finished() const;
};

/// Transmitting nodes that serve as fingerprint anchors (not agents, not virtual scatterers).
std::vector<AccessPoint> access_points_of(const ScenarioConfig& config);

FingerprintBuildParams fingerprint_params(const ScenarioConfig& config);

FingerprintDB build_database(const ScenarioConfig& config);

/// Loads the configured database, or builds it when none exists; rejects databases from other scenarios.
FingerprintDB obtain_database(const ScenarioConfig& config);

std::unique_ptr<World> make_world(const ScenarioConfig& config);

/// One pass of the loop: state update, ray tracing, signal generation, observation, estimation, control.
TraceRecord sim_step(World& world);

/// Runs until max_steps or until every agent has reached its final waypoint.
std::vector<TraceRecord> run_simulation(const ScenarioConfig& config,
                                        const std::optional<std::filesystem::path>& trace_csv = std::nullopt);

}  // namespace dtwin
