#pragma once

#include "dtwin/channel.hpp"
#include "dtwin/geometry.hpp"

#include <functional>
#include <optional>
#include <random>
#include <span>
#include <utility>
#include <vector>

namespace dtwin {

using Rng = std::mt19937_64;

struct Control {
    double linear = 0.0;   // v, m/s
    double angular = 0.0;  // omega, rad/s
};

struct AgentState {
    Pose pose;
    std::optional<CVector> beamformer;
    std::optional<double> power;
    std::int64_t step = 0;
};

struct Observation {
    std::vector<double> values;  // o, length O_a
    CVector measurements;        // m, length M_a
};

/// Zero-mean Gaussian noise; state variances apply to (x, y, yaw).
struct ProcessNoise {
    double var_x = 0.0;
    double var_y = 0.0;
    double var_yaw = 0.0;
    double obs_var = 0.0;
};

struct ControllerConfig {
    double k_ang = 2.0;
    double v_max = 0.2;   // m/s
    double w_max = 1.5;   // rad/s
    double tolerance = 0.05;  // m
};

struct PathProgress {
    std::size_t active = 0;  // index of the waypoint being approached
    bool complete = false;
};

/// Unicycle update with exact arc integration; heading renormalized to (-pi, pi].
Pose diff_drive_step(const Pose& pose, const Control& u, double dt);

/// diff_drive_step plus additive Gaussian noise on x, y and yaw.
AgentState step_state(const AgentState& prev, const Control& u, const ProcessNoise& noise, double dt, Rng& rng);

using ObservationMap = std::function<std::vector<double>(const AgentState&, const CVector&)>;

/// o = Re(m).
std::vector<double> passthrough_observation(const AgentState& s, const CVector& m);

/// o = g(s, m) + eps_o. The default g passes the measurement through.
Observation observe(const AgentState& s, const CVector& m, std::size_t expected_length, const ProcessNoise& noise,
                    Rng& rng, const ObservationMap& g = passthrough_observation);

/// Proportional heading controller over an ordered waypoint list.
std::pair<Control, PathProgress> waypoint_control(const Vec2& position, double heading, std::span<const Vec2> path,
                                                  PathProgress progress, const ControllerConfig& config);

/// Noiseless forward integration; returns initial pose followed by one pose per control.
std::vector<Pose> odometry_track(const Pose& initial, std::span<const Control> controls, double dt);

/// `count` waypoints evenly spaced counter-clockwise on a circle, the last one back at `start_angle`.
std::vector<Vec2> circular_path(const Vec2& center, double radius, int count, double start_angle = 0.0);

}  // namespace dtwin
