#include "dtwin/agent.hpp"

#include "dtwin/error.hpp"

#include <algorithm>
#include <cmath>

namespace dtwin {

Pose diff_drive_step(const Pose& pose, const Control& u, double dt) {
    if (!(dt > 0.0)) fail(ErrorCode::invalid_argument, "time step must be positive");
    Pose next = pose;
    const double heading = pose.orientation.yaw;
    if (std::abs(u.angular) < 1e-9) {
        next.position.x() += u.linear * dt * std::cos(heading);
        next.position.y() += u.linear * dt * std::sin(heading);
    } else {
        const double radius = u.linear / u.angular;
        const double turned = heading + u.angular * dt;
        next.position.x() += radius * (std::sin(turned) - std::sin(heading));
        next.position.y() -= radius * (std::cos(turned) - std::cos(heading));
    }
    next.orientation.yaw = wrap_angle(heading + u.angular * dt);
    const double yaw = next.orientation.yaw;
    next.velocity = Vec3(u.linear * std::cos(yaw), u.linear * std::sin(yaw), 0.0);
    return next;
}

AgentState step_state(const AgentState& prev, const Control& u, const ProcessNoise& noise, double dt, Rng& rng) {
    if (noise.var_x < 0.0 || noise.var_y < 0.0 || noise.var_yaw < 0.0)
        fail(ErrorCode::invalid_argument, "noise variances must be nonnegative");
    AgentState next = prev;
    next.pose = diff_drive_step(prev.pose, u, dt);
    next.step = prev.step + 1;
    std::normal_distribution<double> normal(0.0, 1.0);
    const double ex = normal(rng);
    const double ey = normal(rng);
    const double eyaw = normal(rng);
    if (noise.var_x > 0.0) next.pose.position.x() += std::sqrt(noise.var_x) * ex;
    if (noise.var_y > 0.0) next.pose.position.y() += std::sqrt(noise.var_y) * ey;
    if (noise.var_yaw > 0.0) next.pose.orientation.yaw = wrap_angle(next.pose.orientation.yaw + std::sqrt(noise.var_yaw) * eyaw);
    return next;
}

std::vector<double> passthrough_observation(const AgentState&, const CVector& m) {
    std::vector<double> o(static_cast<std::size_t>(m.size()));
    for (Eigen::Index i = 0; i < m.size(); ++i) o[static_cast<std::size_t>(i)] = m[i].real();
    return o;
}

Observation observe(const AgentState& s, const CVector& m, std::size_t expected_length, const ProcessNoise& noise,
                    Rng& rng, const ObservationMap& g) {
    if (static_cast<std::size_t>(m.size()) != expected_length)
        fail(ErrorCode::shape_mismatch, "measurement length does not match M_a");
    if (noise.obs_var < 0.0) fail(ErrorCode::invalid_argument, "observation variance must be nonnegative");
    Observation o;
    o.measurements = m;
    o.values = g(s, m);
    std::normal_distribution<double> normal(0.0, 1.0);
    const double sigma = std::sqrt(noise.obs_var);
    for (double& v : o.values) {
        const double e = normal(rng);
        if (sigma > 0.0) v += sigma * e;
    }
    return o;
}

std::pair<Control, PathProgress> waypoint_control(const Vec2& position, double heading, std::span<const Vec2> path,
                                                  PathProgress progress, const ControllerConfig& config) {
    if (path.empty()) fail(ErrorCode::invalid_argument, "waypoint path is empty");
    while (progress.active < path.size() && (path[progress.active] - position).norm() <= config.tolerance)
        ++progress.active;
    if (progress.active >= path.size()) {
        progress.active = path.size();
        progress.complete = true;
        return {Control{}, progress};
    }
    const Vec2 to_goal = path[progress.active] - position;
    const double error = wrap_angle(std::atan2(to_goal.y(), to_goal.x()) - heading);
    Control u;
    u.angular = std::clamp(config.k_ang * error, -config.w_max, config.w_max);
    u.linear = config.v_max;
    // Beyond 45 degrees the forward speed is scaled by cos(error) relative to cos(45), reaching 0 at 90.
    if (std::abs(error) > pi / 4.0)
        u.linear = config.v_max * std::max(0.0, std::cos(error)) / std::cos(pi / 4.0);
    return {u, progress};
}

std::vector<Pose> odometry_track(const Pose& initial, std::span<const Control> controls, double dt) {
    if (!(dt > 0.0)) fail(ErrorCode::invalid_argument, "time step must be positive");
    std::vector<Pose> track;
    track.reserve(controls.size() + 1);
    track.push_back(initial);
    for (const auto& u : controls) track.push_back(diff_drive_step(track.back(), u, dt));
    return track;
}

std::vector<Vec2> circular_path(const Vec2& center, double radius, int count, double start_angle) {
    if (count < 1 || !(radius > 0.0)) fail(ErrorCode::invalid_argument, "invalid circular path");
    std::vector<Vec2> out;
    for (int i = 1; i <= count; ++i) {
        const double a = start_angle + 2.0 * pi * static_cast<double>(i) / static_cast<double>(count);
        out.emplace_back(center.x() + radius * std::cos(a), center.y() + radius * std::sin(a));
    }
    return out;
}

}  // namespace dtwin
