#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <algorithm>
#include <cmath>
#include <numbers>

namespace dtwin {

using Vec3 = Eigen::Vector3d;
using Vec2 = Eigen::Vector2d;
using Mat3 = Eigen::Matrix3d;

inline constexpr double speed_of_light = 299'792'458.0;
inline constexpr double pi = std::numbers::pi;

/// Wraps an angle to (-pi, pi].
inline double wrap_angle(double a) {
    double r = std::remainder(a, 2.0 * pi);
    if (r <= -pi) r += 2.0 * pi;
    return r;
}

inline double wavelength(double carrier_freq) { return speed_of_light / carrier_freq; }

/// Euler angles, Z-Y-X convention: yaw about z, then pitch about y, then roll about x.
struct EulerAngles {
    double yaw = 0.0;
    double pitch = 0.0;
    double roll = 0.0;
};

struct Pose {
    Vec3 position = Vec3::Zero();
    EulerAngles orientation;
    Vec3 velocity = Vec3::Zero();
};

inline Pose normalized(Pose p) {
    p.orientation.yaw = wrap_angle(p.orientation.yaw);
    p.orientation.pitch = wrap_angle(p.orientation.pitch);
    p.orientation.roll = wrap_angle(p.orientation.roll);
    return p;
}

/// Body-to-world rotation R = Rz(yaw) Ry(pitch) Rx(roll).
inline Mat3 rotation(const EulerAngles& e) {
    return (Eigen::AngleAxisd(e.yaw, Vec3::UnitZ()) * Eigen::AngleAxisd(e.pitch, Vec3::UnitY()) *
            Eigen::AngleAxisd(e.roll, Vec3::UnitX()))
        .toRotationMatrix();
}

struct Direction {
    double azimuth = 0.0;
    double elevation = 0.0;
};

/// Direction of a unit vector expressed in the body frame of `frame`.
inline Direction local_direction(const Vec3& world_unit, const EulerAngles& frame) {
    const Vec3 u = rotation(frame).transpose() * world_unit;
    return {std::atan2(u.y(), u.x()), std::asin(std::clamp(u.z(), -1.0, 1.0))};
}

}  // namespace dtwin
