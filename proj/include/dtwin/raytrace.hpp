#pragma once

#include "dtwin/geometry.hpp"
#include "dtwin/scene.hpp"

#include <complex>
#include <span>
#include <vector>

namespace dtwin {

using Complex = std::complex<double>;

struct PropagationPath {
    Complex gain;                    // b
    double delay = 0.0;              // tau, seconds
    double doppler = 0.0;            // nu, Hz
    Direction aoa;                   // in the receiver's body frame
    Direction aod;                   // in the transmitter's body frame
    std::vector<Vec3> reflection_points;
    std::vector<std::size_t> surfaces;  // reflecting surface per bounce, tx -> rx order
    int order = 0;
    double length = 0.0;  // meters
};

struct PathSet {
    std::vector<PropagationPath> paths;  // ascending delay
    Pose tx_pose;
    Pose rx_pose;
    double carrier_freq = 0.0;
};

struct RayTraceOptions {
    int max_order = 2;
    double min_gain = 1e-9;
};

/// Scene geometry with per-surface planes and in-plane bases precomputed for intersection tests.
class TracingScene {
public:
    explicit TracingScene(const Scene& scene);

    [[nodiscard]] const Scene& scene() const { return *scene_; }
    [[nodiscard]] std::size_t size() const { return faces_.size(); }

    struct Face {
        Plane plane;
        std::vector<Vec2> polygon;  // vertices in the plane basis, counter-clockwise about the normal
        Vec3 origin;
        Vec3 u;
        Vec3 v;
        double reflection_coeff = 0.0;
    };

    [[nodiscard]] const Face& face(std::size_t i) const { return faces_[i]; }

    /// Whether the point (assumed on the face plane) lies inside the polygon, edges included.
    [[nodiscard]] bool contains(std::size_t face, const Vec3& point) const;

    /// Whether the open segment a-b crosses any face not listed in `skip`.
    [[nodiscard]] bool occluded(const Vec3& a, const Vec3& b, std::span<const std::size_t> skip) const;

private:
    const Scene* scene_;
    std::vector<Face> faces_;
};

Vec3 mirror_across_surface(const Vec3& point, const Surface& surface);
Vec3 mirror_across_plane(const Vec3& point, const Plane& plane);

/// Free-space amplitude times reflection losses with carrier phase rotation.
Complex path_gain(double path_length, std::span<const double> reflection_coeffs, double carrier_freq);

/// Doppler shift for a polyline `vertices` = tx, reflection points..., rx.
double doppler_shift(std::span<const Vec3> vertices, const Vec3& tx_velocity, const Vec3& rx_velocity,
                     double carrier_freq);

PathSet trace_paths(const TracingScene& scene, const Pose& tx, const Pose& rx, const RayTraceOptions& options,
                    double carrier_freq);
PathSet trace_paths(const Scene& scene, const Pose& tx, const Pose& rx, int max_order, double carrier_freq);

}  // namespace dtwin
