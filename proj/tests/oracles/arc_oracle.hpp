#pragma once
// Closed-form pose of a unicycle under constant (v, w) after time t, starting at (x0, y0, th0).

#include <cmath>

namespace oracle {

struct PlanarPose {
    double x, y, heading;
};

inline PlanarPose arc_pose(PlanarPose start, double v, double w, double t) {
    if (w == 0.0)
        return {start.x + v * t * std::cos(start.heading), start.y + v * t * std::sin(start.heading), start.heading};
    const double r = v / w;
    // Centre of the turning circle sits r to the left of the heading.
    const double cx = start.x - r * std::sin(start.heading);
    const double cy = start.y + r * std::cos(start.heading);
    const double th = start.heading + w * t;
    return {cx + r * std::sin(th), cy - r * std::cos(th), th};
}

}  // namespace oracle
