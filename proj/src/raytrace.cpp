#include "dtwin/raytrace.hpp"

#include "dtwin/error.hpp"

#include <algorithm>
#include <cmath>

namespace dtwin {

namespace {

constexpr double endpoint_guard = 1e-9;  // meters
constexpr double plane_guard = 1e-9;     // meters

bool lexicographic_less(const Vec3& a, const Vec3& b) {
    return std::lexicographical_compare(a.data(), a.data() + 3, b.data(), b.data() + 3);
}

// Geometry of one specular path from endpoint a to endpoint b (canonical direction).
struct Route {
    std::vector<std::size_t> faces;
    std::vector<Vec3> points;  // reflection points, a -> b
    double length = 0.0;
};

class ImageSolver {
public:
    ImageSolver(const TracingScene& scene, const Vec3& a, const Vec3& b, int max_order)
        : scene_(scene), a_(a), b_(b), max_order_(max_order) {}

    std::vector<Route> solve() {
        const std::size_t none = scene_.size();
        if (!scene_.occluded(a_, b_, {})) routes_.push_back({{}, {}, (b_ - a_).norm()});
        if (max_order_ > 0) {
            faces_.clear();
            images_.assign(1, a_);
            descend(none);
        }
        return std::move(routes_);
    }

private:
    void descend(std::size_t last) {
        for (std::size_t f = 0; f < scene_.size(); ++f) {
            if (f == last) continue;
            const Plane& plane = scene_.face(f).plane;
            if (std::abs(plane.signed_distance(images_.back())) <= plane_guard) continue;
            faces_.push_back(f);
            images_.push_back(mirror_across_plane(images_.back(), plane));
            try_route();
            if (static_cast<int>(faces_.size()) < max_order_) descend(f);
            images_.pop_back();
            faces_.pop_back();
        }
    }

    void try_route() {
        const std::size_t order = faces_.size();
        std::vector<Vec3> points(order);
        Vec3 target = b_;
        for (std::size_t i = order; i-- > 0;) {
            const Plane& plane = scene_.face(faces_[i]).plane;
            const Vec3& image = images_[i + 1];
            const double d_image = plane.signed_distance(image);
            const double d_target = plane.signed_distance(target);
            if (std::abs(d_target) <= plane_guard || d_image * d_target >= 0.0) return;
            const double t = d_image / (d_image - d_target);
            const Vec3 hit = image + t * (target - image);
            if (!scene_.contains(faces_[i], hit)) return;
            points[i] = hit;
            target = hit;
        }

        double length = 0.0;
        Vec3 from = a_;
        for (std::size_t i = 0; i <= order; ++i) {
            const Vec3& to = i < order ? points[i] : b_;
            const double seg = (to - from).norm();
            if (seg <= endpoint_guard) return;
            std::size_t skip[2];
            std::size_t n_skip = 0;
            if (i > 0) skip[n_skip++] = faces_[i - 1];
            if (i < order) skip[n_skip++] = faces_[i];
            if (scene_.occluded(from, to, std::span<const std::size_t>(skip, n_skip))) return;
            length += seg;
            from = to;
        }
        routes_.push_back({faces_, std::move(points), length});
    }

    const TracingScene& scene_;
    Vec3 a_;
    Vec3 b_;
    int max_order_;
    std::vector<std::size_t> faces_;
    std::vector<Vec3> images_;
    std::vector<Route> routes_;
};

}  // namespace

TracingScene::TracingScene(const Scene& scene) : scene_(&scene) {
    faces_.reserve(scene.surfaces.size());
    for (const auto& s : scene.surfaces) {
        const auto plane = plane_of(s);
        if (!plane) fail(ErrorCode::invalid_scene, "degenerate surface in tracing scene");
        Face face;
        face.plane = *plane;
        face.origin = s.vertices.front();
        face.u = (s.vertices[1] - s.vertices[0]).normalized();
        face.v = plane->normal.cross(face.u);
        for (const auto& p : s.vertices) {
            const Vec3 d = p - face.origin;
            face.polygon.emplace_back(d.dot(face.u), d.dot(face.v));
        }
        face.reflection_coeff = scene.material_of(s).reflection_coeff;
        faces_.push_back(std::move(face));
    }
}

bool TracingScene::contains(std::size_t index, const Vec3& point) const {
    const Face& f = faces_[index];
    const Vec3 d = point - f.origin;
    const Vec2 q(d.dot(f.u), d.dot(f.v));
    const auto& poly = f.polygon;
    for (std::size_t k = 0; k < poly.size(); ++k) {
        const Vec2& p0 = poly[k];
        const Vec2& p1 = poly[(k + 1) % poly.size()];
        const Vec2 e = p1 - p0;
        const Vec2 r = q - p0;
        if (e.x() * r.y() - e.y() * r.x() < -1e-12 * e.norm()) return false;
    }
    return true;
}

bool TracingScene::occluded(const Vec3& a, const Vec3& b, std::span<const std::size_t> skip) const {
    const double length = (b - a).norm();
    for (std::size_t i = 0; i < faces_.size(); ++i) {
        if (std::find(skip.begin(), skip.end(), i) != skip.end()) continue;
        const Plane& plane = faces_[i].plane;
        const double da = plane.signed_distance(a);
        const double db = plane.signed_distance(b);
        if ((da > 0.0 && db > 0.0) || (da < 0.0 && db < 0.0) || da == db) continue;
        const double t = da / (da - db);
        if (t * length <= endpoint_guard || (1.0 - t) * length <= endpoint_guard) continue;
        if (contains(i, a + t * (b - a))) return true;
    }
    return false;
}

Vec3 mirror_across_plane(const Vec3& point, const Plane& plane) {
    return point - 2.0 * plane.signed_distance(point) * plane.normal;
}

Vec3 mirror_across_surface(const Vec3& point, const Surface& surface) {
    const auto plane = plane_of(surface);
    if (!plane) fail(ErrorCode::invalid_argument, "cannot mirror across a degenerate surface");
    return mirror_across_plane(point, *plane);
}

Complex path_gain(double path_length, std::span<const double> reflection_coeffs, double carrier_freq) {
    if (!(path_length > 0.0)) fail(ErrorCode::invalid_argument, "path length must be positive");
    const double lambda = wavelength(carrier_freq);
    double amplitude = lambda / (4.0 * pi * path_length);
    for (double c : reflection_coeffs) amplitude *= c;
    const double phase = -2.0 * pi * path_length / lambda;
    return amplitude * Complex(std::cos(phase), std::sin(phase));
}

double doppler_shift(std::span<const Vec3> vertices, const Vec3& tx_velocity, const Vec3& rx_velocity,
                     double carrier_freq) {
    if (vertices.size() < 2) fail(ErrorCode::invalid_argument, "path needs at least two vertices");
    const Vec3 departure = (vertices[1] - vertices[0]).normalized();
    const Vec3 arrival = (vertices[vertices.size() - 1] - vertices[vertices.size() - 2]).normalized();
    return carrier_freq / speed_of_light * (tx_velocity.dot(departure) - rx_velocity.dot(arrival));
}

PathSet trace_paths(const TracingScene& scene, const Pose& tx, const Pose& rx, const RayTraceOptions& options,
                    double carrier_freq) {
    if ((tx.position - rx.position).norm() <= 1e-12)
        fail(ErrorCode::coincident_endpoints, "transmitter and receiver positions coincide");
    if (options.max_order < 0) fail(ErrorCode::invalid_argument, "max_order must be nonnegative");
    if (!(carrier_freq > 0.0)) fail(ErrorCode::invalid_argument, "carrier frequency must be positive");

    // Geometry is always solved from the lexicographically smaller endpoint so that
    // swapping tx and rx yields bit-identical path lengths.
    const bool swapped = lexicographic_less(rx.position, tx.position);
    const Vec3& a = swapped ? rx.position : tx.position;
    const Vec3& b = swapped ? tx.position : rx.position;
    std::vector<Route> routes = ImageSolver(scene, a, b, options.max_order).solve();
    std::sort(routes.begin(), routes.end(), [](const Route& l, const Route& r) {
        if (l.length != r.length) return l.length < r.length;
        return l.faces < r.faces;
    });

    PathSet set;
    set.tx_pose = tx;
    set.rx_pose = rx;
    set.carrier_freq = carrier_freq;
    std::vector<double> coeffs;
    std::vector<Vec3> vertices;
    for (auto& route : routes) {
        if (swapped) {
            std::reverse(route.faces.begin(), route.faces.end());
            std::reverse(route.points.begin(), route.points.end());
        }
        coeffs.clear();
        for (std::size_t f : route.faces) coeffs.push_back(scene.face(f).reflection_coeff);
        PropagationPath path;
        path.gain = path_gain(route.length, coeffs, carrier_freq);
        if (std::abs(path.gain) < options.min_gain) continue;
        if (std::abs(path.gain) > 1.0) path.gain /= std::abs(path.gain);

        vertices.clear();
        vertices.push_back(tx.position);
        vertices.insert(vertices.end(), route.points.begin(), route.points.end());
        vertices.push_back(rx.position);

        path.length = route.length;
        path.delay = route.length / speed_of_light;
        path.doppler = doppler_shift(vertices, tx.velocity, rx.velocity, carrier_freq);
        path.aod = local_direction((vertices[1] - vertices[0]).normalized(), tx.orientation);
        path.aoa = local_direction((vertices[vertices.size() - 2] - vertices.back()).normalized(), rx.orientation);
        path.order = static_cast<int>(route.faces.size());
        path.surfaces = std::move(route.faces);
        path.reflection_points = std::move(route.points);
        set.paths.push_back(std::move(path));
    }
    return set;
}

PathSet trace_paths(const Scene& scene, const Pose& tx, const Pose& rx, int max_order, double carrier_freq) {
    const TracingScene tracing(scene);
    RayTraceOptions options;
    options.max_order = max_order;
    return trace_paths(tracing, tx, rx, options, carrier_freq);
}

}  // namespace dtwin
