#include "../oracles/arc_oracle.hpp"
#include "../support.hpp"
#include "dtwin/agent.hpp"
#include "dtwin/error.hpp"
#include "dtwin/localization.hpp"

#include <doctest.h>

using namespace dtwin;

TEST_CASE("unicycle kinematics") {
    Pose p;
    Pose s = diff_drive_step(p, {0.1, 0.0}, 1.0);
    CHECK(s.position.x() == 0.1);
    CHECK(s.position.y() == 0.0);

    s = diff_drive_step(p, {0.0, pi / 2}, 1.0);
    CHECK(s.orientation.yaw == doctest::Approx(pi / 2));
    CHECK(s.position.norm() == 0.0);

    s = diff_drive_step(p, {1.0, 1.0}, pi);
    CHECK(s.position.x() == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(s.position.y() == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(std::abs(s.orientation.yaw) == doctest::Approx(pi));

    CHECK_THROWS_AS(diff_drive_step(p, {1, 0}, 0.0), Error);
}

TEST_CASE("heading stays in (-pi, pi]") {
    Pose p;
    for (int i = 0; i < 100; ++i) {
        p = diff_drive_step(p, {0.2, 1.3}, 0.37);
        CHECK(p.orientation.yaw > -pi);
        CHECK(p.orientation.yaw <= pi);
    }
}

TEST_CASE("noisy state update") {
    AgentState s;
    Rng rng(1);
    const AgentState quiet = step_state(s, {0.3, 0.2}, ProcessNoise{}, 0.1, rng);
    const Pose ref = diff_drive_step(s.pose, {0.3, 0.2}, 0.1);
    CHECK((quiet.pose.position - ref.position).norm() == 0.0);
    CHECK(quiet.pose.orientation.yaw == ref.orientation.yaw);
    CHECK(quiet.step == 1);

    Rng a(42), b(42);
    const ProcessNoise n{0.01, 0.02, 0.001, 0};
    for (int i = 0; i < 10; ++i) {
        const auto sa = step_state(s, {0.1, 0.1}, n, 0.1, a);
        const auto sb = step_state(s, {0.1, 0.1}, n, 0.1, b);
        CHECK(sa.pose.position == sb.pose.position);
    }

    Rng mc(7);
    const double var = 0.04;
    double sum = 0, sq = 0;
    const int trials = 100000;
    for (int i = 0; i < trials; ++i) {
        const double x = step_state(s, {}, ProcessNoise{var, 0, 0, 0}, 0.1, mc).pose.position.x();
        sum += x;
        sq += x * x;
    }
    const double mean = sum / trials;
    CHECK((sq / trials - mean * mean) == doctest::Approx(var).epsilon(0.05));
    CHECK_THROWS_AS(step_state(s, {}, ProcessNoise{-1, 0, 0, 0}, 0.1, mc), Error);
}

TEST_CASE("observation model") {
    AgentState s;
    CVector m(3);
    m << 1.0, 2.0, 3.0;
    Rng rng(3);
    const Observation o = observe(s, m, 3, ProcessNoise{}, rng);
    CHECK(o.values == std::vector<double>{1, 2, 3});
    CHECK_THROWS_AS(observe(s, m, 4, ProcessNoise{}, rng), Error);

    Rng a(5), b(5);
    const ProcessNoise n{0, 0, 0, 0.5};
    CHECK(observe(s, m, 3, n, a).values == observe(s, m, 3, n, b).values);
}

TEST_CASE("binning observation map agrees with compute_mdp") {
    const Scene scene = load_scene(fixture::shoebox(4, 3, 2.5));
    Pose tx, rx;
    tx.position = {0.5, 0.5, 2};
    rx.position = {3, 2, 0.3};
    const PathSet ps = trace_paths(scene, tx, rx, 2, 2.4e9);
    const ObservationMap g = [&](const AgentState&, const CVector&) {
        std::vector<double> out(16, 0.0);
        for (const auto& p : ps.paths) {
            const auto bin = static_cast<std::size_t>(std::floor(p.delay / 5e-9));
            if (bin < out.size()) out[bin] += std::norm(p.gain);
        }
        return out;
    };
    Rng rng(1);
    const Observation o = observe(AgentState{}, CVector::Zero(0), 0, ProcessNoise{}, rng, g);
    CHECK(o.values == compute_mdp(ps, 5e-9, 16).bins);
}

TEST_CASE("waypoint controller") {
    const ControllerConfig cfg;
    const std::vector<Vec2> goal{{1, 0}};
    auto [u, prog] = waypoint_control({0.98, 0.01}, 0.0, goal, {}, cfg);
    CHECK(u.linear == 0.0);
    CHECK(u.angular == 0.0);
    CHECK(prog.complete);

    std::tie(u, prog) = waypoint_control({0, 0}, 0.0, goal, {}, cfg);
    CHECK(u.angular == doctest::Approx(0.0));
    CHECK(u.linear == cfg.v_max);
    CHECK_FALSE(prog.complete);

    std::tie(u, prog) = waypoint_control({2, 0}, 0.0, goal, {}, cfg);
    // heading error pi: K*pi exceeds the rate limit, forward speed drops to zero
    CHECK(std::abs(u.angular) == cfg.w_max);
    CHECK(u.linear == doctest::Approx(0.0));

    std::tie(u, prog) = waypoint_control({0, 0}, 0.0, std::vector<Vec2>{{1, 1}}, {}, cfg);
    CHECK(u.angular == doctest::Approx(std::min(cfg.k_ang * pi / 4, cfg.w_max)));
    CHECK(u.linear == doctest::Approx(cfg.v_max));

    const std::vector<Vec2> two{{0, 0}, {1, 0}};
    std::tie(u, prog) = waypoint_control({0.01, 0}, 0.0, two, {}, cfg);
    CHECK(prog.active == 1);
}

TEST_CASE("odometry tracks") {
    Pose start;
    start.position = {1, 2, 0};
    start.orientation.yaw = 0.4;
    const std::vector<Control> zeros(5);
    const auto still = odometry_track(start, zeros, 0.1);
    REQUIRE(still.size() == 6);
    for (const auto& p : still) CHECK((p.position - start.position).norm() == 0.0);
    CHECK(odometry_track(start, {}, 0.1).size() == 1);

    const std::vector<Control> straight(10, Control{0.3, 0.0});
    const auto line = odometry_track(start, straight, 0.1);
    const Vec3 dir = line.back().position - line.front().position;
    for (const auto& p : line) CHECK(std::abs(dir.head<2>().normalized().x() * (p.position - start.position).y() -
                                              dir.head<2>().normalized().y() * (p.position - start.position).x()) < 1e-12);

    const std::vector<Control> turn(200, Control{0.2, 0.4});
    const auto arc = odometry_track(start, turn, 0.1);
    for (std::size_t i = 0; i < arc.size(); ++i) {
        const auto ref = oracle::arc_pose({1, 2, 0.4}, 0.2, 0.4, 0.1 * static_cast<double>(i));
        CHECK(std::hypot(arc[i].position.x() - ref.x, arc[i].position.y() - ref.y) <= 1e-9);
    }
}

TEST_CASE("circular waypoint list") {
    const auto pts = circular_path({2, 1.5}, 0.5, 8, -pi / 2);
    REQUIRE(pts.size() == 8);
    for (const auto& p : pts) CHECK((p - Vec2(2, 1.5)).norm() == doctest::Approx(0.5));
    CHECK((pts.back() - Vec2(2, 1.0)).norm() < 1e-12);
    CHECK_THROWS_AS(circular_path({0, 0}, 0.0, 4), Error);
}
