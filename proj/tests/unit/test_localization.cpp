#include "../support.hpp"
#include "dtwin/error.hpp"
#include "dtwin/localization.hpp"

#include <doctest.h>

#include <random>

using namespace dtwin;

namespace {

PathSet paths_with(std::initializer_list<std::pair<double, double>> amp_delay) {
    PathSet ps;
    ps.carrier_freq = 2.4e9;
    for (const auto& [a, t] : amp_delay) {
        PropagationPath p;
        p.gain = a;
        p.delay = t;
        ps.paths.push_back(p);
    }
    return ps;
}

Mdp spikes(std::vector<double> bins, std::string id = "ap") {
    return Mdp{std::move(bins), 1e-9, std::move(id), 0};
}

std::vector<AccessPoint> two_aps() {
    AccessPoint a{"ap1", {}, half_wavelength_array(1, 2.4e9)};
    a.pose.position = {0.3, 0.4, 2.0};
    AccessPoint b{"ap2", {}, half_wavelength_array(1, 2.4e9)};
    b.pose.position = {3.6, 2.5, 1.2};
    return {a, b};
}

FingerprintBuildParams params() {
    FingerprintBuildParams p;
    p.bin_width = 5e-9;
    p.num_bins = 64;
    p.height = 0.3;
    p.spacing = 0.05;
    return p;
}

}  // namespace

TEST_CASE("delay binning") {
    CHECK(compute_mdp(PathSet{}, 12.5e-9, 8).bins == std::vector<double>(8, 0.0));
    const Mdp one = compute_mdp(paths_with({{0.5, 13e-9}}), 12.5e-9, 8);
    CHECK(one.bins[1] == 0.25);
    CHECK(std::count(one.bins.begin(), one.bins.end(), 0.0) == 7);
    const Mdp two = compute_mdp(paths_with({{0.5, 13e-9}, {0.1, 14e-9}}), 12.5e-9, 8);
    CHECK(two.bins[1] == doctest::Approx(0.26));
    const Mdp late = compute_mdp(paths_with({{0.5, 200e-9}}), 12.5e-9, 8);
    CHECK(late.dropped == 1);
    CHECK_THROWS_AS(compute_mdp(PathSet{}, 0.0, 8), Error);
    CHECK_THROWS_AS(compute_mdp(PathSet{}, 1e-9, 0), Error);
}

TEST_CASE("profile distance") {
    const Mdp a = spikes({0, 0.2, 0.5, 0, 0.1, 0});
    CHECK(mdp_distance(a, a) == 0.0);
    Mdp scaled = a;
    for (double& b : scaled.bins) b *= 10;
    CHECK(mdp_distance(a, scaled) == doctest::Approx(0.0));
    Mdp shifted = spikes({0, 0, 0.2, 0.5, 0, 0.1});
    CHECK(mdp_distance(a, shifted) == doctest::Approx(0.0));

    const Mdp spike = spikes({1, 0, 0, 0, 0, 0, 0, 0});
    const Mdp split = spikes({0.5, 0.5, 0, 0, 0, 0, 0, 0});
    CHECK(mdp_distance(spike, split) == doctest::Approx(std::sqrt((0.25 + 0.25) / 8.0)).epsilon(1e-15));
    CHECK(mdp_distance(spike, split) == mdp_distance(split, spike));
    CHECK(mdp_distance(spikes(std::vector<double>(8, 0.0)), spikes(std::vector<double>(8, 0.0))) == 0.0);

    Mdp other = spike;
    other.bin_width = 2e-9;
    CHECK_THROWS_AS(mdp_distance(spike, other), Error);
    CHECK_THROWS_AS(mdp_distance(spike, spikes({1, 0})), Error);
}

TEST_CASE("query perturbation keeps bins nonnegative and zero bins zero") {
    const Mdp m = spikes({0, 1.0, 0.5, 0, 1e-3});
    std::mt19937_64 rng(9);
    for (int i = 0; i < 100; ++i) {
        const Mdp p = perturb_mdp(m, 20.0, rng);
        CHECK(p.bins[0] == 0.0);
        CHECK(p.bins[3] == 0.0);
        for (double b : p.bins) CHECK(b >= 0.0);
    }
    double sq = 0;
    const int n = 20000;
    for (int i = 0; i < n; ++i) {
        const double d = perturb_mdp(m, 20.0, rng).bins[1] - 1.0;
        sq += d * d;
    }
    // 20 dB between bin power and noise power: relative standard deviation 0.01
    CHECK(std::sqrt(sq / n) == doctest::Approx(0.01).epsilon(0.05));
}

TEST_CASE("database construction, self-query and persistence") {
    const Scene scene = load_scene(fixture::shoebox(4, 3, 2.5));
    const auto aps = two_aps();
    const auto grid = floor_grid(scene, 0.5, 0.3, FloorRegion{{1, 1}, {2, 2}});
    REQUIRE(grid.size() == 9);
    const FingerprintDB db = build_fingerprint_db(scene, aps, grid, params());
    CHECK(db.entry_count() == 18);
    CHECK(db.bins.size() == 18 * 64);
    CHECK(db.scene_hash == scene_hash(scene));

    const Localizer loc(db);
    for (std::size_t i = 0; i < db.points.size(); ++i) {
        std::map<std::string, Mdp> q;
        for (std::size_t a = 0; a < aps.size(); ++a) q.emplace(db.ap_ids[a], db.entry(i, a));
        const auto e = loc.locate(q);
        CHECK(e.index == i);
        CHECK(e.score == 0.0);
        CHECK(localize(q, db).index == i);
    }

    // on-the-fly fingerprints equal the stored ones
    const TracingScene ts(scene);
    Pose at;
    at.position = db.points[4];
    const auto live = fingerprint_at(ts, aps, at, params());
    for (std::size_t a = 0; a < aps.size(); ++a)
        for (std::size_t b = 0; b < db.num_bins; ++b) CHECK(std::abs(live.at(db.ap_ids[a]).bins[b] - db.profile(4, a)[b]) <= 1e-12);

    const auto dir = fixture::scratch_dir("loc");
    write_fingerprint_db(db, dir / "a.fpdb");
    const FingerprintDB again = build_fingerprint_db(scene, aps, grid, params());
    write_fingerprint_db(again, dir / "b.fpdb");
    CHECK(encode_fingerprint_db(db) == encode_fingerprint_db(again));
    const FingerprintDB back = read_fingerprint_db(dir / "a.fpdb");
    CHECK(back.bins == db.bins);
    CHECK(back.ap_ids == db.ap_ids);
    CHECK(back.network_hash == db.network_hash);
    CHECK(back.points.size() == db.points.size());

    std::string bytes = encode_fingerprint_db(db);
    CHECK_THROWS_AS(decode_fingerprint_db(bytes.substr(0, bytes.size() - 3)), Error);
    bytes[0] = 'X';
    CHECK_THROWS_AS(decode_fingerprint_db(bytes), Error);
}

TEST_CASE("localization edge cases") {
    FingerprintDB db;
    db.points = {{0, 0, 0}, {1, 0, 0}};
    db.ap_ids = {"ap"};
    db.bin_width = 1e-9;
    db.num_bins = 4;
    db.bins = {1, 0, 0, 0, /* point 1 */ 0.5, 0.5, 0, 0};
    std::map<std::string, Mdp> q{{"ap", Mdp{{0.5, 0.5, 0, 0}, 1e-9, "ap", 0}}};
    CHECK(localize(q, db).index == 1);
    std::map<std::string, Mdp> ghost{{"zz", Mdp{{1, 0, 0, 0}, 1e-9, "zz", 0}}};
    CHECK_THROWS_AS(localize(ghost, db), Error);
    std::map<std::string, Mdp> bad{{"ap", Mdp{{1, 0, 0, 0}, 2e-9, "ap", 0}}};
    CHECK_THROWS_AS(localize(bad, db), Error);

    // ties resolve to the lowest index
    db.bins = {1, 0, 0, 0, 1, 0, 0, 0};
    CHECK(localize(std::map<std::string, Mdp>{{"ap", Mdp{{0, 1, 0, 0}, 1e-9, "ap", 0}}}, db).index == 0);
}

TEST_CASE("noise degrades localization monotonically on average") {
    const Scene scene = load_scene(fixture::shoebox(4, 3, 2.5));
    const auto aps = two_aps();
    const auto grid = floor_grid(scene, 0.1, 0.3, FloorRegion{{1, 1}, {2, 2}});
    const FingerprintDB db = build_fingerprint_db(scene, aps, grid, params());
    const Localizer loc(db);
    std::mt19937_64 rng(21);
    std::vector<double> mean_err;
    for (double snr : {40.0, 10.0, 0.0}) {
        double sum = 0;
        const int trials = 120;
        for (int t = 0; t < trials; ++t) {
            const std::size_t i = t % db.points.size();
            std::map<std::string, Mdp> q;
            for (std::size_t a = 0; a < aps.size(); ++a) q.emplace(db.ap_ids[a], perturb_mdp(db.entry(i, a), snr, rng));
            sum += (loc.locate(q).position - db.points[i]).norm();
        }
        mean_err.push_back(sum / trials);
    }
    CHECK(mean_err[0] <= mean_err[1] + 0.01);
    CHECK(mean_err[1] <= mean_err[2] + 0.01);
}
