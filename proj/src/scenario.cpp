#include "dtwin/scenario.hpp"

#include "dtwin/error.hpp"

#include <cmath>
#include <fstream>
#include <set>

namespace dtwin {

namespace {

using nlohmann::json;

constexpr double deg = pi / 180.0;

Vec3 vec3(const json& j) {
    if (!j.is_array() || j.size() != 3) fail(ErrorCode::config, "expected [x, y, z]");
    return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

Vec2 vec2(const json& j) {
    if (!j.is_array() || j.size() != 2) fail(ErrorCode::config, "expected [x, y]");
    return {j[0].get<double>(), j[1].get<double>()};
}

Pose pose(const json& j) {
    Pose p;
    p.position = vec3(j.at("position"));
    if (j.contains("orientation_deg")) {
        const Vec3 o = vec3(j.at("orientation_deg")) * deg;
        p.orientation = {o.x(), o.y(), o.z()};
    }
    return normalized(p);
}

// Either a list of indices or {"from": a, "to": b} inclusive.
std::vector<int> index_set(const json& j) {
    std::vector<int> out;
    if (j.is_object()) {
        const int from = j.at("from").get<int>();
        const int to = j.at("to").get<int>();
        for (int i = from; i <= to; ++i) out.push_back(i);
    } else {
        for (const auto& v : j) out.push_back(v.get<int>());
    }
    return out;
}

NodeRoles roles(const std::string& role) {
    if (role == "tx") return {true, false, false};
    if (role == "rx") return {false, true, false};
    if (role == "txrx") return {true, true, false};
    if (role == "scatterer") return {true, false, true};
    fail(ErrorCode::config, "unknown node role '" + role + "'");
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
    const std::filesystem::path path(p);
    return path.is_absolute() ? path : base / path;
}

}  // namespace

ScenarioConfig parse_scenario(const json& doc, const std::filesystem::path& base_dir) {
    ScenarioConfig c;
    try {
        c.scene_path = resolve(base_dir, doc.at("scene").get<std::string>());

        const json& o = doc.at("ofdm");
        c.ofdm = OfdmParams::make(o.at("n_subcarriers").get<int>(), o.at("n_symbols").get<int>(),
                                  o.at("delta_f_hz").get<double>(), o.at("carrier_hz").get<double>());
        const double lambda = wavelength(c.ofdm.carrier_freq);

        const json& net = doc.at("network");
        for (const auto& n : net.at("nodes")) {
            NodeDescriptor d;
            d.id = n.at("id").get<std::string>();
            d.roles = roles(n.at("role").get<std::string>());
            const json array = n.value("array", json::object());
            d.array.num_elements = array.value("elements", 1);
            d.array.spacing = array.value("spacing_wavelengths", 0.5) * lambda;
            d.array.boresight = array.value("boresight_deg", 0.0) * deg;
            d.pose = pose(n.at("initial_pose"));
            d.reflection_coeff = n.value("reflection_coeff", 0.0);
            d.illuminator = n.value("illuminator", std::string{});
            c.nodes.push_back(std::move(d));
        }
        for (const auto& e : net.at("edges")) {
            if (!e.is_array() || e.size() != 2) fail(ErrorCode::config, "edges must be [a, b] pairs");
            c.edges.emplace_back(e[0].get<std::string>(), e[1].get<std::string>());
        }
        const json& res = net.at("resources");
        if (res.at("N").get<int>() != c.ofdm.num_subcarriers || res.at("K").get<int>() != c.ofdm.num_symbols ||
            res.at("delta_f_hz").get<double>() != c.ofdm.subcarrier_spacing)
            fail(ErrorCode::config, "network resources disagree with the OFDM parameters");
        for (const auto& u : res.at("users")) {
            UserRequest r;
            r.id = u.at("id").get<std::string>();
            r.subcarriers = index_set(u.at("subcarriers"));
            r.symbols = index_set(u.at("symbols"));
            r.power_budget = u.at("power_w").get<double>();
            if (u.contains("power")) r.power = u.at("power").get<std::vector<double>>();
            c.users.push_back(std::move(r));
        }

        if (doc.contains("raytrace")) {
            c.tracing.max_order = doc["raytrace"].value("max_order", c.tracing.max_order);
            c.tracing.min_gain = doc["raytrace"].value("min_gain", c.tracing.min_gain);
        }

        for (const auto& a : doc.at("agents")) {
            AgentConfig ac;
            ac.id = a.at("id").get<std::string>();
            ac.initial_pose = pose(a.at("initial_pose"));
            const json& path = a.at("path");
            if (path.contains("waypoints")) {
                for (const auto& w : path.at("waypoints")) ac.path.push_back(vec2(w));
            } else {
                const json& circle = path.at("circle");
                ac.path = circular_path(vec2(circle.at("center")), circle.at("radius").get<double>(),
                                        circle.at("count").get<int>(), circle.value("start_deg", 0.0) * deg);
            }
            const json gains = a.value("controller", json::object());
            ac.controller.k_ang = gains.value("k_ang", ac.controller.k_ang);
            ac.controller.v_max = gains.value("v_max", ac.controller.v_max);
            ac.controller.w_max = gains.value("w_max", ac.controller.w_max);
            ac.controller.tolerance = gains.value("tolerance_m", ac.controller.tolerance);
            if (a.contains("initial_control"))
                ac.initial_control = {a["initial_control"].value("v", 0.0), a["initial_control"].value("w", 0.0)};
            if (a.contains("map_offset_m")) ac.map_offset = vec2(a["map_offset_m"]);
            c.agents.push_back(std::move(ac));
        }

        const json noise = doc.value("noise", json::object());
        c.noise.state_var = noise.value("state_var", 0.0);
        c.noise.obs_var = noise.value("obs_var", 0.0);
        c.noise.noise_power_w = noise.value("noise_power_w", c.noise.noise_power_w);
        if (noise.contains("fingerprint_snr_db") && !noise["fingerprint_snr_db"].is_null())
            c.noise.fingerprint_snr_db = noise["fingerprint_snr_db"].get<double>();

        const json& sim = doc.at("sim");
        c.sim.dt = sim.value("dt_s", 0.1);
        c.sim.max_steps = sim.at("max_steps").get<std::int64_t>();
        c.sim.seed = sim.value("seed", std::uint64_t{0});

        const json db = doc.value("db", json::object());
        if (db.contains("path")) c.db.path = resolve(base_dir, db["path"].get<std::string>());
        if (db.contains("build")) {
            const json& b = db["build"];
            c.db.buildable = true;
            c.db.spacing = b.value("spacing_m", c.db.spacing);
            if (b.contains("bin_width_s")) c.db.bin_width = b["bin_width_s"].get<double>();
            c.db.num_bins = b.value("num_bins", c.db.num_bins);
            if (b.contains("height_m")) c.db.height = b["height_m"].get<double>();
            if (b.contains("region"))
                c.db.region = FloorRegion{vec2(b["region"].at("min")), vec2(b["region"].at("max"))};
        }

        if (doc.contains("output") && doc["output"].contains("trace_csv"))
            c.trace_csv = resolve(base_dir, doc["output"]["trace_csv"].get<std::string>());
    } catch (const json::exception& e) {
        fail(ErrorCode::config, std::string("malformed scenario: ") + e.what());
    }
    return c;
}

ScenarioConfig load_scenario(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) fail(ErrorCode::io, "cannot open scenario " + path.string());
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::exception& e) {
        fail(ErrorCode::parse, path.string() + ": " + e.what());
    }
    ScenarioConfig c = parse_scenario(doc, path.parent_path());
    c.source = path;
    return c;
}

std::vector<std::string> validate_scenario(const ScenarioConfig& c) {
    std::vector<std::string> problems;
    if (!(c.sim.dt > 0.0)) problems.emplace_back("sim.dt_s must be positive");
    if (c.sim.max_steps < 1) problems.emplace_back("sim.max_steps must be at least 1");
    if (!std::filesystem::exists(c.scene_path)) problems.push_back("scene file not found: " + c.scene_path.string());
    if (c.db.path && !std::filesystem::exists(*c.db.path) && !c.db.buildable)
        problems.push_back("database not found and no build instructions: " + c.db.path->string());
    if (!c.db.path && !c.db.buildable) problems.emplace_back("db needs a path or build instructions");
    if (c.tracing.max_order < 0) problems.emplace_back("raytrace.max_order must be nonnegative");
    if (!(c.noise.noise_power_w > 0.0)) problems.emplace_back("noise.noise_power_w must be positive");
    if (c.noise.state_var < 0.0 || c.noise.obs_var < 0.0) problems.emplace_back("noise variances must be nonnegative");
    if (c.agents.empty()) problems.emplace_back("at least one agent is required");

    std::set<std::string> ids;
    for (const auto& n : c.nodes) ids.insert(n.id);
    std::set<std::string> agent_ids;
    for (const auto& a : c.agents) {
        if (!ids.contains(a.id)) problems.push_back("agent '" + a.id + "' is not a network node");
        if (!agent_ids.insert(a.id).second) problems.push_back("duplicate agent '" + a.id + "'");
        if (a.path.empty()) problems.push_back("agent '" + a.id + "' has an empty path");
    }
    for (const auto& u : c.users)
        if (!ids.contains(u.id)) problems.push_back("resource user '" + u.id + "' is not a network node");
    try {
        const NetworkGraph g = build_network(c.nodes, c.edges);
        (void)allocate_resources(c.users, c.ofdm.num_subcarriers, c.ofdm.num_symbols);
        for (const auto& a : c.agents)
            if (g.contains(a.id) && !g.node(g.index_of(a.id)).roles.rx)
                problems.push_back("agent '" + a.id + "' must be a receiving node");
    } catch (const Error& e) {
        problems.emplace_back(e.what());
    }
    if (std::filesystem::exists(c.scene_path)) {
        try {
            (void)load_scene_file(c.scene_path);
        } catch (const Error& e) {
            problems.push_back(std::string("scene: ") + e.what());
        }
    }
    return problems;
}

}  // namespace dtwin
