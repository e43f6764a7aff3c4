#include "dtwin/simcore.hpp"

#include "dtwin/error.hpp"
#include "dtwin/hash.hpp"
#include "dtwin/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <sstream>

namespace dtwin {

namespace {

Message message(std::int64_t step, std::string publisher, Payload payload) {
    return Message{{}, step, std::move(publisher), std::move(payload)};
}

std::uint64_t rng_digest(const World& w) {
    std::ostringstream s;
    s << w.state_rng << ' ' << w.obs_rng << ' ' << w.fingerprint_rng << ' ' << w.symbol_rng;
    return fnv1a(s.str());
}

// Receiver each transmitter steers its beam toward: its first receiving neighbour.
std::map<NodeIndex, NodeIndex> intended_receivers(const NetworkGraph& g) {
    std::map<NodeIndex, NodeIndex> out;
    for (const auto& [a, b] : g.edges())
        if (g.node(a).roles.tx && g.node(b).roles.rx && !out.contains(a)) out.emplace(a, b);
    return out;
}

template <typename F>
auto in_phase(const char* phase, std::int64_t step, F&& f) {
    try {
        return f();
    } catch (const Error& e) {
        fail(e.code(), std::string("step ") + std::to_string(step) + ", phase " + phase + ": " + e.what());
    }
}

}  // namespace

std::vector<AccessPoint> access_points_of(const ScenarioConfig& config) {
    std::set<std::string> agents;
    for (const auto& a : config.agents) agents.insert(a.id);
    std::vector<AccessPoint> aps;
    for (const auto& n : config.nodes)
        if (n.roles.tx && !n.roles.virtual_scatterer && !agents.contains(n.id)) aps.push_back({n.id, n.pose, n.array});
    return aps;
}

FingerprintBuildParams fingerprint_params(const ScenarioConfig& config) {
    FingerprintBuildParams p;
    p.spacing = config.db.spacing;
    p.height = config.db.height.value_or(config.agents.empty() ? 0.0 : config.agents.front().initial_pose.position.z());
    p.tracing = config.tracing;
    p.carrier_freq = config.ofdm.carrier_freq;
    p.bin_width = config.db.bin_width.value_or(
        default_bin_width(config.ofdm.num_subcarriers, config.ofdm.subcarrier_spacing));
    p.num_bins = config.db.num_bins;
    return p;
}

FingerprintDB build_database(const ScenarioConfig& config) {
    const Scene scene = load_scene_file(config.scene_path);
    const FingerprintBuildParams params = fingerprint_params(config);
    const auto grid = floor_grid(scene, params.spacing, params.height, config.db.region);
    const auto aps = access_points_of(config);
    return build_fingerprint_db(scene, aps, grid, params);
}

FingerprintDB obtain_database(const ScenarioConfig& config) {
    if (config.db.path && std::filesystem::exists(*config.db.path)) {
        FingerprintDB db = read_fingerprint_db(*config.db.path);
        const Scene scene = load_scene_file(config.scene_path);
        const auto params = fingerprint_params(config);
        const auto aps = access_points_of(config);
        if (db.scene_hash != scene_hash(scene) || db.network_hash != network_hash(aps, params.tracing, params.carrier_freq))
            fail(ErrorCode::stale_database,
                 "database " + config.db.path->string() + " was built for a different scene or network; rebuild it");
        return db;
    }
    if (!config.db.buildable) fail(ErrorCode::config, "no fingerprint database and no build instructions");
    return build_database(config);
}

World::World(ScenarioConfig cfg, FingerprintDB database)
    : config(std::move(cfg)),
      scene(load_scene_file(config.scene_path)),
      tracing(scene),
      graph(build_network(config.nodes, config.edges)),
      allocation(allocate_resources(config.users, config.ofdm.num_subcarriers, config.ofdm.num_symbols)),
      access_points(access_points_of(config)),
      db(std::move(database)),
      localizer(db),
      state_rng(derive_seed(config.sim.seed, "state")),
      obs_rng(derive_seed(config.sim.seed, "observation")),
      fingerprint_rng(derive_seed(config.sim.seed, "fingerprint")),
      symbol_rng(derive_seed(config.sim.seed, "symbols")) {
    for (const auto& ap : access_points) (void)db.ap_index(ap.id);
    for (const auto& n : graph.nodes()) poses.push_back(n.pose);
    for (const auto& ac : config.agents) {
        AgentRuntime a;
        a.config = ac;
        a.node = graph.index_of(ac.id);
        a.odometry = ac.initial_pose;
        a.twin.pose = ac.initial_pose;
        a.twin.pose.position.head<2>() += ac.map_offset;
        a.control = ac.initial_control;
        a.estimate.position = a.twin.pose.position;
        poses[a.node] = a.twin.pose;
        agents.push_back(std::move(a));
    }
    for (NodeIndex v : graph.receivers()) {
        for (NodeIndex q : incoming_edges(graph, v)) {
            if (q == v) continue;
            links.push_back({v, q, rate_column(graph.node(v).id, graph.node(q).id)});
        }
    }
}

std::vector<std::string> World::rate_columns() const {
    std::vector<std::string> out;
    for (const auto& l : links)
        if (allocation.find(graph.node(l.tx).id)) out.push_back(l.column);
    return out;
}

bool World::finished() const {
    return std::all_of(agents.begin(), agents.end(), [](const AgentRuntime& a) { return a.progress.complete; });
}

std::unique_ptr<World> make_world(const ScenarioConfig& config) {
    const auto problems = validate_scenario(config);
    if (!problems.empty()) fail(ErrorCode::config, problems.front());
    return std::make_unique<World>(config, obtain_database(config));
}

TraceRecord sim_step(World& w) {
    const std::int64_t t = w.step;
    const ScenarioConfig& cfg = w.config;
    const double dt = cfg.sim.dt;
    const ProcessNoise noise{cfg.noise.state_var, cfg.noise.state_var, cfg.noise.state_var, cfg.noise.obs_var};

    // 1. state update with the previous command
    in_phase("state", t, [&] {
        for (auto& a : w.agents) {
            a.odometry = diff_drive_step(a.odometry, a.control, dt);
            a.twin = step_state(a.twin, a.control, noise, dt, w.state_rng);
            w.poses[a.node] = a.twin.pose;
            w.bus.publish("agent/" + a.config.id + "/state", message(t, "simulation", StateMsg{a.config.id, a.twin.pose}));
        }
        return 0;
    });

    // 2. propagation parameters for every link at the new poses
    std::vector<PathSet> link_paths = in_phase("raytrace", t, [&] {
        std::vector<PathSet> out;
        for (const auto& l : w.links) {
            const NodeDescriptor& tx = w.graph.node(l.tx);
            PathSet ps;
            if (tx.roles.virtual_scatterer) {
                const Pose& source = tx.illuminator.empty() ? w.poses[l.rx] : w.poses[w.graph.index_of(tx.illuminator)];
                ps = scatterer_paths(w.tracing, source, tx, w.poses[l.rx], cfg.tracing, cfg.ofdm.carrier_freq);
            } else {
                ps = trace_paths(w.tracing, w.poses[l.tx], w.poses[l.rx], cfg.tracing, cfg.ofdm.carrier_freq);
            }
            ChannelParamsMsg msg{w.graph.node(l.rx).id, tx.id, ps.paths.size(), 0.0, 0.0};
            for (const auto& p : ps.paths) msg.strongest_gain = std::max(msg.strongest_gain, std::abs(p.gain));
            if (!ps.paths.empty()) msg.first_delay = ps.paths.front().delay;
            w.bus.publish("sim/channel/" + msg.rx + "/" + msg.tx, message(t, "raytracer", msg));
            out.push_back(std::move(ps));
        }
        return out;
    });

    // 3. MIMO-OFDM signals over every allocated resource element
    std::map<std::size_t, std::pair<double, std::size_t>> rate_acc;  // link -> (sum, count)
    in_phase("signals", t, [&] {
        const auto intended = intended_receivers(w.graph);
        std::vector<std::optional<ChannelSynthesizer>> synth(w.links.size());
        std::map<std::pair<NodeIndex, NodeIndex>, std::size_t> link_index;
        for (std::size_t i = 0; i < w.links.size(); ++i) {
            const auto& l = w.links[i];
            link_index.emplace(std::pair{l.rx, l.tx}, i);
            if (!w.allocation.find(w.graph.node(l.tx).id)) continue;
            synth[i].emplace(link_paths[i], w.graph.node(l.tx).array, w.graph.node(l.rx).array, cfg.ofdm);
        }
        struct Source {
            NodeIndex q;
            const UserAllocation* user;
            std::size_t beam_link;
        };
        std::vector<Source> sources;
        std::set<int> subcarriers;
        for (NodeIndex q : w.graph.transmitters()) {
            const UserAllocation* user = w.allocation.find(w.graph.node(q).id);
            const auto target = intended.find(q);
            if (!user || target == intended.end()) continue;
            sources.push_back({q, user, link_index.at({target->second, q})});
            subcarriers.insert(user->subcarriers.begin(), user->subcarriers.end());
        }

        std::map<NodeIndex, std::pair<double, std::size_t>> rx_power;
        const double sigma2 = cfg.noise.noise_power_w;
        for (int n : subcarriers) {
            std::map<ChannelKey, CMatrix> channels;
            std::map<SignalKey, TxSignal> signals;
            for (int k = 1; k <= cfg.ofdm.num_symbols; ++k) {
                for (const auto& s : sources) {
                    if (!s.user->occupies(n, k)) continue;
                    CMatrix H_beam = synth[s.beam_link]->at(n, k);
                    CVector beam = CVector::Zero(H_beam.cols());
                    if (H_beam.norm() > 0.0) beam = mrt_beamformer(H_beam);
                    else beam[0] = 1.0;
                    const Complex d = qpsk_symbol(static_cast<unsigned>(w.symbol_rng() & 3U));
                    signals.emplace(SignalKey{s.q, n, k}, build_tx_signal(d, beam, s.user->power_at(n, k), 1));
                    const NodeIndex target = w.links[s.beam_link].rx;
                    channels.emplace(ChannelKey{target, s.q, n, k}, std::move(H_beam));
                    for (std::size_t i = 0; i < w.links.size(); ++i) {
                        if (w.links[i].tx != s.q || w.links[i].rx == target) continue;
                        channels.emplace(ChannelKey{w.links[i].rx, s.q, n, k}, synth[i]->at(n, k));
                    }
                }
                for (std::size_t i = 0; i < w.links.size(); ++i) {
                    const auto& l = w.links[i];
                    const auto sig = signals.find({l.tx, n, k});
                    if (sig == signals.end()) continue;
                    const CMatrix& H = channels.at({l.rx, l.tx, n, k});
                    const CVector received = H * sig->second.beamformer;
                    double interference = 0.0;
                    if (received.norm() > 0.0) {
                        const CVector combiner = received.normalized();
                        for (const auto& other : w.links) {
                            if (other.rx != l.rx || other.tx == l.tx) continue;
                            const auto o = signals.find({other.tx, n, k});
                            if (o == signals.end()) continue;
                            const Complex leak = combiner.dot(channels.at({l.rx, other.tx, n, k}) * o->second.beamformer);
                            interference += o->second.power * std::norm(leak);
                        }
                    }
                    auto& acc = rate_acc[i];
                    acc.first += achievable_rate(H, sig->second.beamformer, sig->second.power, sigma2, interference);
                    ++acc.second;
                }
            }
            NoiseModel nm;
            nm.variance = sigma2;
            nm.seed = derive_seed(cfg.sim.seed, "rx-noise/" + std::to_string(t) + "/" + std::to_string(n));
            for (const auto& [key, y] : propagate(w.graph, channels, signals, nm)) {
                auto& acc = rx_power[key.v];
                acc.first += y.squaredNorm() / static_cast<double>(y.size());
                ++acc.second;
            }
        }
        for (const auto& [v, acc] : rx_power) {
            const std::string id = w.graph.node(v).id;
            w.bus.publish("sim/signal/" + id,
                          message(t, "simulation", SignalMsg{id, acc.first / static_cast<double>(acc.second), acc.second}));
        }
        for (const auto& [i, acc] : rate_acc) {
            const auto& l = w.links[i];
            w.bus.publish("metrics/rate/" + w.graph.node(l.rx).id + "_" + w.graph.node(l.tx).id,
                          message(t, "simulation", MetricMsg{l.column, acc.first / static_cast<double>(acc.second)}));
        }
        return 0;
    });

    // 4. measurements and observations: fingerprints at each agent's pose in the twin
    std::vector<Observation> observations = in_phase("observe", t, [&] {
        std::vector<Observation> out;
        const FingerprintBuildParams params = fingerprint_params(cfg);
        for (const auto& a : w.agents) {
            CVector m(static_cast<Eigen::Index>(w.db.ap_ids.size() * w.db.num_bins));
            for (std::size_t ap = 0; ap < w.db.ap_ids.size(); ++ap) {
                const NodeIndex q = w.graph.index_of(w.db.ap_ids[ap]);
                const auto it = std::find_if(w.links.begin(), w.links.end(),
                                             [&](const Link& l) { return l.rx == a.node && l.tx == q; });
                PathSet ps = it != w.links.end()
                                 ? link_paths[static_cast<std::size_t>(it - w.links.begin())]
                                 : trace_paths(w.tracing, w.poses[q], a.twin.pose, params.tracing, params.carrier_freq);
                Mdp mdp = compute_mdp(ps, w.db.bin_width, w.db.num_bins, w.db.ap_ids[ap]);
                if (cfg.noise.fingerprint_snr_db) mdp = perturb_mdp(mdp, *cfg.noise.fingerprint_snr_db, w.fingerprint_rng);
                for (std::size_t b = 0; b < w.db.num_bins; ++b)
                    m[static_cast<Eigen::Index>(ap * w.db.num_bins + b)] = mdp.bins[b];
            }
            const Pose increment = diff_drive_step(Pose{}, a.control, dt);
            const ObservationMap g = [&](const AgentState& s, const CVector& meas) {
                auto o = passthrough_observation(s, meas);
                o.insert(o.end(), {increment.position.x(), increment.position.y(), increment.orientation.yaw});
                return o;
            };
            Observation o = observe(a.twin, m, static_cast<std::size_t>(m.size()), noise, w.obs_rng, g);
            w.bus.publish("agent/" + a.config.id + "/observation",
                          message(t, "simulation", ObservationMsg{a.config.id, o.values}));
            out.push_back(std::move(o));
        }
        return out;
    });

    // 5. state estimation by fingerprint matching
    in_phase("estimate", t, [&] {
        for (std::size_t i = 0; i < w.agents.size(); ++i) {
            auto& a = w.agents[i];
            std::map<std::string, Mdp> measured;
            for (std::size_t ap = 0; ap < w.db.ap_ids.size(); ++ap) {
                Mdp mdp;
                mdp.ap_id = w.db.ap_ids[ap];
                mdp.bin_width = w.db.bin_width;
                for (std::size_t b = 0; b < w.db.num_bins; ++b)
                    mdp.bins.push_back(std::max(0.0, observations[i].values[ap * w.db.num_bins + b]));
                measured.emplace(mdp.ap_id, std::move(mdp));
            }
            a.estimate = w.localizer.locate(measured);
            w.bus.publish("agent/" + a.config.id + "/estimate",
                          message(t, a.config.id, EstimateMsg{a.config.id, a.estimate.position, a.estimate.score}));
        }
        return 0;
    });

    // 6. next control command
    in_phase("control", t, [&] {
        for (auto& a : w.agents) {
            const auto [u, progress] = waypoint_control(a.estimate.position.head<2>(), a.odometry.orientation.yaw,
                                                        a.config.path, a.progress, a.config.controller);
            a.control = u;
            a.progress = progress;
            w.bus.publish("agent/" + a.config.id + "/control", message(t, a.config.id, ControlMsg{a.config.id, u.linear, u.angular}));
        }
        return 0;
    });

    TraceRecord record;
    record.step = t;
    record.time = static_cast<double>(t + 1) * dt;
    for (const auto& a : w.agents) {
        AgentRecord r;
        r.agent_id = a.config.id;
        r.true_pose = a.odometry;
        r.dt_pose = a.twin.pose;
        r.estimate = a.estimate.position;
        r.score = a.estimate.score;
        r.control = a.control;
        for (const auto& [i, acc] : rate_acc)
            if (w.links[i].rx == a.node) r.rates[w.links[i].column] = acc.first / static_cast<double>(acc.second);
        record.agents.push_back(std::move(r));
    }
    record.rng_digest = rng_digest(w);
    w.bus.publish("trace/record", message(t, "recorder", TraceMsg{t}));
    ++w.step;
    return record;
}

std::vector<TraceRecord> run_simulation(const ScenarioConfig& config,
                                        const std::optional<std::filesystem::path>& trace_csv) {
    auto world = make_world(config);
    const auto out_path = trace_csv ? trace_csv : config.trace_csv;
    std::optional<TraceWriter> writer;
    if (out_path) writer.emplace(*out_path, world->rate_columns());

    std::vector<TraceRecord> records;
    while (world->step < config.sim.max_steps) {
        records.push_back(sim_step(*world));
        if (writer) writer->write(records.back());
        if (world->finished()) break;
    }
    return records;
}

}  // namespace dtwin
