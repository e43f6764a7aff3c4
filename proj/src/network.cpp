#include "dtwin/network.hpp"

#include "dtwin/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace dtwin {

ArrayConfig half_wavelength_array(int num_elements, double carrier_freq, double boresight) {
    return {num_elements, 0.5 * wavelength(carrier_freq), boresight};
}

NodeIndex NetworkGraph::index_of(const std::string& id) const {
    const auto it = index_.find(id);
    if (it == index_.end()) fail(ErrorCode::unknown_node, "unknown node '" + id + "'");
    return it->second;
}

std::vector<NodeIndex> NetworkGraph::transmitters() const {
    std::vector<NodeIndex> out;
    for (NodeIndex i = 0; i < nodes_.size(); ++i)
        if (nodes_[i].roles.tx) out.push_back(i);
    return out;
}

std::vector<NodeIndex> NetworkGraph::receivers() const {
    std::vector<NodeIndex> out;
    for (NodeIndex i = 0; i < nodes_.size(); ++i)
        if (nodes_[i].roles.rx) out.push_back(i);
    return out;
}

NetworkGraph build_network(std::vector<NodeDescriptor> nodes,
                           const std::vector<std::pair<std::string, std::string>>& edges) {
    NetworkGraph g;
    for (auto& n : nodes) {
        if (n.id.empty()) fail(ErrorCode::invalid_argument, "node id must be nonempty");
        if (n.array.num_elements < 1 || !(n.array.spacing > 0.0))
            fail(ErrorCode::invalid_argument, "node '" + n.id + "' has an invalid array configuration");
        if (!g.index_.emplace(n.id, g.nodes_.size()).second)
            fail(ErrorCode::invalid_argument, "duplicate node id '" + n.id + "'");
        n.pose = normalized(n.pose);
        g.nodes_.push_back(std::move(n));
    }
    for (const auto& [a, b] : edges) {
        if (a == b) fail(ErrorCode::self_loop, "self-loop on node '" + a + "'");
        const NodeIndex ia = g.index_of(a);
        const NodeIndex ib = g.index_of(b);
        g.edges_.emplace(ia, ib);
        g.edges_.emplace(ib, ia);
    }
    return g;
}

std::set<NodeIndex> incoming_edges(const NetworkGraph& graph, NodeIndex v) {
    if (v >= graph.size()) fail(ErrorCode::unknown_node, "node index out of range");
    std::set<NodeIndex> out;
    for (const auto& [a, b] : graph.edges())
        if (b == v && graph.node(a).roles.tx) out.insert(a);
    return out;
}

std::set<std::string> incoming_edges(const NetworkGraph& graph, const std::string& v) {
    std::set<std::string> out;
    for (NodeIndex q : incoming_edges(graph, graph.index_of(v))) out.insert(graph.node(q).id);
    return out;
}

NetworkGraph add_virtual_scatterer(const NetworkGraph& graph, const Aabb& bounds, const std::string& id,
                                   const Vec3& position, const Material& reflection_profile,
                                   const std::vector<std::string>& receivers) {
    if (!bounds.contains(position)) fail(ErrorCode::out_of_range, "virtual scatterer outside scene bounds");
    std::vector<NodeDescriptor> nodes = graph.nodes();
    std::vector<std::pair<std::string, std::string>> edges;
    for (const auto& [a, b] : graph.edges())
        if (a < b) edges.emplace_back(graph.node(a).id, graph.node(b).id);

    NodeDescriptor s;
    s.id = id;
    s.roles = {true, false, true};
    s.array = {1, 1.0, 0.0};
    s.pose.position = position;
    s.reflection_coeff = reflection_profile.reflection_coeff;
    nodes.push_back(std::move(s));
    for (const auto& r : receivers) edges.emplace_back(id, r);
    return build_network(std::move(nodes), edges);
}

PathSet scatterer_paths(const TracingScene& scene, const Pose& source, const NodeDescriptor& scatterer,
                        const Pose& receiver, const RayTraceOptions& options, double carrier_freq) {
    Pose relay = scatterer.pose;
    const PathSet in = trace_paths(scene, source, relay, options, carrier_freq);
    const PathSet out = trace_paths(scene, relay, receiver, options, carrier_freq);

    PathSet set;
    set.tx_pose = source;
    set.rx_pose = receiver;
    set.carrier_freq = carrier_freq;
    for (const auto& p1 : in.paths) {
        for (const auto& p2 : out.paths) {
            PropagationPath p;
            p.gain = p1.gain * p2.gain * scatterer.reflection_coeff;
            if (std::abs(p.gain) < options.min_gain) continue;
            p.delay = p1.delay + p2.delay;
            p.length = p1.length + p2.length;
            p.doppler = p1.doppler + p2.doppler;
            p.aod = p1.aod;
            p.aoa = p2.aoa;
            p.reflection_points = p1.reflection_points;
            p.reflection_points.push_back(relay.position);
            p.reflection_points.insert(p.reflection_points.end(), p2.reflection_points.begin(),
                                       p2.reflection_points.end());
            p.surfaces = p1.surfaces;
            p.surfaces.insert(p.surfaces.end(), p2.surfaces.begin(), p2.surfaces.end());
            p.order = static_cast<int>(p.reflection_points.size());
            set.paths.push_back(std::move(p));
        }
    }
    std::stable_sort(set.paths.begin(), set.paths.end(),
                     [](const PropagationPath& a, const PropagationPath& b) { return a.delay < b.delay; });
    return set;
}

bool UserAllocation::occupies(int n, int k) const {
    return std::binary_search(subcarriers.begin(), subcarriers.end(), n) &&
           std::binary_search(symbols.begin(), symbols.end(), k);
}

double UserAllocation::power_at(int n, int k) const {
    const auto in = std::lower_bound(subcarriers.begin(), subcarriers.end(), n);
    const auto ik = std::lower_bound(symbols.begin(), symbols.end(), k);
    if (in == subcarriers.end() || *in != n || ik == symbols.end() || *ik != k) return 0.0;
    const auto row = static_cast<std::size_t>(in - subcarriers.begin());
    const auto col = static_cast<std::size_t>(ik - symbols.begin());
    return power[row * symbols.size() + col];
}

double UserAllocation::total_power() const { return std::accumulate(power.begin(), power.end(), 0.0); }

const UserAllocation* ResourceAllocation::find(const std::string& id) const {
    for (const auto& u : users)
        if (u.id == id) return &u;
    return nullptr;
}

namespace {

std::vector<int> sorted_indices(std::vector<int> v, int limit, const std::string& what, const std::string& user) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
    if (!v.empty() && (v.front() < 1 || v.back() > limit))
        fail(ErrorCode::out_of_range, "user '" + user + "' requests " + what + " outside 1.." + std::to_string(limit));
    return v;
}

}  // namespace

ResourceAllocation allocate_resources(const std::vector<UserRequest>& users, int N, int K) {
    if (N < 1 || K < 1) fail(ErrorCode::invalid_argument, "N and K must be at least 1");
    ResourceAllocation alloc;
    alloc.total_subcarriers = N;
    alloc.total_symbols = K;
    for (const auto& req : users) {
        if (!(req.power_budget >= 0.0)) fail(ErrorCode::invalid_argument, "negative power budget");
        UserAllocation u;
        u.id = req.id;
        u.subcarriers = sorted_indices(req.subcarriers, N, "subcarriers", req.id);
        u.symbols = sorted_indices(req.symbols, K, "symbols", req.id);
        u.power_budget = req.power_budget;
        const std::size_t count = u.resource_count();
        if (req.power) {
            if (req.power->size() != count)
                fail(ErrorCode::shape_mismatch, "user '" + req.id + "' power list does not match |R_q|");
            for (double p : *req.power)
                if (!(p >= 0.0)) fail(ErrorCode::invalid_argument, "negative power factor");
            u.power = *req.power;
            if (u.total_power() > req.power_budget)
                fail(ErrorCode::power_budget, "user '" + req.id + "' exceeds its power budget");
        } else if (count > 0) {
            double share = req.power_budget / static_cast<double>(count);
            u.power.assign(count, share);
            // Rounding of the sum may overshoot the budget by a few ulps; shrink the share until it fits.
            double total = u.total_power();
            while (total > req.power_budget) {
                share = std::nextafter(share, 0.0);
                std::fill(u.power.begin(), u.power.end(), share);
                total = u.total_power();
            }
        }
        alloc.users.push_back(std::move(u));
    }
    return alloc;
}

}  // namespace dtwin
