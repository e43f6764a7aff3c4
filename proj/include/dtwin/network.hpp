#pragma once

#include "dtwin/geometry.hpp"
#include "dtwin/raytrace.hpp"
#include "dtwin/scene.hpp"

#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace dtwin {

using NodeIndex = std::size_t;

/// Uniform linear array along the body x-axis of its terminal, rotated by the boresight yaw.
struct ArrayConfig {
    int num_elements = 1;
    double spacing = 0.0;    // meters
    double boresight = 0.0;  // radians, yaw offset of the array broadside from the body x-axis
};

/// Half-wavelength ULA with the given element count.
ArrayConfig half_wavelength_array(int num_elements, double carrier_freq, double boresight = 0.0);

struct NodeRoles {
    bool tx = false;
    bool rx = false;
    bool virtual_scatterer = false;
};

struct NodeDescriptor {
    std::string id;
    NodeRoles roles;
    ArrayConfig array;
    Pose pose;
    double reflection_coeff = 0.0;  // virtual scatterers only
    std::string illuminator;        // virtual scatterers only; empty means the receiver illuminates (monostatic)
};

/// Undirected graph of transmitters and receivers. Immutable; mutation returns a new graph.
class NetworkGraph {
public:
    [[nodiscard]] std::size_t size() const { return nodes_.size(); }
    [[nodiscard]] const NodeDescriptor& node(NodeIndex i) const { return nodes_.at(i); }
    [[nodiscard]] const std::vector<NodeDescriptor>& nodes() const { return nodes_; }
    [[nodiscard]] NodeIndex index_of(const std::string& id) const;
    [[nodiscard]] bool contains(const std::string& id) const { return index_.contains(id); }
    [[nodiscard]] bool adjacent(NodeIndex a, NodeIndex b) const { return edges_.contains({a, b}); }

    /// Both orientations of every edge.
    [[nodiscard]] const std::set<std::pair<NodeIndex, NodeIndex>>& edges() const { return edges_; }

    [[nodiscard]] std::vector<NodeIndex> transmitters() const;
    [[nodiscard]] std::vector<NodeIndex> receivers() const;

private:
    friend NetworkGraph build_network(std::vector<NodeDescriptor>, const std::vector<std::pair<std::string, std::string>>&);

    std::vector<NodeDescriptor> nodes_;
    std::map<std::string, NodeIndex> index_;
    std::set<std::pair<NodeIndex, NodeIndex>> edges_;
};

NetworkGraph build_network(std::vector<NodeDescriptor> nodes,
                           const std::vector<std::pair<std::string, std::string>>& edges);

/// Transmitters adjacent to v (the incoming edge set).
std::set<NodeIndex> incoming_edges(const NetworkGraph& graph, NodeIndex v);
std::set<std::string> incoming_edges(const NetworkGraph& graph, const std::string& v);

/// Adds a dummy transmitter that re-radiates what impinges on it, linked to `receivers`.
NetworkGraph add_virtual_scatterer(const NetworkGraph& graph, const Aabb& bounds, const std::string& id,
                                   const Vec3& position, const Material& reflection_profile,
                                   const std::vector<std::string>& receivers);

/// Two-hop paths source -> scatterer -> receiver. Each composite path multiplies hop gains by the
/// scatterer coefficient and adds hop delays and Doppler shifts; the repeater adds no processing delay.
PathSet scatterer_paths(const TracingScene& scene, const Pose& source, const NodeDescriptor& scatterer,
                        const Pose& receiver, const RayTraceOptions& options, double carrier_freq);

struct UserRequest {
    std::string id;
    std::vector<int> subcarriers;  // 1-based, within 1..N
    std::vector<int> symbols;      // 1-based, within 1..K
    double power_budget = 0.0;     // P_q, watts
    std::optional<std::vector<double>> power;  // explicit p_qnk, row-major over (sorted n, sorted k)
};

struct UserAllocation {
    std::string id;
    std::vector<int> subcarriers;  // sorted, unique
    std::vector<int> symbols;      // sorted, unique
    double power_budget = 0.0;
    std::vector<double> power;  // |N_q| x |K_q|, row-major

    [[nodiscard]] std::size_t resource_count() const { return subcarriers.size() * symbols.size(); }
    [[nodiscard]] bool occupies(int n, int k) const;
    /// p_qnk, zero for unoccupied elements.
    [[nodiscard]] double power_at(int n, int k) const;
    [[nodiscard]] double total_power() const;
};

struct ResourceAllocation {
    int total_subcarriers = 0;  // N
    int total_symbols = 0;      // K
    std::vector<UserAllocation> users;

    [[nodiscard]] const UserAllocation* find(const std::string& id) const;
};

/// Builds R_q = N_q x K_q per user; default power split is uniform, p = P_q / |R_q|.
/// Overlapping user resource sets are allowed.
ResourceAllocation allocate_resources(const std::vector<UserRequest>& users, int N, int K);

}  // namespace dtwin
