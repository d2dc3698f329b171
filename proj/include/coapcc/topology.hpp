#pragma once

#include "coapcc/time.hpp"

#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace coapcc {

enum class Role : std::uint8_t {
    Client,        // originates CON requests toward the primary sink
    PrimarySink,   // destination endpoint of all requests
    SecondarySink, // notification sink, idle in the constant-traffic scenario
    BorderRelay,   // routing root stand-in; forwards only
    Forwarder,     // plain mesh node; forwards only
};

enum class TopologyKind : std::uint8_t { Chain, Dumbbell, Grid6, Grid7 };

std::string_view to_string(Role role);
std::string_view to_string(TopologyKind kind);
/// "chain", "dumbbell", "grid6", "grid7"; throws std::invalid_argument otherwise.
TopologyKind parse_topology(std::string_view name);

struct NodeInfo {
    NodeId id = 0;
    double x = 0.0; // meters
    double y = 0.0;
    Role role = Role::Client;
};

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct Topology {
    std::string name;
    std::vector<NodeInfo> nodes; // nodes[i].id == i

    std::size_t size() const { return nodes.size(); }
    NodeId primary_sink() const;
    NodeId border_relay() const;
    std::vector<NodeId> clients() const;
    std::vector<NodeId> with_role(Role role) const;
};

inline constexpr double kGridPitch = 10.0;

Topology build_chain();
Topology build_dumbbell();
/// side must be 6 or 7.
Topology build_grid(int side);
Topology build_topology(TopologyKind kind);

double distance(const NodeInfo& a, const NodeInfo& b);

/// Node ids within `range` meters of `node` (excluding itself), ascending.
std::vector<NodeId> neighbors(const Topology& topology, NodeId node, double range);

/// Reassigns the sink / relay / secondary sinks. Displaced nodes become clients.
void override_roles(Topology& topology, std::optional<NodeId> sink, std::optional<NodeId> relay,
                    const std::optional<std::vector<NodeId>>& secondary_sinks);

inline constexpr NodeId kNoRoute = std::numeric_limits<NodeId>::max();

/// Static shortest-path tree rooted at the primary sink.
class RouteTable {
public:
    RouteTable() = default;
    RouteTable(std::vector<NodeId> parent, std::vector<int> hops);

    /// Next hop from `from` toward `to` along the tree; kNoRoute when from == to.
    NodeId next_hop(NodeId from, NodeId to) const { return next_[from * n_ + to]; }
    NodeId parent(NodeId node) const { return parent_[node]; }
    /// Hops to the root.
    int hops(NodeId node) const { return hops_[node]; }
    std::size_t size() const { return n_; }

private:
    std::size_t n_ = 0;
    std::vector<NodeId> parent_;
    std::vector<int> hops_;
    std::vector<NodeId> next_; // n_ x n_
};

/// BFS over the tx_range adjacency; the parent of each node is its
/// lowest-id neighbor one hop closer to the sink. Throws ConfigError if a
/// node cannot reach the sink.
RouteTable compute_routes(const Topology& topology, double tx_range);

/// One line per node: "id x y role next_hop" (next_hop toward the sink, '-' at the sink).
std::string export_text(const Topology& topology, const RouteTable& routes);

} // namespace coapcc
