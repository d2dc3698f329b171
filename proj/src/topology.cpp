#include "coapcc/topology.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <sstream>

namespace coapcc {

std::string_view to_string(Role role) {
    switch (role) {
    case Role::Client: return "client";
    case Role::PrimarySink: return "primary_sink";
    case Role::SecondarySink: return "secondary_sink";
    case Role::BorderRelay: return "border_relay";
    case Role::Forwarder: return "forwarder";
    }
    return "?";
}

std::string_view to_string(TopologyKind kind) {
    switch (kind) {
    case TopologyKind::Chain: return "chain";
    case TopologyKind::Dumbbell: return "dumbbell";
    case TopologyKind::Grid6: return "grid6";
    case TopologyKind::Grid7: return "grid7";
    }
    return "?";
}

TopologyKind parse_topology(std::string_view name) {
    if (name == "chain") return TopologyKind::Chain;
    if (name == "dumbbell") return TopologyKind::Dumbbell;
    if (name == "grid6") return TopologyKind::Grid6;
    if (name == "grid7") return TopologyKind::Grid7;
    throw std::invalid_argument("unknown topology '" + std::string(name) +
                                "' (expected chain, dumbbell, grid6 or grid7)");
}

namespace {

NodeId only(const Topology& t, Role role) {
    const auto ids = t.with_role(role);
    if (ids.size() != 1) {
        throw ConfigError("topology '" + t.name + "' must have exactly one " +
                          std::string(to_string(role)) + ", found " + std::to_string(ids.size()));
    }
    return ids.front();
}

} // namespace

NodeId Topology::primary_sink() const { return only(*this, Role::PrimarySink); }
NodeId Topology::border_relay() const { return only(*this, Role::BorderRelay); }
std::vector<NodeId> Topology::clients() const { return with_role(Role::Client); }

std::vector<NodeId> Topology::with_role(Role role) const {
    std::vector<NodeId> out;
    for (const auto& n : nodes)
        if (n.role == role) out.push_back(n.id);
    return out;
}

Topology build_chain() {
    Topology t;
    t.name = "chain";
    for (NodeId i = 0; i < 17; ++i) {
        t.nodes.push_back({i, kGridPitch * i, 0.0, Role::Client});
    }
    t.nodes[0].role = Role::PrimarySink;
    t.nodes[8].role = Role::BorderRelay; // 9th of 17
    return t;
}

Topology build_dumbbell() {
    // Two 3x3 clusters joined by a three-node bridge along y = 10 m.
    Topology t;
    t.name = "dumbbell";
    auto add = [&t](double x, double y, Role role) {
        t.nodes.push_back({static_cast<NodeId>(t.nodes.size()), x, y, role});
    };
    for (int row = 0; row < 3; ++row)
        for (int col = 0; col < 3; ++col) add(kGridPitch * col, kGridPitch * row, Role::Client);
    for (int b = 0; b < 3; ++b)
        add(kGridPitch * (3 + b), kGridPitch, b == 1 ? Role::BorderRelay : Role::Forwarder);
    for (int row = 0; row < 3; ++row)
        for (int col = 0; col < 3; ++col) {
            const bool center = row == 1 && col == 1;
            add(kGridPitch * (6 + col), kGridPitch * row, center ? Role::PrimarySink : Role::Forwarder);
        }
    return t;
}

Topology build_grid(int side) {
    if (side != 6 && side != 7) {
        throw std::invalid_argument("grid side must be 6 or 7, got " + std::to_string(side));
    }
    Topology t;
    t.name = "grid" + std::to_string(side);
    for (int row = 0; row < side; ++row)
        for (int col = 0; col < side; ++col) {
            t.nodes.push_back({static_cast<NodeId>(row * side + col), kGridPitch * col,
                               kGridPitch * row, Role::Client});
        }
    // 7x7: exact center (3,3). 6x6 has no center cell; use (3,3) as well.
    const int relay = 3 * side + 3;
    t.nodes[relay].role = Role::BorderRelay;
    t.nodes[relay + 1].role = Role::PrimarySink; // east neighbor
    return t;
}

Topology build_topology(TopologyKind kind) {
    switch (kind) {
    case TopologyKind::Chain: return build_chain();
    case TopologyKind::Dumbbell: return build_dumbbell();
    case TopologyKind::Grid6: return build_grid(6);
    case TopologyKind::Grid7: return build_grid(7);
    }
    throw std::invalid_argument("bad topology kind");
}

double distance(const NodeInfo& a, const NodeInfo& b) {
    return std::hypot(a.x - b.x, a.y - b.y);
}

std::vector<NodeId> neighbors(const Topology& topology, NodeId node, double range) {
    std::vector<NodeId> out;
    const auto& self = topology.nodes.at(node);
    for (const auto& other : topology.nodes) {
        if (other.id != node && distance(self, other) <= range) out.push_back(other.id);
    }
    return out;
}

void override_roles(Topology& topology, std::optional<NodeId> sink, std::optional<NodeId> relay,
                    const std::optional<std::vector<NodeId>>& secondary_sinks) {
    auto check = [&](NodeId id) {
        if (id >= topology.size()) {
            throw ConfigError("node id " + std::to_string(id) + " out of range for topology '" +
                              topology.name + "'");
        }
    };
    auto reassign = [&](Role role, NodeId id) {
        check(id);
        for (auto& n : topology.nodes)
            if (n.role == role) n.role = Role::Client;
        topology.nodes[id].role = role;
    };
    if (sink) reassign(Role::PrimarySink, *sink);
    if (relay) {
        if (topology.nodes.at(*relay).role == Role::PrimarySink) {
            throw ConfigError("relay and primary sink must be different nodes");
        }
        reassign(Role::BorderRelay, *relay);
    }
    if (secondary_sinks) {
        for (auto& n : topology.nodes)
            if (n.role == Role::SecondarySink) n.role = Role::Client;
        for (NodeId id : *secondary_sinks) {
            check(id);
            if (topology.nodes[id].role != Role::Client && topology.nodes[id].role != Role::Forwarder) {
                throw ConfigError("secondary sink " + std::to_string(id) +
                                  " collides with the sink or relay");
            }
            topology.nodes[id].role = Role::SecondarySink;
        }
    }
    (void)topology.primary_sink();
    (void)topology.border_relay();
}

RouteTable::RouteTable(std::vector<NodeId> parent, std::vector<int> hops)
    : n_(parent.size()), parent_(std::move(parent)), hops_(std::move(hops)),
      next_(n_ * n_, kNoRoute) {
    // ancestors[v] = v, parent(v), ..., root
    std::vector<std::vector<NodeId>> ancestors(n_);
    for (NodeId v = 0; v < n_; ++v) {
        for (NodeId u = v; u != kNoRoute; u = parent_[u]) ancestors[v].push_back(u);
    }
    for (NodeId from = 0; from < n_; ++from) {
        for (NodeId to = 0; to < n_; ++to) {
            if (from == to) continue;
            // If `from` is an ancestor of `to`, step down toward `to`; else go up.
            const auto& path = ancestors[to];
            auto it = std::find(path.begin(), path.end(), from);
            next_[from * n_ + to] = it != path.end() ? *(it - 1) : parent_[from];
        }
    }
}

RouteTable compute_routes(const Topology& topology, double tx_range) {
    const std::size_t n = topology.size();
    const NodeId root = topology.primary_sink();
    std::vector<std::vector<NodeId>> adj(n);
    for (NodeId v = 0; v < n; ++v) adj[v] = neighbors(topology, v, tx_range);

    std::vector<int> hops(n, -1);
    std::deque<NodeId> frontier{root};
    hops[root] = 0;
    while (!frontier.empty()) {
        const NodeId v = frontier.front();
        frontier.pop_front();
        for (NodeId u : adj[v]) {
            if (hops[u] < 0) {
                hops[u] = hops[v] + 1;
                frontier.push_back(u);
            }
        }
    }

    std::vector<NodeId> parent(n, kNoRoute);
    for (NodeId v = 0; v < n; ++v) {
        if (hops[v] < 0) {
            throw ConfigError("node " + std::to_string(v) + " of topology '" + topology.name +
                              "' cannot reach the primary sink");
        }
        if (v == root) continue;
        for (NodeId u : adj[v]) { // ascending ids
            if (hops[u] == hops[v] - 1) {
                parent[v] = u;
                break;
            }
        }
    }
    return RouteTable(std::move(parent), std::move(hops));
}

std::string export_text(const Topology& topology, const RouteTable& routes) {
    std::ostringstream out;
    out << "# id x y role next_hop\n";
    for (const auto& n : topology.nodes) {
        out << n.id << ' ' << n.x << ' ' << n.y << ' ' << to_string(n.role) << ' ';
        if (routes.parent(n.id) == kNoRoute) {
            out << '-';
        } else {
            out << routes.parent(n.id);
        }
        out << '\n';
    }
    return out.str();
}

} // namespace coapcc
