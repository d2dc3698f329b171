#include "coapcc/config.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

namespace coapcc {

namespace {

std::string format_error(int line, const std::string& detail, const std::string& source) {
    std::string out = source.empty() ? "" : source + ": ";
    if (line > 0) out += "line " + std::to_string(line) + ": ";
    return out + detail;
}

} // namespace

ConfigParseError::ConfigParseError(int line, std::string detail, std::string source)
    : std::runtime_error(format_error(line, detail, source)), line_(line),
      detail_(std::move(detail)) {}

namespace {

int line_of(const YAML::Node& node) {
    const auto mark = node.Mark();
    return mark.line >= 0 ? mark.line + 1 : 0;
}

using KeySet = std::set<std::string, std::less<>>;

void reject_unknown(const YAML::Node& map, const KeySet& allowed, const std::string& section) {
    if (!map.IsMap()) throw ConfigParseError(line_of(map), "'" + section + "' must be a mapping");
    for (const auto& kv : map) {
        const auto key = kv.first.as<std::string>();
        if (!allowed.contains(key)) {
            std::string list;
            for (const auto& k : allowed) list += (list.empty() ? "" : ", ") + k;
            throw ConfigParseError(line_of(kv.first), "unknown key '" + key + "' in " + section +
                                                          " (allowed: " + list + ")");
        }
    }
}

template <class T>
T scalar(const YAML::Node& node, const std::string& key, const char* expected) {
    if (!node.IsScalar()) {
        throw ConfigParseError(line_of(node), "'" + key + "' must be " + expected);
    }
    try {
        return node.as<T>();
    } catch (const YAML::Exception&) {
        throw ConfigParseError(line_of(node), "'" + key + "' must be " + expected + ", got '" +
                                                  node.Scalar() + "'");
    }
}

double number(const YAML::Node& node, const std::string& key) {
    return scalar<double>(node, key, "a number");
}

double in_range(const YAML::Node& node, const std::string& key, double lo, double hi,
                bool lo_open = false) {
    const double v = number(node, key);
    const bool ok = (lo_open ? v > lo : v >= lo) && v <= hi;
    if (!ok) {
        std::ostringstream msg;
        msg << "'" << key << "' = " << v << " is out of range " << (lo_open ? "(" : "[") << lo
            << ", " << hi << "]";
        throw ConfigParseError(line_of(node), msg.str());
    }
    return v;
}

long integer(const YAML::Node& node, const std::string& key, long lo, long hi) {
    const long v = scalar<long>(node, key, "an integer");
    if (v < lo || v > hi) {
        throw ConfigParseError(line_of(node), "'" + key + "' = " + std::to_string(v) +
                                                  " is out of range [" + std::to_string(lo) +
                                                  ", " + std::to_string(hi) + "]");
    }
    return v;
}

bool boolean(const YAML::Node& node, const std::string& key) {
    return scalar<bool>(node, key, "true or false");
}

/// A scalar or a non-empty sequence of scalars.
std::vector<YAML::Node> items(const YAML::Node& node, const std::string& key) {
    std::vector<YAML::Node> out;
    if (node.IsScalar()) {
        out.push_back(node);
    } else if (node.IsSequence()) {
        for (const auto& item : node) out.push_back(item);
    }
    if (out.empty()) {
        throw ConfigParseError(line_of(node), "'" + key + "' must be a value or a non-empty list");
    }
    return out;
}

template <class Fn>
void with(const YAML::Node& map, const char* key, Fn&& fn) {
    if (const YAML::Node n = map[key]; n && !n.IsNull()) fn(n);
}

std::vector<cc::PolicyKind> parse_policies(const YAML::Node& node) {
    if (node.IsScalar() && node.Scalar() == "all") {
        return {cc::PolicyKind::DefaultCoap, cc::PolicyKind::Cocoa, cc::PolicyKind::CocoaPlus};
    }
    std::vector<cc::PolicyKind> out;
    for (const auto& item : items(node, "policy")) {
        try {
            out.push_back(cc::parse_policy(scalar<std::string>(item, "policy", "a policy name")));
        } catch (const std::invalid_argument& e) {
            throw ConfigParseError(line_of(item), e.what());
        }
    }
    return out;
}

std::vector<TopologyKind> parse_topologies(const YAML::Node& node) {
    if (node.IsScalar() && node.Scalar() == "all") {
        return {TopologyKind::Chain, TopologyKind::Dumbbell, TopologyKind::Grid6,
                TopologyKind::Grid7};
    }
    std::vector<TopologyKind> out;
    for (const auto& item : items(node, "topology")) {
        try {
            out.push_back(parse_topology(scalar<std::string>(item, "topology", "a topology name")));
        } catch (const std::invalid_argument& e) {
            throw ConfigParseError(line_of(item), e.what());
        }
    }
    return out;
}

template <class T>
void dedupe(std::vector<T>& v) {
    std::vector<T> out;
    for (const auto& x : v)
        if (std::find(out.begin(), out.end(), x) == out.end()) out.push_back(x);
    v = std::move(out);
}

void parse_policy_params(const YAML::Node& n, cc::PolicyParams& p) {
    reject_unknown(n,
                   {"alpha", "beta", "k_strong", "k_weak", "initial_rto_s", "default_rto_min_s",
                    "default_rto_max_s", "base_rto_s", "aging_idle_s", "max_weak_transmissions",
                    "rto_floor_s", "rto_ceiling_s", "dither", "dither_factor"},
                   "policy_params");
    with(n, "alpha", [&](auto v) { p.alpha = in_range(v, "alpha", 0.0, 1.0, true); });
    with(n, "beta", [&](auto v) { p.beta = in_range(v, "beta", 0.0, 1.0, true); });
    with(n, "k_strong", [&](auto v) { p.k_strong = in_range(v, "k_strong", 0.0, 100.0, true); });
    with(n, "k_weak", [&](auto v) { p.k_weak = in_range(v, "k_weak", 0.0, 100.0, true); });
    with(n, "initial_rto_s", [&](auto v) { p.initial_rto = in_range(v, "initial_rto_s", 0.0, 60.0, true); });
    with(n, "default_rto_min_s", [&](auto v) { p.default_rto_min = in_range(v, "default_rto_min_s", 0.0, 60.0, true); });
    with(n, "default_rto_max_s", [&](auto v) { p.default_rto_max = in_range(v, "default_rto_max_s", 0.0, 60.0, true); });
    with(n, "base_rto_s", [&](auto v) { p.base_rto = in_range(v, "base_rto_s", 0.0, 60.0, true); });
    with(n, "aging_idle_s", [&](auto v) { p.aging_idle = in_range(v, "aging_idle_s", 0.0, 3600.0); });
    with(n, "max_weak_transmissions", [&](auto v) {
        p.max_weak_transmissions = static_cast<int>(integer(v, "max_weak_transmissions", 1, 64));
    });
    with(n, "rto_floor_s", [&](auto v) { p.rto_floor = in_range(v, "rto_floor_s", 0.0, 60.0, true); });
    with(n, "rto_ceiling_s", [&](auto v) { p.rto_ceiling = in_range(v, "rto_ceiling_s", 0.0, 3600.0, true); });
    with(n, "dither", [&](auto v) { p.dither = boolean(v, "dither"); });
    with(n, "dither_factor", [&](auto v) { p.dither_factor = in_range(v, "dither_factor", 1.0, 4.0); });
    if (p.default_rto_max < p.default_rto_min) {
        throw ConfigParseError(line_of(n), "default_rto_max_s must be >= default_rto_min_s");
    }
    if (p.rto_ceiling < p.rto_floor) {
        throw ConfigParseError(line_of(n), "rto_ceiling_s must be >= rto_floor_s");
    }
}

void parse_radio(const YAML::Node& n, RadioParams& r) {
    reject_unknown(n, {"tx_range_m", "interference_range_m", "bitrate_bps", "ldr_mode"}, "radio");
    with(n, "tx_range_m", [&](auto v) { r.tx_range = in_range(v, "tx_range_m", 0.0, 1000.0, true); });
    with(n, "interference_range_m", [&](auto v) {
        r.interference_range = in_range(v, "interference_range_m", 0.0, 1000.0, true);
    });
    with(n, "bitrate_bps", [&](auto v) { r.bitrate = in_range(v, "bitrate_bps", 0.0, 1e9, true); });
    with(n, "ldr_mode", [&](auto v) {
        const auto mode = scalar<std::string>(v, "ldr_mode", "per_attempt or compound");
        if (mode == "per_attempt") {
            r.ldr_mode = LdrMode::PerAttempt;
        } else if (mode == "compound") {
            r.ldr_mode = LdrMode::Compound;
        } else {
            throw ConfigParseError(line_of(v), "'ldr_mode' must be per_attempt or compound");
        }
    });
    if (r.interference_range < r.tx_range) {
        throw ConfigParseError(line_of(n), "interference_range_m must be >= tx_range_m");
    }
}

void parse_mac(const YAML::Node& n, MacParams& m) {
    reject_unknown(n,
                   {"buffer_capacity", "link_retries", "csma_retries", "backoff_min_s",
                    "backoff_max_s", "link_overhead_bytes", "rdc_wakeup_interval_s"},
                   "mac");
    with(n, "buffer_capacity", [&](auto v) {
        m.buffer_capacity = static_cast<std::size_t>(integer(v, "buffer_capacity", 1, 1 << 20));
    });
    with(n, "link_retries", [&](auto v) { m.link_retries = static_cast<int>(integer(v, "link_retries", 0, 64)); });
    with(n, "csma_retries", [&](auto v) { m.csma_retries = static_cast<int>(integer(v, "csma_retries", 1, 64)); });
    with(n, "backoff_min_s", [&](auto v) { m.backoff_min = in_range(v, "backoff_min_s", 0.0, 1.0); });
    with(n, "backoff_max_s", [&](auto v) { m.backoff_max = in_range(v, "backoff_max_s", 0.0, 1.0); });
    with(n, "link_overhead_bytes", [&](auto v) {
        m.link_overhead = static_cast<std::uint32_t>(integer(v, "link_overhead_bytes", 0, 1024));
    });
    with(n, "rdc_wakeup_interval_s", [&](auto v) {
        m.rdc_wakeup_interval = in_range(v, "rdc_wakeup_interval_s", 0.0, 1.0);
    });
    if (m.backoff_max < m.backoff_min) {
        throw ConfigParseError(line_of(n), "backoff_max_s must be >= backoff_min_s");
    }
}

void parse_coap(const YAML::Node& n, MessageLayerParams& c) {
    reject_unknown(n, {"max_retransmit", "nstart", "queue_limit", "request_size_bytes", "ack_size_bytes", "dedup_window"},
                   "coap");
    with(n, "max_retransmit", [&](auto v) { c.max_retransmit = static_cast<int>(integer(v, "max_retransmit", 0, 16)); });
    with(n, "nstart", [&](auto v) { c.nstart = static_cast<std::size_t>(integer(v, "nstart", 1, 64)); });
    with(n, "queue_limit", [&](auto v) {
        c.queue_limit = static_cast<std::size_t>(integer(v, "queue_limit", 0, 1'000'000'000));
    });
    with(n, "request_size_bytes", [&](auto v) {
        c.request_size = static_cast<std::uint32_t>(integer(v, "request_size_bytes", 4, 1024));
    });
    with(n, "ack_size_bytes", [&](auto v) {
        c.ack_size = static_cast<std::uint32_t>(integer(v, "ack_size_bytes", 4, 1024));
    });
    with(n, "dedup_window", [&](auto v) {
        c.dedup_window = static_cast<std::size_t>(integer(v, "dedup_window", 1, 65535));
    });
}

void parse_simulation(const YAML::Node& n, SweepConfig& cfg) {
    reject_unknown(n, {"warmup_s", "duration_s", "traffic"}, "simulation");
    with(n, "warmup_s", [&](auto v) { cfg.warmup_s = in_range(v, "warmup_s", 0.0, 86400.0); });
    with(n, "duration_s", [&](auto v) { cfg.duration_s = in_range(v, "duration_s", 0.0, 86400.0, true); });
    with(n, "traffic", [&](auto v) {
        try {
            cfg.traffic_mode = parse_traffic_mode(scalar<std::string>(v, "traffic", "periodic or poisson"));
        } catch (const std::invalid_argument& e) {
            throw ConfigParseError(line_of(v), e.what());
        }
    });
}

void parse_roles(const YAML::Node& n, SweepConfig& cfg) {
    reject_unknown(n, {"sink", "relay", "secondary_sinks"}, "roles");
    auto id = [](const YAML::Node& v, const char* key) {
        return static_cast<NodeId>(integer(v, key, 0, 100000));
    };
    with(n, "sink", [&](auto v) { cfg.sink = id(v, "sink"); });
    with(n, "relay", [&](auto v) { cfg.relay = id(v, "relay"); });
    if (const YAML::Node v = n["secondary_sinks"]; v) {
        std::vector<NodeId> ids;
        if (v.IsSequence()) {
            for (const auto& item : v) ids.push_back(id(item, "secondary_sinks"));
        } else if (!v.IsNull()) {
            ids.push_back(id(v, "secondary_sinks"));
        }
        cfg.secondary_sinks = std::move(ids);
    }
    if (cfg.topologies.size() != 1) {
        throw ConfigParseError(line_of(n), "role overrides require exactly one topology");
    }
    try {
        Topology t = build_topology(cfg.topologies.front());
        override_roles(t, cfg.sink, cfg.relay, cfg.secondary_sinks);
        (void)compute_routes(t, cfg.radio.tx_range);
    } catch (const ConfigError& e) {
        throw ConfigParseError(line_of(n), e.what());
    }
}

} // namespace

SweepConfig parse_config(std::string_view text) {
    YAML::Node root;
    try {
        root = YAML::Load(std::string(text));
    } catch (const YAML::ParserException& e) {
        throw ConfigParseError(e.mark.line + 1, "malformed YAML: " + e.msg);
    }
    if (!root.IsMap()) throw ConfigParseError(1, "configuration must be a mapping");
    reject_unknown(root,
                   {"policy", "topology", "ldr", "loads_kbps", "seeds", "output", "simulation",
                    "policy_params", "radio", "mac", "coap", "roles"},
                   "top level");

    SweepConfig cfg;
    for (const char* required : {"policy", "topology"}) {
        if (!root[required]) {
            throw ConfigParseError(line_of(root), std::string("missing required key '") + required + "'");
        }
    }
    cfg.policies = parse_policies(root["policy"]);
    cfg.topologies = parse_topologies(root["topology"]);
    dedupe(cfg.policies);
    dedupe(cfg.topologies);

    with(root, "ldr", [&](auto n) {
        cfg.ldrs.clear();
        for (const auto& item : items(n, "ldr")) cfg.ldrs.push_back(in_range(item, "ldr", 0.0, 1.0, true));
    });
    with(root, "loads_kbps", [&](auto n) {
        cfg.loads_kbps.clear();
        for (const auto& item : items(n, "loads_kbps"))
            cfg.loads_kbps.push_back(in_range(item, "loads_kbps", 0.1, 20.0));
    });
    with(root, "seeds", [&](auto n) {
        cfg.seeds.clear();
        for (const auto& item : items(n, "seeds"))
            cfg.seeds.push_back(scalar<std::uint64_t>(item, "seeds", "a non-negative integer"));
    });
    dedupe(cfg.ldrs);
    dedupe(cfg.loads_kbps);
    dedupe(cfg.seeds);
    with(root, "output", [&](auto n) {
        cfg.output_dir = scalar<std::string>(n, "output", "a directory path");
    });
    with(root, "simulation", [&](auto n) { parse_simulation(n, cfg); });
    with(root, "policy_params", [&](auto n) { parse_policy_params(n, cfg.message.policy); });
    with(root, "radio", [&](auto n) { parse_radio(n, cfg.radio); });
    with(root, "mac", [&](auto n) { parse_mac(n, cfg.mac); });
    with(root, "coap", [&](auto n) { parse_coap(n, cfg.message); });
    with(root, "roles", [&](auto n) { parse_roles(n, cfg); });

    if (cfg.cell_count() == 0) throw ConfigParseError(0, "sweep matrix is empty");
    return cfg;
}

SweepConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigParseError(0, "cannot open config file '" + path.string() + "'");
    std::ostringstream text;
    text << in.rdbuf();
    try {
        return parse_config(text.str());
    } catch (const ConfigParseError& e) {
        throw ConfigParseError(e.line(), e.detail(), path.string());
    }
}

SweepConfig paper_matrix_config() {
    SweepConfig cfg;
    cfg.policies = {cc::PolicyKind::DefaultCoap, cc::PolicyKind::Cocoa, cc::PolicyKind::CocoaPlus};
    cfg.topologies = {TopologyKind::Chain, TopologyKind::Dumbbell, TopologyKind::Grid6,
                      TopologyKind::Grid7};
    cfg.ldrs = {1.0, 0.5, 0.25};
    return cfg;
}

} // namespace coapcc
