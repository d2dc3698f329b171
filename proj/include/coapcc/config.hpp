#pragma once

#include "coapcc/cc_policy.hpp"
#include "coapcc/message_layer.hpp"
#include "coapcc/radio_mac.hpp"
#include "coapcc/simulator.hpp"
#include "coapcc/topology.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace coapcc {

/// Parse or validation failure; `line()` is 1-based, 0 when not tied to a line.
class ConfigParseError : public std::runtime_error {
public:
    ConfigParseError(int line, std::string detail, std::string source = {});
    int line() const { return line_; }
    const std::string& detail() const { return detail_; }

private:
    int line_;
    std::string detail_;
};

/// A sweep over policy x topology x LDR x offered load x seed, plus the
/// parameter overrides shared by every cell.
struct SweepConfig {
    std::vector<cc::PolicyKind> policies;
    std::vector<TopologyKind> topologies;
    std::vector<double> ldrs{1.0};
    std::vector<double> loads_kbps{1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
    std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5};

    MessageLayerParams message;
    RadioParams radio; // ldr is overridden per cell
    MacParams mac;
    double warmup_s = 60.0;
    double duration_s = 900.0;
    TrafficMode traffic_mode = TrafficMode::Periodic;

    std::optional<NodeId> sink;
    std::optional<NodeId> relay;
    std::optional<std::vector<NodeId>> secondary_sinks;

    std::filesystem::path output_dir = "results";

    std::size_t cell_count() const {
        return policies.size() * topologies.size() * ldrs.size() * loads_kbps.size() * seeds.size();
    }
};

/// YAML document. Required keys: policy, topology. Unknown keys are rejected.
SweepConfig parse_config(std::string_view text);
SweepConfig load_config(const std::filesystem::path& path);

/// The configuration used for the published sweep: every policy, topology
/// and LDR, loads 1..10 kbps, seeds 1..5.
SweepConfig paper_matrix_config();

} // namespace coapcc
