#pragma once

#include "coapcc/cc_policy.hpp"
#include "coapcc/event_queue.hpp"
#include "coapcc/message_layer.hpp"
#include "coapcc/metrics.hpp"
#include "coapcc/radio_mac.hpp"
#include "coapcc/topology.hpp"

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <memory>
#include <vector>

namespace coapcc {

enum class TrafficMode : std::uint8_t { Periodic, Poisson };

std::string_view to_string(TrafficMode mode);
TrafficMode parse_traffic_mode(std::string_view name);

struct TrafficSpec {
    double offered_load_kbps = 1.0; // network-wide
    std::uint32_t message_size = kRequestSize;
    std::size_t clients = 1;
    TrafficMode mode = TrafficMode::Periodic;

    void validate() const;
};

/// Mean per-client request interval that yields the network-wide offered load.
double per_node_interval(const TrafficSpec& spec);

struct Scenario {
    Topology topology = build_grid(6);
    cc::PolicyKind policy = cc::PolicyKind::DefaultCoap;
    MessageLayerParams message;
    RadioParams radio;
    MacParams mac;
    double offered_load_kbps = 1.0;
    TrafficMode traffic_mode = TrafficMode::Periodic;
    double warmup_s = 60.0;
    double duration_s = 900.0;
    std::uint64_t seed = 1;

    // Optional newline-delimited JSON traces.
    std::ostream* event_trace = nullptr;
    std::ostream* exchange_trace = nullptr;
    // Extra hooks, mainly for tests.
    std::function<void(const ExchangeEvent&)> exchange_observer;
    std::function<void(const EventRecord&)> event_observer;

    void validate() const;
};

/// One simulation instance. Single-threaded; owns all of its state.
class Simulator {
public:
    explicit Simulator(Scenario scenario);
    ~Simulator();

    Simulator(const Simulator&) = delete;
    Simulator& operator=(const Simulator&) = delete;

    /// Runs warm-up plus the measurement window and returns its metrics.
    /// Throws std::logic_error on an internal invariant violation.
    MetricsRecord run();

    const Scenario& scenario() const { return scenario_; }
    const RouteTable& routes() const { return routes_; }
    const RadioMac& mac() const { return *mac_; }
    const CoapEndpoint& endpoint(NodeId node) const { return *endpoints_.at(node); }
    EventQueue& queue() { return queue_; }
    SimTime warmup_end() const { return from_seconds(scenario_.warmup_s); }
    SimTime sim_end() const { return from_seconds(scenario_.warmup_s + scenario_.duration_s); }

private:
    void send(NodeId node, const Message& message);
    void deliver(NodeId receiver, const Frame& frame);
    void start_traffic();
    void schedule_request(NodeId client, SimTime at, double interval, RandomStream& rng);
    void on_exchange_event(const ExchangeEvent& e);

    Scenario scenario_;
    RouteTable routes_;
    EventQueue queue_;
    std::unique_ptr<RadioMac> mac_;
    std::vector<std::unique_ptr<CoapEndpoint>> endpoints_;
    std::vector<RandomStream> traffic_rng_;
    RequestLedger ledger_;
    NodeId sink_ = 0;
    bool ran_ = false;
};

/// Convenience wrapper: build, run, return metrics.
MetricsRecord run(const Scenario& scenario);

} // namespace coapcc
