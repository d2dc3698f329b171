#include "coapcc/simulator.hpp"

#include <nlohmann/json.hpp>

#include <ostream>
#include <stdexcept>

namespace coapcc {

std::string_view to_string(TrafficMode mode) {
    return mode == TrafficMode::Periodic ? "periodic" : "poisson";
}

TrafficMode parse_traffic_mode(std::string_view name) {
    if (name == "periodic") return TrafficMode::Periodic;
    if (name == "poisson") return TrafficMode::Poisson;
    throw std::invalid_argument("unknown traffic mode '" + std::string(name) +
                                "' (expected periodic or poisson)");
}

void TrafficSpec::validate() const {
    if (!(offered_load_kbps >= 0.1 && offered_load_kbps <= 20.0)) {
        throw std::invalid_argument("offered load must be within [0.1, 20] kbps");
    }
    if (message_size == 0) throw std::invalid_argument("message size must be positive");
    if (clients == 0) throw std::invalid_argument("traffic needs at least one client");
}

double per_node_interval(const TrafficSpec& spec) {
    spec.validate();
    return static_cast<double>(spec.clients) * spec.message_size * 8.0 /
           (spec.offered_load_kbps * 1000.0);
}

void Scenario::validate() const {
    radio.validate();
    mac.validate();
    if (!(offered_load_kbps >= 0.1 && offered_load_kbps <= 20.0)) {
        throw std::invalid_argument("offered load must be within [0.1, 20] kbps");
    }
    if (warmup_s < 0.0 || !(duration_s > 0.0)) {
        throw std::invalid_argument("warm-up must be >= 0 and duration > 0");
    }
    (void)topology.primary_sink();
    (void)topology.border_relay();
}

Simulator::Simulator(Scenario scenario) : scenario_(std::move(scenario)) {
    scenario_.validate();
    sink_ = scenario_.topology.primary_sink();
    routes_ = compute_routes(scenario_.topology, scenario_.radio.tx_range);

    const auto seed = scenario_.seed;
    mac_ = std::make_unique<RadioMac>(
        scenario_.topology, scenario_.radio, scenario_.mac, queue_, seed,
        [this](NodeId receiver, const Frame& frame) { deliver(receiver, frame); });

    for (const auto& node : scenario_.topology.nodes) {
        const NodeId id = node.id;
        endpoints_.push_back(std::make_unique<CoapEndpoint>(
            id, scenario_.policy, scenario_.message, queue_,
            RandomStream::derive(seed, id, RandomPurpose::RtoDraw).next_u64(),
            [this, id](const Message& m) { send(id, m); },
            [this](const ExchangeEvent& e) { on_exchange_event(e); }));
        traffic_rng_.push_back(RandomStream::derive(seed, id, RandomPurpose::TrafficInterval));
    }

    if (scenario_.event_trace || scenario_.event_observer) {
        queue_.set_observer([this](const EventRecord& r) {
            if (scenario_.event_observer) scenario_.event_observer(r);
            if (scenario_.event_trace) {
                nlohmann::json j{{"t_ns", r.time}, {"seq", r.sequence},
                                 {"kind", to_string(r.kind)}, {"node", r.node},
                                 {"id", r.subject}};
                *scenario_.event_trace << j.dump() << '\n';
            }
        });
    }
}

Simulator::~Simulator() = default;

void Simulator::send(NodeId node, const Message& message) {
    const NodeId next = routes_.next_hop(node, message.destination);
    if (next == kNoRoute) throw std::logic_error("message addressed to its own sender");
    const SimTime now = queue_.now();
    mac_->enqueue_frame(node, mac_->make_frame(node, next, message, now), now);
}

void Simulator::deliver(NodeId receiver, const Frame& frame) {
    if (frame.payload.destination == receiver) {
        endpoints_[receiver]->on_receive(frame.payload, queue_.now());
    } else {
        send(receiver, frame.payload);
    }
}

void Simulator::on_exchange_event(const ExchangeEvent& e) {
    ledger_.observe(e);
    if (scenario_.exchange_observer) scenario_.exchange_observer(e);
    if (scenario_.exchange_trace) {
        nlohmann::json j{{"t_ns", e.time},      {"event", to_string(e.kind)},
                         {"node", e.node},      {"peer", e.peer},
                         {"mid", e.message_id}, {"serial", e.request_serial},
                         {"tx", e.transmission_count}, {"rto_s", e.rto},
                         {"rtt_s", e.rtt}};
        *scenario_.exchange_trace << j.dump() << '\n';
    }
}

void Simulator::schedule_request(NodeId client, SimTime at, double interval, RandomStream& rng) {
    if (at >= sim_end()) return;
    queue_.schedule(at, EventKind::AppSend, client, 0, [this, client, interval, &rng] {
        const SimTime now = queue_.now();
        endpoints_[client]->submit_request(sink_, now);
        const double gap = scenario_.traffic_mode == TrafficMode::Periodic
                               ? interval
                               : rng.exponential(interval);
        schedule_request(client, now + from_seconds(gap), interval, rng);
    });
}

void Simulator::start_traffic() {
    const auto clients = scenario_.topology.clients();
    if (clients.empty()) return;
    TrafficSpec spec;
    spec.offered_load_kbps = scenario_.offered_load_kbps;
    spec.message_size = scenario_.message.request_size;
    spec.clients = clients.size();
    spec.mode = scenario_.traffic_mode;
    const double interval = per_node_interval(spec);
    const SimTime now = queue_.now();
    for (NodeId c : clients) {
        RandomStream& rng = traffic_rng_[c];
        auto phase = RandomStream::derive(scenario_.seed, c, RandomPurpose::TrafficPhase);
        const double first = spec.mode == TrafficMode::Periodic ? phase.uniform(0.0, interval)
                                                                 : rng.exponential(interval);
        schedule_request(c, now + from_seconds(first), interval, rng);
    }
}

MetricsRecord Simulator::run() {
    if (ran_) throw std::logic_error("a Simulator instance can only run once");
    ran_ = true;

    queue_.schedule(warmup_end(), EventKind::WarmupEnd, 0, 0, [this] { start_traffic(); });
    queue_.schedule(sim_end(), EventKind::SimEnd, 0, 0, [this] { queue_.stop(); });
    queue_.run_until(sim_end());

    MetricsRecord m = collect_metrics(ledger_.records(), scenario_.offered_load_kbps,
                                      scenario_.duration_s, scenario_.message.request_size);
    m.retransmissions = ledger_.retransmissions();
    m.stale_acks = ledger_.stale_acks();
    m.duplicates = ledger_.duplicates();
    m.mac = mac_->totals();
    m.mac_overflows = m.mac.overflow;
    m.frames_conserved = mac_->conserves_frames();
    m.events_executed = queue_.executed();
    if (!m.frames_conserved) throw std::logic_error("MAC frame conservation violated");
    if (m.acked + m.failed_exchanges + m.pending_at_end != m.requests_sent ||
        m.requests_received > m.requests_sent) {
        throw std::logic_error("request accounting violated");
    }
    return m;
}

MetricsRecord run(const Scenario& scenario) {
    Simulator sim(scenario);
    return sim.run();
}

} // namespace coapcc
