#pragma once

#include "coapcc/event_queue.hpp"
#include "coapcc/message.hpp"
#include "coapcc/random.hpp"
#include "coapcc/topology.hpp"

#include <cstdint>
#include <deque>
#include <functional>
#include <vector>

namespace coapcc {

/// PerAttempt: one Bernoulli(ldr) draw per frame. Compound: separate
/// transmit and receive draws, each with probability ldr.
enum class LdrMode : std::uint8_t { PerAttempt, Compound };

struct RadioParams {
    double tx_range = 10.0;           // meters
    double interference_range = 20.0; // meters
    double ldr = 1.0;
    double bitrate = 250'000.0;       // bits/s
    LdrMode ldr_mode = LdrMode::PerAttempt;

    void validate() const;
};

struct MacParams {
    std::size_t buffer_capacity = 8;
    int link_retries = 3;
    int csma_retries = 8;        // busy channel assessments before a frame is dropped
    double backoff_min = 0.0005; // seconds
    double backoff_max = 0.0025;
    std::uint32_t link_overhead = 25; // bytes added to every CoAP message
    // Radio duty cycling with phase lock: before each link-layer attempt the
    // sender waits U[0, rdc_wakeup_interval] seconds for the receiver's next
    // wake-up. The node is busy meanwhile; the channel is not.
    double rdc_wakeup_interval = 0.125;

    void validate() const;
};

struct Frame {
    NodeId link_source = 0;
    NodeId link_destination = 0;
    Message payload;
    std::uint32_t size = 0; // bytes, payload.size + link overhead
    SimTime enqueued_at = 0;
    int link_attempts = 0;
    int csma_failures = 0;
    bool receiver_awake = false; // RDC wait done for the current link attempt
};

struct MacCounters {
    std::uint64_t enqueued = 0;      // every enqueue_frame call, accepted or not
    std::uint64_t delivered = 0;
    std::uint64_t overflow = 0;
    std::uint64_t csma_drop = 0;
    std::uint64_t link_retry_exhausted = 0;
    std::uint64_t collisions = 0;
    std::uint64_t link_retries = 0;
    std::uint64_t transmissions = 0; // radio transmissions, including retries
    std::uint64_t successes = 0;     // transmissions that reached the receiver

    MacCounters& operator+=(const MacCounters& o);
};

/// Unit-disk radio medium shared by all nodes plus a CSMA MAC per node with a
/// bounded FIFO and link-layer retries.
class RadioMac {
public:
    /// Called at the end of a successful transmission with the receiving node.
    using DeliverFn = std::function<void(NodeId receiver, const Frame& frame)>;

    RadioMac(const Topology& topology, RadioParams radio, MacParams mac, EventQueue& queue,
             std::uint64_t seed, DeliverFn deliver);

    RadioMac(const RadioMac&) = delete;
    RadioMac& operator=(const RadioMac&) = delete;

    Frame make_frame(NodeId from, NodeId to, const Message& message, SimTime now) const;

    /// Returns false (and counts an overflow) when the buffer is full.
    bool enqueue_frame(NodeId node, Frame frame, SimTime now);

    /// Carrier sense, then either transmit the head frame or back off.
    void attempt_transmission(NodeId node, SimTime now);

    /// Pure airtime of `bytes` at the configured bitrate.
    SimTime airtime(std::uint32_t bytes) const;

    bool in_tx_range(NodeId a, NodeId b) const { return tx_range_[a * n_ + b]; }
    bool in_interference_range(NodeId a, NodeId b) const { return interference_[a * n_ + b]; }
    bool transmitting(NodeId node, SimTime now) const;

    const MacCounters& counters(NodeId node) const { return nodes_[node].counters; }
    MacCounters totals() const;
    std::size_t buffer_length(NodeId node) const { return nodes_[node].buffer.size(); }
    std::size_t size() const { return n_; }

    /// enqueued == delivered + overflow + csma_drop + link_retry_exhausted + buffered, per node.
    bool conserves_frames() const;

    const RadioParams& radio_params() const { return radio_; }
    const MacParams& mac_params() const { return mac_; }

private:
    enum class Phase : std::uint8_t { Idle, Waiting, Transmitting };

    struct Transmission {
        NodeId sender;
        SimTime start;
        SimTime end;
    };

    struct NodeState {
        std::deque<Frame> buffer;
        Phase phase = Phase::Idle;
        SimTime tx_start = 0;
        SimTime tx_end = 0;
        MacCounters counters;
        RandomStream delivery;
        RandomStream backoff;
        RandomStream wakeup;
    };

    void schedule_attempt(NodeId node, SimTime at);
    void finish_transmission(NodeId node, SimTime now);
    bool resolve_reception(NodeId sender, const Frame& frame, SimTime start, SimTime end);
    SimTime backoff_delay(NodeId node);
    void prune_history(SimTime now);

    std::size_t n_;
    RadioParams radio_;
    MacParams mac_;
    EventQueue& queue_;
    DeliverFn deliver_;
    std::vector<bool> tx_range_;
    std::vector<bool> interference_;
    std::vector<NodeState> nodes_;
    std::vector<Transmission> history_;
    SimTime longest_transmission_ = 0;
};

} // namespace coapcc
