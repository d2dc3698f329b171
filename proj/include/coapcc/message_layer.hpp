#pragma once

#include "coapcc/cc_policy.hpp"
#include "coapcc/event_queue.hpp"
#include "coapcc/message.hpp"

#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <optional>
#include <vector>

namespace coapcc {

enum class ExchangeState : std::uint8_t { Queued, InFlight, Acked, Failed };

struct Exchange {
    Message message;
    int transmission_count = 0; // 0 while queued
    double rto_init = 0.0;
    double rto_current = 0.0;
    SimTime first_tx_time = -1;
    EventId deadline_event = 0;
    ExchangeState state = ExchangeState::Queued;
};

/// Lifecycle notifications emitted by an endpoint. They drive metrics and
/// the optional per-exchange trace.
struct ExchangeEvent {
    enum class Kind : std::uint8_t {
        Submit,     // request created (queued or started)
        Transmit,   // first transmission
        Retransmit,
        Acked,
        Failed,
        Declined,   // request refused: NSTART slot busy and waiting queue full
        Received,   // first copy of a request at its destination
        Duplicate,  // retransmitted copy at the destination, re-ACKed
        StaleAck,   // ACK with no matching in-flight exchange
        Anomaly,    // NON/RST, not used by this workload
    };
    Kind kind;
    SimTime time = 0;
    NodeId node = 0;    // endpoint that emitted the event
    NodeId peer = 0;
    std::uint16_t message_id = 0;
    std::uint64_t request_serial = 0;
    SimTime created_at = 0;
    int transmission_count = 0;
    double rto = 0.0;
    double rtt = 0.0;
};

std::string_view to_string(ExchangeEvent::Kind kind);

struct MessageLayerParams {
    int max_retransmit = 4;
    std::size_t nstart = 1;
    // Requests that find every NSTART slot busy wait in a FIFO of this many
    // entries; beyond that they are declined. 0 declines immediately.
    std::size_t queue_limit = 0;
    std::uint32_t request_size = kRequestSize;
    std::uint32_t ack_size = kAckSize;
    std::size_t dedup_window = 64;
    cc::PolicyParams policy;
};

struct MessageCounters {
    std::uint64_t submitted = 0;
    std::uint64_t acked = 0;
    std::uint64_t failed = 0;
    std::uint64_t declined = 0;
    std::uint64_t retransmissions = 0;
    std::uint64_t received_unique = 0;
    std::uint64_t duplicates = 0;
    std::uint64_t stale_acks = 0;
    std::uint64_t anomalies = 0;
};

/// CoAP reliability layer of one node: CON/ACK exchanges, NSTART gating and
/// retransmission timers, with one congestion-control state per peer.
class CoapEndpoint {
public:
    using SendFn = std::function<void(const Message&)>;
    using EventSink = std::function<void(const ExchangeEvent&)>;

    CoapEndpoint(NodeId self, cc::PolicyKind policy, MessageLayerParams params, EventQueue& queue,
                 std::uint64_t seed, SendFn send, EventSink sink = {});

    CoapEndpoint(const CoapEndpoint&) = delete;
    CoapEndpoint& operator=(const CoapEndpoint&) = delete;

    /// Creates a CON request to `destination`; starts it now if an NSTART
    /// slot is free, otherwise queues it, or declines it (state Failed, never
    /// transmitted) when the waiting queue is full. Returns a snapshot.
    Exchange submit_request(NodeId destination, SimTime now);

    void on_rto_expiry(NodeId destination, std::uint16_t message_id, SimTime now);

    /// Handles a message addressed to this node.
    void on_receive(const Message& message, SimTime now);

    std::uint16_t allocate_message_id(NodeId destination);

    NodeId id() const { return self_; }
    cc::PolicyKind policy() const { return policy_; }
    const MessageCounters& counters() const { return counters_; }
    std::size_t in_flight(NodeId destination) const;
    std::size_t waiting(NodeId destination) const;
    std::optional<Exchange> find_exchange(NodeId destination, std::uint16_t message_id) const;
    /// nullptr until the first exchange toward `destination`.
    const cc::CcState* cc_state(NodeId destination) const;

private:
    struct Peer {
        cc::CcState cc;
        std::vector<Exchange> in_flight;
        std::deque<Exchange> waiting;
        std::deque<std::uint16_t> recent_requests; // dedup, as a server
    };

    Peer& peer(NodeId id);
    void start(Peer& p, Exchange ex, SimTime now);
    void schedule_deadline(Exchange& ex, SimTime now);
    void finish(Peer& p, std::size_t index, ExchangeState outcome, SimTime now);
    void promote(Peer& p, SimTime now);
    void emit(ExchangeEvent::Kind kind, const Exchange& ex, SimTime now, double rtt = 0.0);
    void handle_request(const Message& message, SimTime now);
    void handle_ack(const Message& message, SimTime now);
    bool id_in_use(const Peer& p, std::uint16_t id) const;

    NodeId self_;
    cc::PolicyKind policy_;
    MessageLayerParams params_;
    EventQueue& queue_;
    std::uint64_t seed_;
    SendFn send_;
    EventSink sink_;
    std::map<NodeId, Peer> peers_;
    std::uint16_t next_message_id_ = 0;
    std::uint64_t next_serial_ = 0;
    MessageCounters counters_;
};

} // namespace coapcc
