#include "coapcc/radio_mac.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace coapcc {

void RadioParams::validate() const {
    if (!(tx_range > 0.0)) throw std::invalid_argument("tx_range must be positive");
    if (interference_range < tx_range) {
        throw std::invalid_argument("interference_range must be >= tx_range");
    }
    if (!(ldr > 0.0 && ldr <= 1.0)) throw std::invalid_argument("ldr must be in (0, 1]");
    if (!(bitrate > 0.0)) throw std::invalid_argument("bitrate must be positive");
}

void MacParams::validate() const {
    if (buffer_capacity < 1) throw std::invalid_argument("MAC buffer capacity must be >= 1");
    if (link_retries < 0 || csma_retries < 1) {
        throw std::invalid_argument("link_retries must be >= 0 and csma_retries >= 1");
    }
    if (!(backoff_min >= 0.0 && backoff_max >= backoff_min)) {
        throw std::invalid_argument("backoff window must satisfy 0 <= min <= max");
    }
    if (rdc_wakeup_interval < 0.0) throw std::invalid_argument("rdc_wakeup_interval must be >= 0");
}

MacCounters& MacCounters::operator+=(const MacCounters& o) {
    enqueued += o.enqueued;
    delivered += o.delivered;
    overflow += o.overflow;
    csma_drop += o.csma_drop;
    link_retry_exhausted += o.link_retry_exhausted;
    collisions += o.collisions;
    link_retries += o.link_retries;
    transmissions += o.transmissions;
    successes += o.successes;
    return *this;
}

RadioMac::RadioMac(const Topology& topology, RadioParams radio, MacParams mac, EventQueue& queue,
                   std::uint64_t seed, DeliverFn deliver)
    : n_(topology.size()), radio_(radio), mac_(mac), queue_(queue), deliver_(std::move(deliver)),
      tx_range_(n_ * n_), interference_(n_ * n_), nodes_(n_) {
    radio_.validate();
    mac_.validate();
    for (NodeId a = 0; a < n_; ++a) {
        for (NodeId b = 0; b < n_; ++b) {
            const double d = distance(topology.nodes[a], topology.nodes[b]);
            tx_range_[a * n_ + b] = a != b && d <= radio_.tx_range;
            interference_[a * n_ + b] = d <= radio_.interference_range; // includes a == b
        }
        nodes_[a].delivery = RandomStream::derive(seed, a, RandomPurpose::LinkDelivery);
        nodes_[a].backoff = RandomStream::derive(seed, a, RandomPurpose::CsmaBackoff);
        nodes_[a].wakeup = RandomStream::derive(seed, a, RandomPurpose::RdcWakeup);
    }
}

SimTime RadioMac::airtime(std::uint32_t bytes) const {
    return from_seconds(static_cast<double>(bytes) * 8.0 / radio_.bitrate);
}

Frame RadioMac::make_frame(NodeId from, NodeId to, const Message& message, SimTime now) const {
    Frame f;
    f.link_source = from;
    f.link_destination = to;
    f.payload = message;
    f.size = message.size + mac_.link_overhead;
    f.enqueued_at = now;
    return f;
}

bool RadioMac::transmitting(NodeId node, SimTime now) const {
    const auto& s = nodes_[node];
    return s.phase == Phase::Transmitting && s.tx_start <= now && now < s.tx_end;
}

MacCounters RadioMac::totals() const {
    MacCounters sum;
    for (const auto& s : nodes_) sum += s.counters;
    return sum;
}

bool RadioMac::conserves_frames() const {
    return std::all_of(nodes_.begin(), nodes_.end(), [](const NodeState& s) {
        const auto& c = s.counters;
        return c.enqueued ==
               c.delivered + c.overflow + c.csma_drop + c.link_retry_exhausted + s.buffer.size();
    });
}

bool RadioMac::enqueue_frame(NodeId node, Frame frame, SimTime now) {
    NodeState& s = nodes_.at(node);
    ++s.counters.enqueued;
    if (s.buffer.size() >= mac_.buffer_capacity) {
        ++s.counters.overflow;
        return false;
    }
    s.buffer.push_back(std::move(frame));
    if (s.phase == Phase::Idle) schedule_attempt(node, now);
    return true;
}

void RadioMac::schedule_attempt(NodeId node, SimTime at) {
    nodes_[node].phase = Phase::Waiting;
    queue_.schedule(at, EventKind::MacAttempt, node, 0,
                    [this, node] { attempt_transmission(node, queue_.now()); });
}

SimTime RadioMac::backoff_delay(NodeId node) {
    return from_seconds(nodes_[node].backoff.uniform(mac_.backoff_min, mac_.backoff_max));
}

void RadioMac::attempt_transmission(NodeId node, SimTime now) {
    NodeState& s = nodes_[node];
    if (s.buffer.empty()) {
        s.phase = Phase::Idle;
        return;
    }
    if (s.phase == Phase::Transmitting) {
        throw std::logic_error("node " + std::to_string(node) + " attempted to transmit twice");
    }

    Frame& head = s.buffer.front();
    if (!head.receiver_awake && mac_.rdc_wakeup_interval > 0.0) {
        head.receiver_awake = true;
        schedule_attempt(node, now + from_seconds(s.wakeup.uniform(0.0, mac_.rdc_wakeup_interval)));
        return;
    }

    const bool busy = std::any_of(history_.begin(), history_.end(), [&](const Transmission& t) {
        return t.sender != node && t.start <= now && now < t.end &&
               in_interference_range(t.sender, node);
    });
    if (busy) {
        if (++head.csma_failures >= mac_.csma_retries) {
            s.buffer.pop_front();
            ++s.counters.csma_drop;
            if (s.buffer.empty()) {
                s.phase = Phase::Idle;
                return;
            }
        }
        schedule_attempt(node, now + backoff_delay(node));
        return;
    }

    const SimTime duration = airtime(head.size);
    s.phase = Phase::Transmitting;
    s.tx_start = now;
    s.tx_end = now + duration;
    ++s.counters.transmissions;
    history_.push_back({node, now, s.tx_end});
    longest_transmission_ = std::max(longest_transmission_, duration);
    queue_.schedule(s.tx_end, EventKind::TxEnd, node, head.payload.message_id,
                    [this, node] { finish_transmission(node, queue_.now()); });
}

bool RadioMac::resolve_reception(NodeId sender, const Frame& frame, SimTime start, SimTime end) {
    NodeState& s = nodes_[sender];
    const NodeId dest = frame.link_destination;
    if (dest >= n_ || !in_tx_range(sender, dest)) return false;

    const bool collided = std::any_of(history_.begin(), history_.end(), [&](const Transmission& t) {
        return t.sender != sender && t.start < end && start < t.end &&
               in_interference_range(t.sender, dest);
    });
    if (collided) {
        ++s.counters.collisions;
        return false;
    }
    bool ok = s.delivery.bernoulli(radio_.ldr);
    if (radio_.ldr_mode == LdrMode::Compound) ok = s.delivery.bernoulli(radio_.ldr) && ok;
    return ok;
}

void RadioMac::finish_transmission(NodeId node, SimTime now) {
    NodeState& s = nodes_[node];
    Frame& head = s.buffer.front();
    const bool delivered = resolve_reception(node, head, s.tx_start, s.tx_end);
    s.phase = Phase::Waiting;
    prune_history(now);

    if (delivered) {
        ++s.counters.successes;
        ++s.counters.delivered;
        Frame frame = std::move(head);
        s.buffer.pop_front();
        deliver_(frame.link_destination, frame);
        if (s.buffer.empty()) {
            s.phase = Phase::Idle;
        } else {
            schedule_attempt(node, now);
        }
        return;
    }

    if (++head.link_attempts > mac_.link_retries) {
        ++s.counters.link_retry_exhausted;
        s.buffer.pop_front();
        if (s.buffer.empty()) {
            s.phase = Phase::Idle;
            return;
        }
        schedule_attempt(node, now);
        return;
    }
    ++s.counters.link_retries;
    head.receiver_awake = false;
    schedule_attempt(node, now + backoff_delay(node));
}

void RadioMac::prune_history(SimTime now) {
    // Anything still relevant overlaps a transmission that ends at or after now.
    const SimTime horizon = now - longest_transmission_;
    std::erase_if(history_, [horizon](const Transmission& t) { return t.end < horizon; });
}

} // namespace coapcc
