#include "coapcc/message_layer.hpp"

#include <algorithm>
#include <stdexcept>

namespace coapcc {

std::string_view to_string(MessageKind kind) {
    switch (kind) {
    case MessageKind::Con: return "CON";
    case MessageKind::Non: return "NON";
    case MessageKind::Ack: return "ACK";
    case MessageKind::Rst: return "RST";
    }
    return "?";
}

std::string_view to_string(ExchangeEvent::Kind kind) {
    using K = ExchangeEvent::Kind;
    switch (kind) {
    case K::Submit: return "submit";
    case K::Transmit: return "tx";
    case K::Retransmit: return "retx";
    case K::Acked: return "ack";
    case K::Failed: return "fail";
    case K::Declined: return "declined";
    case K::Received: return "received";
    case K::Duplicate: return "duplicate";
    case K::StaleAck: return "stale_ack";
    case K::Anomaly: return "anomaly";
    }
    return "?";
}

CoapEndpoint::CoapEndpoint(NodeId self, cc::PolicyKind policy, MessageLayerParams params,
                           EventQueue& queue, std::uint64_t seed, SendFn send, EventSink sink)
    : self_(self), policy_(policy), params_(params), queue_(queue), seed_(seed),
      send_(std::move(send)), sink_(std::move(sink)) {
    if (params_.nstart < 1) throw std::invalid_argument("NSTART must be at least 1");
    if (params_.max_retransmit < 0) throw std::invalid_argument("MAX_RETRANSMIT must be >= 0");
}

CoapEndpoint::Peer& CoapEndpoint::peer(NodeId id) {
    auto it = peers_.find(id);
    if (it == peers_.end()) {
        Peer p;
        p.cc = cc::new_state(policy_, mix64(seed_ ^ (static_cast<std::uint64_t>(id) << 20)),
                             params_.policy);
        it = peers_.emplace(id, std::move(p)).first;
    }
    return it->second;
}

bool CoapEndpoint::id_in_use(const Peer& p, std::uint16_t id) const {
    auto match = [id](const Exchange& e) { return e.message.message_id == id; };
    return std::any_of(p.in_flight.begin(), p.in_flight.end(), match) ||
           std::any_of(p.waiting.begin(), p.waiting.end(), match);
}

std::uint16_t CoapEndpoint::allocate_message_id(NodeId destination) {
    const Peer& p = peer(destination);
    // 2^16 candidates; at most nstart + waiting ids can be busy.
    for (std::uint32_t tries = 0; tries <= 0xFFFF; ++tries) {
        const std::uint16_t id = next_message_id_++;
        if (!id_in_use(p, id)) return id;
    }
    throw std::runtime_error("message id space exhausted");
}

Exchange CoapEndpoint::submit_request(NodeId destination, SimTime now) {
    Exchange ex;
    ex.message.kind = MessageKind::Con;
    ex.message.message_id = allocate_message_id(destination);
    ex.message.source = self_;
    ex.message.destination = destination;
    ex.message.size = params_.request_size;
    ex.message.created_at = now;
    ex.message.request_serial = next_serial_++;
    ++counters_.submitted;
    emit(ExchangeEvent::Kind::Submit, ex, now);

    Peer& p = peer(destination);
    if (p.in_flight.size() < params_.nstart) {
        start(p, std::move(ex), now);
        return p.in_flight.back();
    }
    if (p.waiting.size() >= params_.queue_limit) {
        ex.state = ExchangeState::Failed;
        ++counters_.declined;
        emit(ExchangeEvent::Kind::Declined, ex, now);
        return ex;
    }
    p.waiting.push_back(std::move(ex));
    return p.waiting.back();
}

void CoapEndpoint::schedule_deadline(Exchange& ex, SimTime now) {
    const NodeId dest = ex.message.destination;
    const std::uint16_t mid = ex.message.message_id;
    ex.deadline_event = queue_.schedule(now + from_seconds(ex.rto_current), EventKind::RtoExpiry,
                                        self_, mid, [this, dest, mid] {
                                            on_rto_expiry(dest, mid, queue_.now());
                                        });
}

void CoapEndpoint::start(Peer& p, Exchange ex, SimTime now) {
    ex.rto_init = cc::initial_rto(p.cc, to_seconds(now), params_.policy);
    ex.rto_current = ex.rto_init;
    ex.transmission_count = 1;
    ex.first_tx_time = now;
    ex.state = ExchangeState::InFlight;
    schedule_deadline(ex, now);
    p.in_flight.push_back(std::move(ex));
    const Exchange& started = p.in_flight.back();
    emit(ExchangeEvent::Kind::Transmit, started, now);
    send_(started.message);
}

void CoapEndpoint::on_rto_expiry(NodeId destination, std::uint16_t message_id, SimTime now) {
    Peer& p = peer(destination);
    auto it = std::find_if(p.in_flight.begin(), p.in_flight.end(), [message_id](const Exchange& e) {
        return e.message.message_id == message_id;
    });
    if (it == p.in_flight.end()) return; // already completed

    Exchange& ex = *it;
    if (ex.transmission_count <= params_.max_retransmit) {
        ++ex.transmission_count;
        ex.rto_current = cc::backoff(p.cc, {ex.rto_current, ex.rto_init}, params_.policy);
        schedule_deadline(ex, now);
        ++counters_.retransmissions;
        emit(ExchangeEvent::Kind::Retransmit, ex, now);
        send_(ex.message);
        return;
    }
    finish(p, static_cast<std::size_t>(it - p.in_flight.begin()), ExchangeState::Failed,
           now);
}

void CoapEndpoint::finish(Peer& p, std::size_t index, ExchangeState outcome,
                          SimTime now) {
    Exchange ex = std::move(p.in_flight[index]);
    p.in_flight.erase(p.in_flight.begin() + static_cast<std::ptrdiff_t>(index));
    queue_.cancel(ex.deadline_event);
    ex.deadline_event = 0;
    ex.state = outcome;
    if (outcome == ExchangeState::Acked) {
        ++counters_.acked;
        const double rtt = to_seconds(now - ex.first_tx_time);
        emit(ExchangeEvent::Kind::Acked, ex, now, rtt);
        cc::on_rtt_sample(p.cc, rtt, ex.transmission_count, to_seconds(now), params_.policy);
    } else {
        ++counters_.failed;
        emit(ExchangeEvent::Kind::Failed, ex, now);
    }
    promote(p, now);
}

void CoapEndpoint::promote(Peer& p, SimTime now) {
    while (p.in_flight.size() < params_.nstart && !p.waiting.empty()) {
        Exchange next = std::move(p.waiting.front());
        p.waiting.pop_front();
        start(p, std::move(next), now);
    }
}

void CoapEndpoint::on_receive(const Message& message, SimTime now) {
    switch (message.kind) {
    case MessageKind::Con: handle_request(message, now); break;
    case MessageKind::Ack: handle_ack(message, now); break;
    case MessageKind::Non:
    case MessageKind::Rst: {
        ++counters_.anomalies;
        Exchange ex;
        ex.message = message;
        emit(ExchangeEvent::Kind::Anomaly, ex, now);
        break;
    }
    }
}

void CoapEndpoint::handle_request(const Message& message, SimTime now) {
    Peer& p = peer(message.source);
    auto& recent = p.recent_requests;
    const bool duplicate = std::find(recent.begin(), recent.end(), message.message_id) != recent.end();

    Exchange view;
    view.message = message;
    if (duplicate) {
        ++counters_.duplicates;
        emit(ExchangeEvent::Kind::Duplicate, view, now);
    } else {
        recent.push_back(message.message_id);
        if (recent.size() > params_.dedup_window) recent.pop_front();
        ++counters_.received_unique;
        emit(ExchangeEvent::Kind::Received, view, now);
    }

    Message ack;
    ack.kind = MessageKind::Ack;
    ack.message_id = message.message_id;
    ack.source = self_;
    ack.destination = message.source;
    ack.size = params_.ack_size;
    ack.created_at = now;
    ack.request_serial = message.request_serial;
    send_(ack);
}

void CoapEndpoint::handle_ack(const Message& message, SimTime now) {
    Peer& p = peer(message.source);
    auto it = std::find_if(p.in_flight.begin(), p.in_flight.end(), [&](const Exchange& e) {
        return e.message.message_id == message.message_id;
    });
    if (it == p.in_flight.end()) {
        ++counters_.stale_acks;
        Exchange view;
        view.message = message;
        emit(ExchangeEvent::Kind::StaleAck, view, now);
        return;
    }
    finish(p, static_cast<std::size_t>(it - p.in_flight.begin()),
           ExchangeState::Acked, now);
}

void CoapEndpoint::emit(ExchangeEvent::Kind kind, const Exchange& ex, SimTime now, double rtt) {
    if (!sink_) return;
    ExchangeEvent e{kind};
    e.time = now;
    e.node = self_;
    e.peer = ex.message.source == self_ ? ex.message.destination : ex.message.source;
    e.message_id = ex.message.message_id;
    e.request_serial = ex.message.request_serial;
    e.created_at = ex.message.created_at;
    e.transmission_count = ex.transmission_count;
    e.rto = ex.rto_current;
    e.rtt = rtt;
    sink_(e);
}

std::size_t CoapEndpoint::in_flight(NodeId destination) const {
    auto it = peers_.find(destination);
    return it == peers_.end() ? 0 : it->second.in_flight.size();
}

std::size_t CoapEndpoint::waiting(NodeId destination) const {
    auto it = peers_.find(destination);
    return it == peers_.end() ? 0 : it->second.waiting.size();
}

std::optional<Exchange> CoapEndpoint::find_exchange(NodeId destination,
                                                    std::uint16_t message_id) const {
    auto it = peers_.find(destination);
    if (it == peers_.end()) return std::nullopt;
    for (const auto& e : it->second.in_flight)
        if (e.message.message_id == message_id) return e;
    for (const auto& e : it->second.waiting)
        if (e.message.message_id == message_id) return e;
    return std::nullopt;
}

const cc::CcState* CoapEndpoint::cc_state(NodeId destination) const {
    auto it = peers_.find(destination);
    return it == peers_.end() ? nullptr : &it->second.cc;
}

} // namespace coapcc
