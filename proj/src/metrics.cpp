#include "coapcc/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace coapcc {

RequestRecord* RequestLedger::find(NodeId source, std::uint64_t serial) {
    if (source >= index_.size() || serial >= index_[source].size()) return nullptr;
    return &records_[index_[source][serial]];
}

void RequestLedger::observe(const ExchangeEvent& e) {
    using K = ExchangeEvent::Kind;
    switch (e.kind) {
    case K::Submit: {
        if (index_.size() <= e.node) index_.resize(e.node + 1);
        auto& per_node = index_[e.node];
        if (per_node.size() <= e.request_serial) per_node.resize(e.request_serial + 1, 0);
        per_node[e.request_serial] = records_.size();
        records_.push_back({e.node, e.request_serial, e.time, -1, RequestOutcome::Pending, 0});
        break;
    }
    case K::Transmit:
    case K::Retransmit:
        if (auto* r = find(e.node, e.request_serial)) r->transmissions = e.transmission_count;
        if (e.kind == K::Retransmit) ++retransmissions_;
        break;
    case K::Acked:
        if (auto* r = find(e.node, e.request_serial)) r->outcome = RequestOutcome::Acked;
        break;
    case K::Failed:
        if (auto* r = find(e.node, e.request_serial)) r->outcome = RequestOutcome::Failed;
        break;
    case K::Declined:
        if (auto* r = find(e.node, e.request_serial)) r->outcome = RequestOutcome::Declined;
        break;
    case K::Received:
        // emitted by the sink; the request belongs to the peer
        if (auto* r = find(e.peer, e.request_serial); r && r->first_received_at < 0) {
            r->first_received_at = e.time;
        }
        break;
    case K::Duplicate: ++duplicates_; break;
    case K::StaleAck: ++stale_acks_; break;
    case K::Anomaly: break;
    }
}

MetricsRecord collect_metrics(const std::vector<RequestRecord>& requests, double offered_load_kbps,
                              double window_s, std::uint32_t message_size) {
    MetricsRecord m;
    m.offered_load_kbps = offered_load_kbps;
    m.requests_sent = requests.size();
    std::vector<double> delays;
    for (const auto& r : requests) {
        switch (r.outcome) {
        case RequestOutcome::Pending: ++m.pending_at_end; continue;
        case RequestOutcome::Acked: ++m.acked; break;
        case RequestOutcome::Failed: ++m.failed_exchanges; break;
        case RequestOutcome::Declined:
            ++m.failed_exchanges;
            ++m.declined;
            break;
        }
        ++m.requests_completed;
        if (r.first_received_at >= 0) {
            ++m.requests_received;
            delays.push_back(to_seconds(r.first_received_at - r.submitted_at));
        }
    }

    if (m.requests_completed == 0) {
        m.empty_workload = true;
        m.pdr = 1.0;
    } else {
        m.pdr = static_cast<double>(m.requests_received) / static_cast<double>(m.requests_completed);
    }
    m.carried_load_kbps = m.pdr * offered_load_kbps;
    if (window_s > 0.0) {
        m.measured_offered_kbps =
            static_cast<double>(m.requests_sent) * message_size * 8.0 / window_s / 1000.0;
    }

    if (!delays.empty()) {
        m.mean_delay_s = std::accumulate(delays.begin(), delays.end(), 0.0) /
                         static_cast<double>(delays.size());
        std::sort(delays.begin(), delays.end());
        // nearest-rank percentile
        const auto rank = static_cast<std::size_t>(std::ceil(0.95 * static_cast<double>(delays.size())));
        m.p95_delay_s = delays[std::max<std::size_t>(rank, 1) - 1];
    }
    return m;
}

} // namespace coapcc
