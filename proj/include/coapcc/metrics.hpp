#pragma once

#include "coapcc/message_layer.hpp"
#include "coapcc/radio_mac.hpp"
#include "coapcc/time.hpp"

#include <cstdint>
#include <vector>

namespace coapcc {

enum class RequestOutcome : std::uint8_t { Pending, Acked, Failed, Declined };

/// Fate of one application request, as seen across client and sink.
struct RequestRecord {
    NodeId source = 0;
    std::uint64_t serial = 0;
    SimTime submitted_at = 0;
    SimTime first_received_at = -1; // unique arrival at the sink, -1 if never
    RequestOutcome outcome = RequestOutcome::Pending;
    int transmissions = 0;
};

/// Builds per-request records from the endpoints' exchange events.
class RequestLedger {
public:
    void observe(const ExchangeEvent& event);
    const std::vector<RequestRecord>& records() const { return records_; }
    std::uint64_t retransmissions() const { return retransmissions_; }
    std::uint64_t stale_acks() const { return stale_acks_; }
    std::uint64_t duplicates() const { return duplicates_; }

private:
    RequestRecord* find(NodeId source, std::uint64_t serial);

    std::vector<RequestRecord> records_;
    // index into records_ by [source][serial]
    std::vector<std::vector<std::size_t>> index_;
    std::uint64_t retransmissions_ = 0;
    std::uint64_t stale_acks_ = 0;
    std::uint64_t duplicates_ = 0;
};

struct MetricsRecord {
    std::uint64_t requests_sent = 0;      // submitted inside the measurement window
    std::uint64_t requests_completed = 0; // acked + failed
    std::uint64_t requests_received = 0;  // completed requests that reached the sink
    std::uint64_t acked = 0;
    std::uint64_t failed_exchanges = 0;   // timed out or declined
    std::uint64_t declined = 0;           // subset of failed_exchanges
    std::uint64_t pending_at_end = 0;
    bool empty_workload = false;

    double pdr = 1.0;
    double offered_load_kbps = 0.0;
    double carried_load_kbps = 0.0;
    double measured_offered_kbps = 0.0; // from the actual number of submissions
    double mean_delay_s = 0.0;
    double p95_delay_s = 0.0;

    std::uint64_t retransmissions = 0;
    std::uint64_t stale_acks = 0;
    std::uint64_t duplicates = 0;
    std::uint64_t mac_overflows = 0;
    MacCounters mac;
    bool frames_conserved = true;
    std::uint64_t events_executed = 0;
};

/// Aggregates a finished run. Pending requests are left out of both the
/// numerator and the denominator of the PDR.
MetricsRecord collect_metrics(const std::vector<RequestRecord>& requests, double offered_load_kbps,
                              double window_s, std::uint32_t message_size);

} // namespace coapcc
