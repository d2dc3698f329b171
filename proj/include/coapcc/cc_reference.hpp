#pragma once

// Straight-line re-statement of the CoCoA / CoCoA+ RTO recurrences, written
// independently of cc_policy so the two can be cross-checked. Constants are
// hard-coded on purpose: alpha 1/4, beta 1/8, K 4 (strong) and 1 (weak),
// initial overall RTO 2 s, aging after 30 s idle toward 2 s.

#include "coapcc/cc_policy.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace coapcc::reference {

struct TraceStep {
    bool is_sample = true; // false: start of a new exchange (initial RTO query)
    double rtt = 0.0;
    int transmission_count = 1;
    double now = 0.0;
};

/// Random trace with non-decreasing timestamps.
std::vector<TraceStep> random_trace(std::uint64_t seed, std::size_t length);

/// rto_overall after every step.
std::vector<double> replay_reference(cc::PolicyKind policy, const std::vector<TraceStep>& trace);

/// Same trace through the production code path.
std::vector<double> replay_policy(cc::PolicyKind policy, const std::vector<TraceStep>& trace);

struct OracleReport {
    std::size_t traces = 0;
    std::size_t steps = 0;
    double max_abs_error = 0.0;
    bool passed = false;
};

OracleReport cross_check(std::size_t traces, std::size_t steps_per_trace, std::uint64_t seed,
                         double tolerance = 1e-9);

} // namespace coapcc::reference
