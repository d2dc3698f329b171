#include "coapcc/cc_reference.hpp"

#include <algorithm>
#include <cmath>

namespace coapcc::reference {

std::vector<TraceStep> random_trace(std::uint64_t seed, std::size_t length) {
    RandomStream rng(seed);
    std::vector<TraceStep> trace;
    trace.reserve(length);
    double now = 0.0;
    for (std::size_t i = 0; i < length; ++i) {
        TraceStep step;
        // Mostly short gaps, sometimes long idle periods to exercise aging.
        now += rng.bernoulli(0.15) ? rng.uniform(20.0, 80.0) : rng.uniform(0.0, 5.0);
        step.now = now;
        step.is_sample = rng.bernoulli(0.7);
        step.rtt = rng.uniform(0.01, 12.0);
        step.transmission_count = 1 + static_cast<int>(rng.next_u64() % 6);
        trace.push_back(step);
    }
    return trace;
}

std::vector<double> replay_reference(cc::PolicyKind policy, const std::vector<TraceStep>& trace) {
    const bool plus = policy == cc::PolicyKind::CocoaPlus;
    const bool adaptive = policy != cc::PolicyKind::DefaultCoap;

    double overall = 2.0;
    double last = 0.0;
    bool s_init = false, w_init = false;
    double s_rtt = 0, s_var = 0, w_rtt = 0, w_var = 0;

    std::vector<double> out;
    out.reserve(trace.size());
    for (const auto& st : trace) {
        if (!st.is_sample) {
            if (plus && overall > 2.0 && st.now - last > 30.0) {
                overall = (2.0 + overall) / 2.0;
                last = st.now;
            }
        } else if (adaptive && st.transmission_count == 1) {
            if (!s_init) {
                s_rtt = st.rtt;
                s_var = st.rtt / 2.0;
                s_init = true;
            } else {
                s_var = 0.875 * s_var + 0.125 * std::fabs(s_rtt - st.rtt);
                s_rtt = 0.75 * s_rtt + 0.25 * st.rtt;
            }
            overall = 0.5 * (s_rtt + 4.0 * s_var) + 0.5 * overall;
            last = st.now;
        } else if (adaptive && st.transmission_count <= 3) {
            if (!w_init) {
                w_rtt = st.rtt;
                w_var = st.rtt / 2.0;
                w_init = true;
            } else {
                w_var = 0.875 * w_var + 0.125 * std::fabs(w_rtt - st.rtt);
                w_rtt = 0.75 * w_rtt + 0.25 * st.rtt;
            }
            overall = 0.5 * (w_rtt + 1.0 * w_var) + 0.5 * overall;
            last = st.now;
        }
        out.push_back(overall);
    }
    return out;
}

std::vector<double> replay_policy(cc::PolicyKind policy, const std::vector<TraceStep>& trace) {
    cc::CcState state = cc::new_state(policy, 0);
    std::vector<double> out;
    out.reserve(trace.size());
    for (const auto& st : trace) {
        if (st.is_sample) {
            cc::on_rtt_sample(state, st.rtt, st.transmission_count, st.now);
        } else {
            (void)cc::initial_rto(state, st.now);
        }
        out.push_back(state.rto_overall);
    }
    return out;
}

OracleReport cross_check(std::size_t traces, std::size_t steps_per_trace, std::uint64_t seed,
                         double tolerance) {
    OracleReport report;
    for (std::size_t i = 0; i < traces; ++i) {
        const auto trace = random_trace(mix64(seed + i), steps_per_trace);
        for (auto policy : {cc::PolicyKind::Cocoa, cc::PolicyKind::CocoaPlus}) {
            const auto want = replay_reference(policy, trace);
            const auto got = replay_policy(policy, trace);
            for (std::size_t k = 0; k < want.size(); ++k) {
                report.max_abs_error = std::max(report.max_abs_error, std::fabs(want[k] - got[k]));
            }
            report.steps += want.size();
        }
        ++report.traces;
    }
    report.passed = report.max_abs_error <= tolerance;
    return report;
}

} // namespace coapcc::reference
