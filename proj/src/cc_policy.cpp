#include "coapcc/cc_policy.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace coapcc::cc {

std::string_view to_string(PolicyKind kind) {
    switch (kind) {
    case PolicyKind::DefaultCoap: return "default_coap";
    case PolicyKind::Cocoa: return "cocoa";
    case PolicyKind::CocoaPlus: return "cocoa_plus";
    }
    return "?";
}

PolicyKind parse_policy(std::string_view name) {
    if (name == "default" || name == "default_coap") return PolicyKind::DefaultCoap;
    if (name == "cocoa") return PolicyKind::Cocoa;
    if (name == "cocoa_plus" || name == "cocoa+") return PolicyKind::CocoaPlus;
    throw std::invalid_argument("unknown policy '" + std::string(name) +
                                "' (expected default_coap, cocoa or cocoa_plus)");
}

void Estimator::update(double rtt, double alpha, double beta) {
    if (!initialized) {
        srtt = rtt;
        rttvar = rtt / 2.0;
        initialized = true;
        return;
    }
    // rttvar uses the old srtt
    rttvar = (1.0 - beta) * rttvar + beta * std::abs(srtt - rtt);
    srtt = (1.0 - alpha) * srtt + alpha * rtt;
}

CcState new_state(PolicyKind policy, std::uint64_t seed, const PolicyParams& params) {
    CcState s;
    s.policy = policy;
    s.strong.k = params.k_strong;
    s.weak.k = params.k_weak;
    s.rto_overall = params.initial_rto;
    s.last_update = 0.0;
    s.rng = RandomStream(seed);
    return s;
}

double clamp_rto(double rto, const PolicyParams& params) {
    return std::clamp(rto, params.rto_floor, params.rto_ceiling);
}

double initial_rto(CcState& state, double now, const PolicyParams& params) {
    switch (state.policy) {
    case PolicyKind::DefaultCoap:
        return clamp_rto(state.rng.uniform(params.default_rto_min, params.default_rto_max), params);
    case PolicyKind::CocoaPlus:
        apply_aging(state, now, params);
        [[fallthrough]];
    case PolicyKind::Cocoa: {
        double rto = state.rto_overall;
        if (params.dither) rto *= state.rng.uniform(1.0, params.dither_factor);
        return clamp_rto(rto, params);
    }
    }
    return params.initial_rto;
}

double variable_backoff_factor(double rto_init) {
    if (rto_init < 1.0) return 3.0;
    if (rto_init <= 3.0) return 2.0;
    return 1.3;
}

double backoff(const CcState& state, BackoffInputs inputs, const PolicyParams& params) {
    const double factor = state.policy == PolicyKind::CocoaPlus
                              ? variable_backoff_factor(inputs.rto_init)
                              : 2.0;
    return clamp_rto(inputs.rto_previous * factor, params);
}

void on_rtt_sample(CcState& state, double rtt, int transmission_count, double now,
                   const PolicyParams& params) {
    if (!(rtt > 0.0)) throw std::invalid_argument("RTT sample must be positive");
    if (transmission_count < 1) throw std::invalid_argument("transmission count must be >= 1");
    if (state.policy == PolicyKind::DefaultCoap) return;

    Estimator* est = nullptr;
    if (transmission_count == 1) {
        est = &state.strong;
    } else if (transmission_count <= params.max_weak_transmissions) {
        est = &state.weak;
    } else {
        return; // too ambiguous to attribute
    }
    est->update(rtt, params.alpha, params.beta);
    state.rto_overall = 0.5 * est->rto() + 0.5 * state.rto_overall;
    state.last_update = now;
}

void apply_aging(CcState& state, double now, const PolicyParams& params) {
    if (state.policy != PolicyKind::CocoaPlus) return;
    if (state.rto_overall > params.base_rto && now - state.last_update > params.aging_idle) {
        state.rto_overall = (params.base_rto + state.rto_overall) / 2.0;
        state.last_update = now;
    }
}

} // namespace coapcc::cc
