#pragma once

#include "coapcc/random.hpp"

#include <cstdint>
#include <string>
#include <string_view>

namespace coapcc::cc {

enum class PolicyKind { DefaultCoap, Cocoa, CocoaPlus };

std::string_view to_string(PolicyKind kind);
/// Accepts "default", "default_coap", "cocoa", "cocoa_plus", "cocoa+".
/// Throws std::invalid_argument on anything else.
PolicyKind parse_policy(std::string_view name);

/// Tunables for the RTO machinery. All times in seconds.
struct PolicyParams {
    double alpha = 0.25;          // srtt gain
    double beta = 0.125;          // rttvar gain
    double k_strong = 4.0;
    double k_weak = 1.0;
    double initial_rto = 2.0;     // fresh rto_overall
    double default_rto_min = 2.0; // Default CoAP draw interval [min, max)
    double default_rto_max = 3.0;
    double base_rto = 2.0;        // aging pulls toward this value
    double aging_idle = 30.0;     // idle time before aging applies
    int max_weak_transmissions = 3;
    double rto_floor = 0.1;
    double rto_ceiling = 60.0;
    bool dither = false;          // CoCoA/CoCoA+ only: scale initial RTO by U[1, dither_factor)
    double dither_factor = 1.5;
};

struct Estimator {
    double srtt = 0.0;
    double rttvar = 0.0;
    double k = 1.0;
    bool initialized = false;

    /// srtt + k * rttvar. Only meaningful once initialized.
    double rto() const { return srtt + k * rttvar; }
    void update(double rtt, double alpha, double beta);
};

/// Congestion-control state kept per (node, destination endpoint).
struct CcState {
    PolicyKind policy = PolicyKind::DefaultCoap;
    Estimator strong;
    Estimator weak;
    double rto_overall = 2.0;
    double last_update = 0.0;
    RandomStream rng;
};

struct BackoffInputs {
    double rto_previous;
    double rto_init;
};

CcState new_state(PolicyKind policy, std::uint64_t seed, const PolicyParams& params = {});

/// RTO for the first transmission of a new exchange. For CoCoA+ this also
/// applies RTO aging, hence the mutable state.
double initial_rto(CcState& state, double now, const PolicyParams& params = {});

/// RTO for the next retransmission.
double backoff(const CcState& state, BackoffInputs inputs, const PolicyParams& params = {});

/// CoCoA+ variable backoff factor as a function of the exchange's initial RTO.
double variable_backoff_factor(double rto_init);

/// Feed an RTT sample measured for an exchange that needed `transmission_count`
/// transmissions. Throws std::invalid_argument if rtt <= 0 or count < 1.
void on_rtt_sample(CcState& state, double rtt, int transmission_count, double now,
                   const PolicyParams& params = {});

/// CoCoA+ aging: decays a stale rto_overall above base_rto halfway toward it.
void apply_aging(CcState& state, double now, const PolicyParams& params = {});

double clamp_rto(double rto, const PolicyParams& params);

} // namespace coapcc::cc
