#include "coapcc/cc_policy.hpp"
#include "coapcc/cc_reference.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>

using namespace coapcc;
using namespace coapcc::cc;

namespace {
constexpr double kEps = 1e-9;
}

TEST_CASE("new_state starts from the 2 s base RTO with cold estimators") {
    const auto cocoa = new_state(PolicyKind::Cocoa, 7);
    CHECK(cocoa.rto_overall == 2.0);
    CHECK_FALSE(cocoa.strong.initialized);
    CHECK_FALSE(cocoa.weak.initialized);
    CHECK(cocoa.last_update == 0.0);
    CHECK(cocoa.strong.k == 4.0);
    CHECK(cocoa.weak.k == 1.0);

    CHECK(new_state(PolicyKind::DefaultCoap, 7).policy == PolicyKind::DefaultCoap);
    CHECK(new_state(PolicyKind::CocoaPlus, 7).rto_overall == 2.0);
}

TEST_CASE("initial_rto per policy") {
    SUBCASE("default CoAP draws from [2, 3)") {
        auto s = new_state(PolicyKind::DefaultCoap, 7);
        for (int i = 0; i < 1000; ++i) {
            const double v = initial_rto(s, 0.0);
            CHECK(v >= 2.0);
            CHECK(v < 3.0);
        }
    }
    SUBCASE("CoCoA with no samples returns the fresh overall RTO") {
        auto s = new_state(PolicyKind::Cocoa, 7);
        CHECK(initial_rto(s, 100.0) == 2.0);
    }
    SUBCASE("CoCoA+ ages a stale RTO before using it") {
        auto s = new_state(PolicyKind::CocoaPlus, 7);
        s.rto_overall = 6.0;
        CHECK(initial_rto(s, 40.0) == doctest::Approx(4.0).epsilon(kEps));
        CHECK(s.last_update == 40.0);
    }
    SUBCASE("CoCoA never ages") {
        auto s = new_state(PolicyKind::Cocoa, 7);
        s.rto_overall = 6.0;
        CHECK(initial_rto(s, 400.0) == 6.0);
    }
    SUBCASE("dithering is opt-in") {
        PolicyParams p;
        p.dither = true;
        auto s = new_state(PolicyKind::Cocoa, 7, p);
        for (int i = 0; i < 100; ++i) {
            const double v = initial_rto(s, 0.0, p);
            CHECK(v >= 2.0);
            CHECK(v < 3.0);
        }
    }
    SUBCASE("result is clamped") {
        auto s = new_state(PolicyKind::Cocoa, 7);
        s.rto_overall = 500.0;
        CHECK(initial_rto(s, 0.0) == 60.0);
        s.rto_overall = 0.01;
        CHECK(initial_rto(s, 0.0) == 0.1);
    }
}

TEST_CASE("backoff: binary exponential vs variable backoff factor") {
    const auto def = new_state(PolicyKind::DefaultCoap, 1);
    const auto cocoa = new_state(PolicyKind::Cocoa, 1);
    const auto plus = new_state(PolicyKind::CocoaPlus, 1);

    CHECK(backoff(def, {2.5, 2.5}) == doctest::Approx(5.0).epsilon(kEps));
    CHECK(backoff(cocoa, {0.5, 0.5}) == doctest::Approx(1.0).epsilon(kEps));
    CHECK(backoff(plus, {0.5, 0.5}) == doctest::Approx(1.5).epsilon(kEps));
    CHECK(backoff(plus, {4.0, 4.0}) == doctest::Approx(5.2).epsilon(kEps));
    CHECK(backoff(plus, {2.0, 2.0}) == doctest::Approx(4.0).epsilon(kEps));

    // factor depends on rto_init only, with inclusive 1 s and 3 s edges
    CHECK(variable_backoff_factor(0.999) == 3.0);
    CHECK(variable_backoff_factor(1.0) == 2.0);
    CHECK(variable_backoff_factor(3.0) == 2.0);
    CHECK(variable_backoff_factor(3.0001) == 1.3);
    CHECK(backoff(plus, {10.0, 0.5}) == doctest::Approx(30.0).epsilon(kEps));
}

TEST_CASE("property: backoff is increasing and BEB compounds to r * 2^n") {
    RandomStream rng(42);
    for (int trial = 0; trial < 500; ++trial) {
        const double r = rng.uniform(0.1, 3.0);
        const double init = rng.uniform(0.1, 6.0);
        for (auto policy : {PolicyKind::DefaultCoap, PolicyKind::Cocoa, PolicyKind::CocoaPlus}) {
            const auto s = new_state(policy, 1);
            CHECK(backoff(s, {r + 0.01, init}) > backoff(s, {r, init}));
            if (policy == PolicyKind::CocoaPlus) {
                const double f = backoff(s, {r, init}) / r;
                const bool one_of = std::fabs(f - 3.0) < kEps || std::fabs(f - 2.0) < kEps ||
                                    std::fabs(f - 1.3) < kEps;
                CHECK(one_of);
                continue;
            }
            double rto = r;
            for (int n = 1; n <= 4; ++n) {
                rto = backoff(s, {rto, r});
                CHECK(rto == doctest::Approx(r * std::pow(2.0, n)).epsilon(kEps));
            }
        }
    }
}

TEST_CASE("on_rtt_sample: strong, weak and discarded samples") {
    SUBCASE("first strong sample") {
        auto s = new_state(PolicyKind::Cocoa, 7);
        on_rtt_sample(s, 1.0, 1, 10.0);
        CHECK(s.strong.initialized);
        CHECK(s.strong.srtt == doctest::Approx(1.0));
        CHECK(s.strong.rttvar == doctest::Approx(0.5));
        CHECK(s.strong.rto() == doctest::Approx(3.0));
        CHECK(s.rto_overall == doctest::Approx(2.5).epsilon(kEps));
        CHECK(s.last_update == 10.0);
        CHECK_FALSE(s.weak.initialized);
        // same result from the independent evaluator
        const auto ref = reference::replay_reference(PolicyKind::Cocoa, {{true, 1.0, 1, 10.0}});
        CHECK(ref.back() == doctest::Approx(2.5).epsilon(kEps));
    }
    SUBCASE("weak sample after one or two retransmissions") {
        for (int count : {2, 3}) {
            auto s = new_state(PolicyKind::Cocoa, 7);
            on_rtt_sample(s, 2.0, count, 5.0);
            CHECK(s.weak.initialized);
            CHECK_FALSE(s.strong.initialized);
            // weak K = 1: 2 + 1 * 1 = 3, blended with 2
            CHECK(s.rto_overall == doctest::Approx(2.5).epsilon(kEps));
        }
    }
    SUBCASE("samples after more than two retransmissions are ignored") {
        auto s = new_state(PolicyKind::CocoaPlus, 7);
        on_rtt_sample(s, 1.0, 5, 3.0);
        CHECK_FALSE(s.strong.initialized);
        CHECK_FALSE(s.weak.initialized);
        CHECK(s.rto_overall == 2.0);
        CHECK(s.last_update == 0.0);
        const auto ref = reference::replay_reference(PolicyKind::CocoaPlus, {{true, 1.0, 5, 3.0}});
        CHECK(ref.back() == 2.0);
    }
    SUBCASE("converged estimator has zero variance") {
        auto s = new_state(PolicyKind::Cocoa, 7);
        for (int i = 0; i < 400; ++i) on_rtt_sample(s, 0.8, 1, i);
        CHECK(s.strong.rttvar < 1e-12);
        CHECK(s.strong.rto() == doctest::Approx(0.8).epsilon(1e-9));
    }
    SUBCASE("recurrence uses the previous srtt for rttvar") {
        auto s = new_state(PolicyKind::Cocoa, 7);
        on_rtt_sample(s, 1.0, 1, 1.0);
        on_rtt_sample(s, 3.0, 1, 2.0);
        // rttvar = 7/8 * 0.5 + 1/8 * |1 - 3| = 0.6875; srtt = 3/4 + 3/4 = 1.5
        CHECK(s.strong.rttvar == doctest::Approx(0.6875).epsilon(kEps));
        CHECK(s.strong.srtt == doctest::Approx(1.5).epsilon(kEps));
        CHECK(s.rto_overall == doctest::Approx(0.5 * (1.5 + 4 * 0.6875) + 0.5 * 2.5).epsilon(kEps));
    }
    SUBCASE("default CoAP ignores samples") {
        auto s = new_state(PolicyKind::DefaultCoap, 7);
        on_rtt_sample(s, 1.0, 1, 10.0);
        CHECK_FALSE(s.strong.initialized);
        CHECK(s.rto_overall == 2.0);
    }
    SUBCASE("non-positive RTT is rejected") {
        auto s = new_state(PolicyKind::Cocoa, 7);
        CHECK_THROWS_AS(on_rtt_sample(s, 0.0, 1, 1.0), std::invalid_argument);
        CHECK_THROWS_AS(on_rtt_sample(s, -1.0, 1, 1.0), std::invalid_argument);
        CHECK_THROWS_AS(on_rtt_sample(s, 1.0, 0, 1.0), std::invalid_argument);
    }
}

TEST_CASE("apply_aging") {
    auto aged = [](double rto, double idle) {
        auto s = new_state(PolicyKind::CocoaPlus, 1);
        s.rto_overall = rto;
        apply_aging(s, idle);
        return s.rto_overall;
    };
    CHECK(aged(6.0, 31.0) == doctest::Approx(4.0).epsilon(kEps));
    CHECK(aged(1.5, 100.0) == 1.5);
    CHECK(aged(6.0, 10.0) == 6.0);
    CHECK(aged(6.0, 30.0) == 6.0); // strictly more than 30 s
    CHECK(aged(2.0, 100.0) == 2.0);

    SUBCASE("idempotent at a fixed instant") {
        auto s = new_state(PolicyKind::CocoaPlus, 1);
        s.rto_overall = 10.0;
        apply_aging(s, 50.0);
        const double once = s.rto_overall;
        apply_aging(s, 50.0);
        CHECK(s.rto_overall == once);
        CHECK(once == doctest::Approx(6.0));
    }
    SUBCASE("only CoCoA+ ages") {
        auto s = new_state(PolicyKind::Cocoa, 1);
        s.rto_overall = 6.0;
        apply_aging(s, 100.0);
        CHECK(s.rto_overall == 6.0);
    }
}

TEST_CASE("property: rto_overall stays inside the hull of 2 s and every RTO_x seen") {
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
        RandomStream rng(seed);
        auto s = new_state(seed % 2 ? PolicyKind::Cocoa : PolicyKind::CocoaPlus, seed);
        double lo = 2.0, hi = 2.0, now = 0.0;
        for (int i = 0; i < 100; ++i) {
            now += rng.uniform(0.0, 40.0);
            const int count = 1 + static_cast<int>(rng.next_u64() % 5);
            on_rtt_sample(s, rng.uniform(0.01, 10.0), count, now);
            if (count == 1) {
                lo = std::min(lo, s.strong.rto());
                hi = std::max(hi, s.strong.rto());
            } else if (count <= 3) {
                lo = std::min(lo, s.weak.rto());
                hi = std::max(hi, s.weak.rto());
            }
            if (rng.bernoulli(0.3)) (void)initial_rto(s, now);
            CHECK(s.rto_overall >= lo - kEps);
            CHECK(s.rto_overall <= hi + kEps);
            CHECK(s.rto_overall > 0.0);
        }
    }
}

TEST_CASE("default CoAP initial RTO is uniform over [2, 3)") {
    auto s = new_state(PolicyKind::DefaultCoap, 2024);
    double sum = 0.0, lo = 10.0, hi = 0.0;
    constexpr int n = 100000;
    for (int i = 0; i < n; ++i) {
        const double v = initial_rto(s, 0.0);
        sum += v;
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    CHECK(lo >= 2.0);
    CHECK(hi < 3.0);
    CHECK(sum / n >= 2.45);
    CHECK(sum / n <= 2.55);
}

TEST_CASE("trace replay matches the independent reference evaluator") {
    const auto report = reference::cross_check(200, 100, 99);
    CHECK(report.passed);
    CHECK(report.max_abs_error <= 1e-9);
    CHECK(report.steps == 200 * 100 * 2);
}

TEST_CASE("policy names") {
    CHECK(parse_policy("cocoa+") == PolicyKind::CocoaPlus);
    CHECK(parse_policy(to_string(PolicyKind::DefaultCoap)) == PolicyKind::DefaultCoap);
    CHECK_THROWS_AS(parse_policy("reno"), std::invalid_argument);
}
