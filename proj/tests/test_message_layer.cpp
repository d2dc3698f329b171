#include "coapcc/message_layer.hpp"

#include <doctest.h>

#include <functional>
#include <memory>
#include <vector>

using namespace coapcc;
using cc::PolicyKind;

namespace {

// Client (node 1) and server (node 0) over an ideal link with a fixed
// one-way delay. `drop` decides per message whether the link loses it.
struct Pair {
    EventQueue queue;
    SimTime one_way = 0;
    std::function<bool(const Message&)> drop = [](const Message&) { return false; };
    std::vector<Message> wire;
    std::vector<ExchangeEvent> events;
    std::unique_ptr<CoapEndpoint> client;
    std::unique_ptr<CoapEndpoint> server;

    Pair(PolicyKind policy, MessageLayerParams params = {}, SimTime delay = 0) : one_way(delay) {
        auto sink = [this](const ExchangeEvent& e) { events.push_back(e); };
        auto link = [this](const Message& m) {
            wire.push_back(m);
            if (drop(m)) return;
            queue.schedule_in(one_way, EventKind::TxEnd, m.destination, m.message_id, [this, m] {
                (m.destination == 0 ? *server : *client).on_receive(m, queue.now());
            });
        };
        client = std::make_unique<CoapEndpoint>(1, policy, params, queue, 11, link, sink);
        server = std::make_unique<CoapEndpoint>(0, policy, params, queue, 12, link, sink);
    }

    // send times of every CON copy from `from`
    std::vector<SimTime> con_times(NodeId from) const {
        std::vector<SimTime> out;
        for (const auto& e : events) {
            const bool is_tx = e.kind == ExchangeEvent::Kind::Transmit ||
                               e.kind == ExchangeEvent::Kind::Retransmit;
            if (is_tx && e.node == from) out.push_back(e.time);
        }
        return out;
    }

    std::size_t count(ExchangeEvent::Kind kind) const {
        std::size_t n = 0;
        for (const auto& e : events) n += e.kind == kind;
        return n;
    }
};

} // namespace

TEST_CASE("idle endpoint transmits immediately") {
    Pair p(PolicyKind::Cocoa);
    const auto ex = p.client->submit_request(0, 0);
    CHECK(ex.state == ExchangeState::InFlight);
    CHECK(ex.transmission_count == 1);
    CHECK(ex.rto_init == 2.0);
    CHECK(p.wire.size() == 1);
    CHECK(p.wire[0].size == kRequestSize);
    CHECK(p.client->in_flight(0) == 1);
}

TEST_CASE("NSTART: a busy slot declines by default") {
    Pair p(PolicyKind::Cocoa);
    p.client->submit_request(0, 0);
    const auto second = p.client->submit_request(0, 0);
    CHECK(second.state == ExchangeState::Failed);
    CHECK(second.transmission_count == 0);
    CHECK(p.wire.size() == 1);
    CHECK(p.client->counters().declined == 1);
    CHECK(p.count(ExchangeEvent::Kind::Declined) == 1);
}

TEST_CASE("NSTART: with a waiting queue, requests start in FIFO order") {
    MessageLayerParams params;
    params.queue_limit = 2;
    Pair p(PolicyKind::Cocoa, params, from_seconds(0.1));
    const auto a = p.client->submit_request(0, 0);
    const auto b = p.client->submit_request(0, 0);
    const auto c = p.client->submit_request(0, 0);
    const auto d = p.client->submit_request(0, 0);
    CHECK(a.state == ExchangeState::InFlight);
    CHECK(b.state == ExchangeState::Queued);
    CHECK(c.state == ExchangeState::Queued);
    CHECK(d.state == ExchangeState::Failed);
    CHECK(p.client->waiting(0) == 2);

    p.queue.run_until(from_seconds(10));
    std::vector<std::uint64_t> order;
    for (const auto& e : p.events)
        if (e.kind == ExchangeEvent::Kind::Transmit && e.node == 1) order.push_back(e.request_serial);
    CHECK(order == std::vector<std::uint64_t>{a.message.request_serial, b.message.request_serial,
                                              c.message.request_serial});
    CHECK(p.client->counters().acked == 3);
    CHECK(p.client->in_flight(0) == 0);
    // at most one exchange in flight at any instant
    int open = 0, peak = 0;
    for (const auto& e : p.events) {
        if (e.node != 1) continue;
        if (e.kind == ExchangeEvent::Kind::Transmit) peak = std::max(peak, ++open);
        if (e.kind == ExchangeEvent::Kind::Acked || e.kind == ExchangeEvent::Kind::Failed) --open;
    }
    CHECK(peak == 1);
}

TEST_CASE("default CoAP retransmits at r, 3r, 7r, 15r then fails at 31r") {
    Pair p(PolicyKind::DefaultCoap);
    p.drop = [](const Message&) { return true; };
    const auto ex = p.client->submit_request(0, 0);
    const double r = ex.rto_init;
    CHECK(r >= 2.0);
    CHECK(r < 3.0);
    p.queue.run_until(from_seconds(200));

    const auto tx = p.con_times(1);
    REQUIRE(tx.size() == 5);
    const double expected[] = {0.0, r, 3 * r, 7 * r, 15 * r};
    for (std::size_t i = 0; i < tx.size(); ++i)
        CHECK(to_seconds(tx[i]) == doctest::Approx(expected[i]).epsilon(1e-9));

    REQUIRE(p.count(ExchangeEvent::Kind::Failed) == 1);
    for (const auto& e : p.events) {
        if (e.kind != ExchangeEvent::Kind::Failed) continue;
        CHECK(to_seconds(e.time) == doctest::Approx(31 * r).epsilon(1e-9));
        CHECK(e.transmission_count == 5);
    }
    CHECK(p.client->counters().retransmissions == 4);
    CHECK(p.client->in_flight(0) == 0);
}

TEST_CASE("CoCoA+ applies the variable backoff factor to a short initial RTO") {
    Pair p(PolicyKind::CocoaPlus);
    // 0.1 s round trips pull rto_overall down toward 0.1 s
    p.one_way = from_seconds(0.05);
    for (int i = 0; i < 60; ++i) {
        p.client->submit_request(0, p.queue.now());
        p.queue.run_until(p.queue.now() + from_seconds(1));
    }
    const auto* st = p.client->cc_state(0);
    REQUIRE(st != nullptr);
    CHECK(st->rto_overall == doctest::Approx(0.1).epsilon(0.01));

    p.events.clear();
    p.drop = [](const Message& m) { return m.kind == MessageKind::Con; };
    const SimTime t0 = p.queue.now();
    const auto ex = p.client->submit_request(0, t0);
    CHECK(ex.rto_init < 1.0);
    p.queue.run_until(t0 + from_seconds(60));
    const auto tx = p.con_times(1);
    REQUIRE(tx.size() == 5);
    // factor 3 every time because it depends on rto_init only
    double rto = ex.rto_init, at = 0.0;
    for (std::size_t i = 1; i < tx.size(); ++i) {
        at += rto;
        CHECK(to_seconds(tx[i] - t0) == doctest::Approx(at).epsilon(1e-6));
        rto *= 3.0;
    }
}

TEST_CASE("CoCoA+ backoff example: 0.5 s becomes 1.5 s") {
    MessageLayerParams params;
    params.policy.initial_rto = 0.5;
    auto st = cc::new_state(PolicyKind::CocoaPlus, 1, params.policy);
    st.rto_overall = 0.5;
    const double r0 = cc::initial_rto(st, 0.0, params.policy);
    CHECK(r0 == 0.5);
    CHECK(cc::backoff(st, {r0, r0}, params.policy) == doctest::Approx(1.5));
}

TEST_CASE("ACK classification feeds the right estimator") {
    SUBCASE("first-try ACK is a strong sample") {
        Pair p(PolicyKind::Cocoa, {}, from_seconds(0.2));
        p.client->submit_request(0, 0);
        p.queue.run_until(from_seconds(5));
        const auto* st = p.client->cc_state(0);
        REQUIRE(st);
        CHECK(st->strong.initialized);
        CHECK_FALSE(st->weak.initialized);
        CHECK(st->strong.srtt == doctest::Approx(0.4).epsilon(1e-9));
        CHECK(st->rto_overall == doctest::Approx(0.5 * (0.4 + 4 * 0.2) + 1.0).epsilon(1e-9));
    }
    SUBCASE("ACK after one retransmission is weak and measured from the first send") {
        Pair p(PolicyKind::Cocoa, {}, from_seconds(0.2));
        int cons = 0;
        p.drop = [&cons](const Message& m) { return m.kind == MessageKind::Con && cons++ == 0; };
        p.client->submit_request(0, 0);
        p.queue.run_until(from_seconds(10));
        const auto* st = p.client->cc_state(0);
        REQUIRE(st);
        CHECK_FALSE(st->strong.initialized);
        CHECK(st->weak.initialized);
        // retransmitted at 2 s, ACK back at 2.4 s
        CHECK(st->weak.srtt == doctest::Approx(2.4).epsilon(1e-9));
    }
    SUBCASE("ACK after four transmissions is discarded") {
        Pair p(PolicyKind::Cocoa, {}, from_seconds(0.2));
        int cons = 0;
        p.drop = [&cons](const Message& m) { return m.kind == MessageKind::Con && cons++ < 3; };
        p.client->submit_request(0, 0);
        p.queue.run_until(from_seconds(60));
        CHECK(p.client->counters().acked == 1);
        const auto* st = p.client->cc_state(0);
        CHECK_FALSE(st->strong.initialized);
        CHECK_FALSE(st->weak.initialized);
        CHECK(st->rto_overall == 2.0);
    }
}

TEST_CASE("late ACK for a finished exchange is stale and leaves estimators alone") {
    Pair p(PolicyKind::Cocoa, {}, from_seconds(1.5));
    // first copy's ACK arrives at 3 s; the retransmission at 2 s draws a second ACK at 5 s
    p.client->submit_request(0, 0);
    p.queue.run_until(from_seconds(20));
    CHECK(p.client->counters().acked == 1);
    CHECK(p.client->counters().stale_acks == 1);
    CHECK(p.server->counters().duplicates == 1);
    CHECK(p.server->counters().received_unique == 1);
    const auto* st = p.client->cc_state(0);
    CHECK(st->weak.initialized);
    CHECK(st->weak.srtt == doctest::Approx(3.0));
    CHECK_FALSE(st->strong.initialized);
}

TEST_CASE("message ids wrap and skip ids still in use") {
    Pair p(PolicyKind::Cocoa);
    p.drop = [](const Message&) { return true; };
    const auto held = p.client->submit_request(0, 0); // id 0 stays in flight
    CHECK(held.message.message_id == 0);
    std::uint16_t last = 0;
    for (int i = 0; i < 65535; ++i) last = p.client->allocate_message_id(0);
    CHECK(last == 65535);
    CHECK(p.client->allocate_message_id(0) == 1); // wrapped past the busy 0
}

TEST_CASE("server deduplicates but ACKs every copy") {
    Pair p(PolicyKind::Cocoa);
    Message m;
    m.source = 1;
    m.destination = 0;
    m.message_id = 77;
    p.server->on_receive(m, 0);
    p.server->on_receive(m, 1);
    CHECK(p.server->counters().received_unique == 1);
    CHECK(p.server->counters().duplicates == 1);
    std::size_t acks = 0;
    for (const auto& w : p.wire) acks += w.kind == MessageKind::Ack && w.size == kAckSize;
    CHECK(acks == 2);

    SUBCASE("window forgets old ids") {
        for (std::uint16_t id = 100; id < 100 + 64; ++id) {
            m.message_id = id;
            p.server->on_receive(m, 2);
        }
        m.message_id = 77;
        p.server->on_receive(m, 3);
        CHECK(p.server->counters().received_unique == 66);
    }
}

TEST_CASE("NON and RST are counted as anomalies") {
    Pair p(PolicyKind::Cocoa);
    Message m;
    m.kind = MessageKind::Rst;
    m.source = 1;
    p.server->on_receive(m, 0);
    CHECK(p.server->counters().anomalies == 1);
    CHECK(p.wire.empty());
}

TEST_CASE("bad parameters are rejected") {
    EventQueue q;
    MessageLayerParams params;
    params.nstart = 0;
    CHECK_THROWS_AS(CoapEndpoint(0, PolicyKind::Cocoa, params, q, 1, [](const Message&) {}),
                    std::invalid_argument);
}
