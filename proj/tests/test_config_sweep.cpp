#include "coapcc/config.hpp"
#include "coapcc/sweep.hpp"

#include <doctest.h>

#include <cmath>
#include <map>
#include <string>

using namespace coapcc;

namespace {

std::string error_of(std::string_view yaml) {
    try {
        parse_config(yaml);
    } catch (const ConfigParseError& e) {
        return e.what();
    }
    return {};
}

SweepConfig small_sweep() {
    auto c = parse_config(R"(
policy: all
topology: chain
ldr: [1.0, 0.5]
loads_kbps: [2, 8]
seeds: [1, 2]
simulation:
  warmup_s: 5
  duration_s: 40
)");
    return c;
}

} // namespace

TEST_CASE("minimal config takes the defaults") {
    const auto c = parse_config("policy: cocoa\ntopology: chain\n");
    CHECK(c.policies == std::vector{cc::PolicyKind::Cocoa});
    CHECK(c.topologies == std::vector{TopologyKind::Chain});
    CHECK(c.ldrs == std::vector{1.0});
    CHECK(c.loads_kbps.size() == 10);
    CHECK(c.seeds == std::vector<std::uint64_t>{1, 2, 3, 4, 5});
    CHECK(c.duration_s == 900.0);
    CHECK(c.warmup_s == 60.0);
    CHECK(c.cell_count() == 50);
    CHECK(c.message.max_retransmit == 4);
    CHECK(c.mac.buffer_capacity == 8);
}

TEST_CASE("overrides are applied") {
    const auto c = parse_config(R"(
policy: [default, cocoa+]
topology: [grid6, grid7]
ldr: 0.25
loads_kbps: [1.5]
seeds: [7]
policy_params: {k_strong: 3, dither: true}
radio: {tx_range_m: 12, ldr_mode: compound}
mac: {buffer_capacity: 16, rdc_wakeup_interval_s: 0}
coap: {queue_limit: 4}
simulation: {traffic: poisson}
)");
    CHECK(c.policies == std::vector{cc::PolicyKind::DefaultCoap, cc::PolicyKind::CocoaPlus});
    CHECK(c.ldrs == std::vector{0.25});
    CHECK(c.message.policy.k_strong == 3.0);
    CHECK(c.message.policy.dither);
    CHECK(c.radio.tx_range == 12.0);
    CHECK(c.radio.ldr_mode == LdrMode::Compound);
    CHECK(c.mac.buffer_capacity == 16);
    CHECK(c.mac.rdc_wakeup_interval == 0.0);
    CHECK(c.message.queue_limit == 4);
    CHECK(c.traffic_mode == TrafficMode::Poisson);
    CHECK(c.cell_count() == 4);
}

TEST_CASE("config errors name the problem and the line") {
    const auto bad_ldr = error_of("policy: cocoa\ntopology: chain\nldr: 1.7\n");
    CHECK(bad_ldr.find("ldr") != std::string::npos);
    CHECK(bad_ldr.find("line 3") != std::string::npos);

    const auto bad_topo = error_of("policy: cocoa\ntopology: grid9\n");
    CHECK(bad_topo.find("grid9") != std::string::npos);
    CHECK(bad_topo.find("line 2") != std::string::npos);

    const auto unknown = error_of("policy: cocoa\ntopology: chain\nmac:\n  bufer_capacity: 3\n");
    CHECK(unknown.find("bufer_capacity") != std::string::npos);
    CHECK(unknown.find("line 4") != std::string::npos);

    CHECK_FALSE(error_of("topology: chain\n").empty());
    CHECK_FALSE(error_of("policy: cocoa\ntopology: chain\nloads_kbps: [25]\n").empty());
    CHECK_FALSE(error_of("policy: cocoa\ntopology: chain\nseeds: []\n").empty());
    CHECK_FALSE(error_of("policy: [cocoa\n").empty());
    CHECK_FALSE(error_of("policy: all\ntopology: all\nroles: {sink: 3}\n").empty());
}

TEST_CASE("paper matrix has 1800 cells") {
    const auto c = paper_matrix_config();
    CHECK(c.cell_count() == 1800);
    CHECK(enumerate_cells(c).size() == 1800);
    CHECK(figures_covered(c).size() == 12);
}

TEST_CASE("figure ids") {
    CHECK(figure_specs().size() == 12);
    CHECK(find_figure("fig9").topology == TopologyKind::Grid6);
    CHECK(find_figure("fig9").ldr == 0.5);
    CHECK(find_figure("fig13").topology == TopologyKind::Chain);
    CHECK(find_figure("fig13").ldr == 0.25);
    CHECK(find_figure("fig17").topology == TopologyKind::Grid7);
    CHECK(find_figure("fig14").topology == TopologyKind::Dumbbell);
    try {
        find_figure("fig99");
        FAIL("expected an error");
    } catch (const std::invalid_argument& e) {
        CHECK(std::string(e.what()).find("fig8") != std::string::npos);
    }
}

TEST_CASE("number formatting round-trips") {
    for (double v : {0.0, 1.0, 0.1, 2.5, 1.0 / 3.0, 123456.789, 1e-9, 0.8140000000000001}) {
        CHECK(std::stod(format_number(v)) == v);
    }
    CHECK(format_number(0.5) == "0.5");
    CHECK(format_number(10) == "10");
}

TEST_CASE("sweep: CSV round trip, exact means, serial equals parallel") {
    const auto config = small_sweep();
    REQUIRE(config.cell_count() == 24);
    const auto serial = run_sweep(config, 1);
    const auto parallel = run_sweep(config, 3);
    const auto csv = to_csv(serial);
    CHECK(csv == to_csv(parallel));
    CHECK(csv.rfind(std::string(kCsvHeader) + "\n", 0) == 0);

    const auto rows = parse_csv(csv);
    REQUIRE(rows.size() == 24 + 12);
    CHECK(to_csv(rows) == csv);

    // recompute every summary from the seed rows that precede it
    std::vector<double> pdr, carried, delay;
    std::size_t summaries = 0;
    for (const auto& r : rows) {
        CHECK(r.error.empty());
        if (!r.summary) {
            pdr.push_back(r.pdr);
            carried.push_back(r.carried_kbps);
            delay.push_back(r.mean_delay_s);
            continue;
        }
        ++summaries;
        REQUIRE(pdr.size() == 2);
        CHECK(r.pdr == (pdr[0] + pdr[1]) / 2.0);
        CHECK(r.carried_kbps == (carried[0] + carried[1]) / 2.0);
        CHECK(r.mean_delay_s == (delay[0] + delay[1]) / 2.0);
        pdr.clear();
        carried.clear();
        delay.clear();
    }
    CHECK(summaries == 12);

    SUBCASE("rows are in cell order") {
        for (std::size_t i = 1; i < serial.size(); ++i) {
            if (serial[i].summary || serial[i - 1].summary) continue;
            CHECK(cell_less(serial[i - 1].cell, serial[i].cell));
        }
    }
    SUBCASE("figure data pulls the summary rows") {
        const auto fig = emit_figure_data(rows, "fig11");
        CHECK(fig.rfind("# fig11:", 0) == 0);
        CHECK(fig.find("offered_kbps,default_coap,cocoa,cocoa_plus,missing") != std::string::npos);
        CHECK(std::count(fig.begin(), fig.end(), '\n') == 4);
        // loads not swept are absent, LDR 0.25 was not run at all
        const auto absent = emit_figure_data(rows, "fig13");
        CHECK(absent.find("default_coap cocoa cocoa_plus") != std::string::npos);
    }
}

TEST_CASE("malformed CSV is rejected") {
    CHECK_THROWS(parse_csv("not,a,header\n"));
    CHECK_THROWS(parse_csv(std::string(kCsvHeader) + "\ncocoa,chain,1\n"));
}

TEST_CASE("error cells become error rows") {
    auto config = small_sweep();
    config.mac.link_retries = -1; // invalid, rejected inside the cell
    const auto row = run_cell(config, enumerate_cells(config).front());
    CHECK_FALSE(row.error.empty());
    const auto csv = to_csv(summarize({row}));
    CHECK(csv.find("error") != std::string::npos);
}
