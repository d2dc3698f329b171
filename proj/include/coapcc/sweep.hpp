#pragma once

#include "coapcc/config.hpp"
#include "coapcc/metrics.hpp"

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace coapcc {

struct Cell {
    cc::PolicyKind policy = cc::PolicyKind::DefaultCoap;
    TopologyKind topology = TopologyKind::Chain;
    double ldr = 1.0;
    double load_kbps = 1.0;
    std::uint64_t seed = 1;
};

/// Sort order of cells and rows: policy, topology, LDR (descending), load, seed.
bool cell_less(const Cell& a, const Cell& b);

struct SweepRow {
    Cell cell;
    bool summary = false; // mean over seeds; `cell.seed` is meaningless
    std::string error;    // empty when the cell ran cleanly
    double pdr = 0.0;
    double carried_kbps = 0.0;
    double mean_delay_s = 0.0;
    double p95_delay_s = 0.0;
    double mac_overflows = 0.0;
    double retransmissions = 0.0;
    double failed_exchanges = 0.0;
};

inline constexpr std::string_view kCsvHeader =
    "policy,topology,ldr,offered_kbps,seed,pdr,carried_kbps,mean_delay_s,p95_delay_s,"
    "mac_overflows,retransmissions,failed_exchanges,status";

std::vector<Cell> enumerate_cells(const SweepConfig& config);
Scenario make_scenario(const SweepConfig& config, const Cell& cell);

SweepRow make_row(const Cell& cell, const MetricsRecord& metrics);

/// Runs one cell. Invariant violations become an error row rather than an exception.
SweepRow run_cell(const SweepConfig& config, const Cell& cell);

/// Seed rows followed by one summary row per (policy, topology, ldr, load).
std::vector<SweepRow> summarize(std::vector<SweepRow> seed_rows);

using ProgressFn = std::function<void(std::size_t done, std::size_t total)>;

/// Executes the whole matrix on `workers` threads. Output is independent of
/// the worker count and of completion order.
std::vector<SweepRow> run_sweep(const SweepConfig& config, unsigned workers = 1,
                                ProgressFn progress = {});

std::string to_csv(const std::vector<SweepRow>& rows);
/// Inverse of to_csv. Throws std::runtime_error on malformed input.
std::vector<SweepRow> parse_csv(std::string_view text);

/// Shortest decimal text that parses back to the same double.
std::string format_number(double value);

struct FigureSpec {
    std::string id;
    TopologyKind topology;
    double ldr;
    std::string title;
};

const std::vector<FigureSpec>& figure_specs();
/// Throws std::invalid_argument listing valid ids.
const FigureSpec& find_figure(std::string_view id);

/// Offered load against mean carried load per policy for one figure.
/// Columns: offered_kbps, default_coap, cocoa, cocoa_plus, missing.
std::string emit_figure_data(const std::vector<SweepRow>& rows, std::string_view figure_id);

/// Figures whose (topology, ldr) pair the sweep covers.
std::vector<FigureSpec> figures_covered(const SweepConfig& config);

/// Writes dir/sweep.csv and one dir/figN.csv per covered figure. Returns the
/// number of figure files.
std::size_t write_outputs(const std::vector<SweepRow>& rows, const SweepConfig& config,
                          const std::filesystem::path& dir);

} // namespace coapcc
