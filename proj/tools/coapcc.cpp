// coapcc: run CoAP congestion-control sweeps and export figure data.

#include "coapcc/cc_reference.hpp"
#include "coapcc/config.hpp"
#include "coapcc/sweep.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace fs = std::filesystem;
using namespace coapcc;

namespace {

void write_file(const fs::path& path, const std::string& text) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
    out << text;
}

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read '" + path.string() + "'");
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

int cmd_run(const std::string& config_path, unsigned parallel, const std::string& out_override,
            const std::string& event_trace, const std::string& exchange_trace, bool quiet) {
    SweepConfig cfg = load_config(config_path);
    if (!out_override.empty()) cfg.output_dir = out_override;

    const auto t0 = std::chrono::steady_clock::now();
    std::vector<SweepRow> rows;
    if (!event_trace.empty() || !exchange_trace.empty()) {
        const auto cells = enumerate_cells(cfg);
        if (cells.size() != 1) {
            std::cerr << "error: tracing requires a single-cell sweep (got " << cells.size()
                      << " cells)\n";
            return 2;
        }
        std::ofstream ev, ex;
        Scenario sc = make_scenario(cfg, cells.front());
        if (!event_trace.empty()) {
            ev.open(event_trace);
            sc.event_trace = &ev;
        }
        if (!exchange_trace.empty()) {
            ex.open(exchange_trace);
            sc.exchange_trace = &ex;
        }
        rows = summarize({make_row(cells.front(), run(sc))});
    } else {
        rows = run_sweep(cfg, parallel, [quiet](std::size_t done, std::size_t total) {
            if (!quiet && (done == total || done % 50 == 0)) {
                std::cerr << "\r" << done << "/" << total << " cells" << std::flush;
            }
        });
        if (!quiet) std::cerr << '\n';
    }

    const fs::path dir = cfg.output_dir;
    const std::size_t figures = write_outputs(rows, cfg, dir);
    const std::size_t errors = static_cast<std::size_t>(std::count_if(
        rows.begin(), rows.end(), [](const SweepRow& r) { return !r.summary && !r.error.empty(); }));
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::cout << "wrote " << (dir / "sweep.csv").string() << " (" << rows.size() << " rows, "
              << errors << " error cells) and " << figures << " figure files in " << secs << " s\n";
    return 0;
}

int cmd_figure(const std::string& id, const std::string& input, const std::string& output) {
    const auto rows = parse_csv(read_file(input));
    const std::string data = emit_figure_data(rows, id);
    if (output.empty()) {
        std::cout << data;
    } else {
        write_file(output, data);
    }
    return 0;
}

int cmd_validate(const std::string& config_path) {
    const SweepConfig cfg = load_config(config_path);
    std::cout << "ok: " << cfg.cell_count() << " cells (" << cfg.policies.size() << " policies x "
              << cfg.topologies.size() << " topologies x " << cfg.ldrs.size() << " LDRs x "
              << cfg.loads_kbps.size() << " loads x " << cfg.seeds.size() << " seeds)\n";
    return 0;
}

int cmd_oracle(std::size_t traces, std::size_t steps, std::uint64_t seed) {
    const auto report = reference::cross_check(traces, steps, seed);
    std::cout << (report.passed ? "PASS" : "FAIL") << ": " << report.traces << " traces, "
              << report.steps << " steps, max |error| = " << report.max_abs_error << " s\n";
    return report.passed ? 0 : 1;
}

int cmd_topology(const std::string& name, double tx_range) {
    const Topology t = build_topology(parse_topology(name));
    std::cout << export_text(t, compute_routes(t, tx_range));
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"CoAP congestion control simulator (Default CoAP, CoCoA, CoCoA+)"};
    app.require_subcommand(1);

    auto* run = app.add_subcommand("run", "Run the sweep described by a config file");
    std::string config_path, out_dir, event_trace, exchange_trace;
    unsigned parallel = 1;
    bool quiet = false;
    run->add_option("config", config_path, "YAML sweep configuration")->required()->check(CLI::ExistingFile);
    run->add_option("--parallel", parallel, "Worker threads")->check(CLI::Range(1u, 1024u));
    run->add_option("--out", out_dir, "Output directory (overrides the config)");
    run->add_option("--trace-events", event_trace, "NDJSON event trace (single-cell sweeps only)");
    run->add_option("--trace-exchanges", exchange_trace, "NDJSON exchange trace (single-cell sweeps only)");
    run->add_flag("-q,--quiet", quiet, "No progress output");

    auto* figure = app.add_subcommand("figure", "Extract one figure's series from a sweep CSV");
    std::string figure_id, figure_in, figure_out;
    figure->add_option("id", figure_id, "Figure id, fig8 .. fig19")->required();
    figure->add_option("--in", figure_in, "Sweep CSV")->required()->check(CLI::ExistingFile);
    figure->add_option("--out", figure_out, "Output file (default: stdout)");

    auto* validate = app.add_subcommand("validate", "Check a config file without running it");
    std::string validate_path;
    validate->add_option("config", validate_path)->required()->check(CLI::ExistingFile);

    auto* oracle = app.add_subcommand("oracle", "Cross-check the RTO estimators against the reference evaluator");
    std::size_t traces = 1000, steps = 200;
    std::uint64_t oracle_seed = 1;
    oracle->add_option("--traces", traces, "Number of random traces");
    oracle->add_option("--steps", steps, "Steps per trace");
    oracle->add_option("--seed", oracle_seed, "Trace generator seed");

    auto* topology = app.add_subcommand("topology", "Print node positions, roles and routes");
    std::string topology_name;
    double tx_range = 10.0;
    topology->add_option("name", topology_name, "chain, dumbbell, grid6 or grid7")->required();
    topology->add_option("--tx-range", tx_range, "Transmission range in meters");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*run) return cmd_run(config_path, parallel, out_dir, event_trace, exchange_trace, quiet);
        if (*figure) return cmd_figure(figure_id, figure_in, figure_out);
        if (*validate) return cmd_validate(validate_path);
        if (*oracle) return cmd_oracle(traces, steps, oracle_seed);
        if (*topology) return cmd_topology(topology_name, tx_range);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
