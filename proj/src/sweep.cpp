#include "coapcc/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <fstream>
#include <cmath>
#include <map>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>
#include <tuple>

namespace coapcc {

namespace {

bool same_ldr(double a, double b) { return std::fabs(a - b) < 1e-9; }

auto group_key(const Cell& c) {
    // descending LDR
    return std::make_tuple(static_cast<int>(c.policy), static_cast<int>(c.topology), -c.ldr,
                           c.load_kbps);
}

} // namespace

bool cell_less(const Cell& a, const Cell& b) {
    return std::tuple_cat(group_key(a), std::make_tuple(a.seed)) <
           std::tuple_cat(group_key(b), std::make_tuple(b.seed));
}

std::vector<Cell> enumerate_cells(const SweepConfig& config) {
    std::vector<Cell> cells;
    cells.reserve(config.cell_count());
    for (auto policy : config.policies)
        for (auto topology : config.topologies)
            for (double ldr : config.ldrs)
                for (double load : config.loads_kbps)
                    for (auto seed : config.seeds) cells.push_back({policy, topology, ldr, load, seed});
    std::sort(cells.begin(), cells.end(), cell_less);
    return cells;
}

Scenario make_scenario(const SweepConfig& config, const Cell& cell) {
    Scenario s;
    s.topology = build_topology(cell.topology);
    if (config.sink || config.relay || config.secondary_sinks) {
        override_roles(s.topology, config.sink, config.relay, config.secondary_sinks);
    }
    s.policy = cell.policy;
    s.message = config.message;
    s.radio = config.radio;
    s.radio.ldr = cell.ldr;
    s.mac = config.mac;
    s.offered_load_kbps = cell.load_kbps;
    s.traffic_mode = config.traffic_mode;
    s.warmup_s = config.warmup_s;
    s.duration_s = config.duration_s;
    s.seed = cell.seed;
    return s;
}

SweepRow make_row(const Cell& cell, const MetricsRecord& m) {
    SweepRow row;
    row.cell = cell;
    row.pdr = m.pdr;
    row.carried_kbps = m.carried_load_kbps;
    row.mean_delay_s = m.mean_delay_s;
    row.p95_delay_s = m.p95_delay_s;
    row.mac_overflows = static_cast<double>(m.mac_overflows);
    row.retransmissions = static_cast<double>(m.retransmissions);
    row.failed_exchanges = static_cast<double>(m.failed_exchanges);
    return row;
}

SweepRow run_cell(const SweepConfig& config, const Cell& cell) {
    try {
        return make_row(cell, run(make_scenario(config, cell)));
    } catch (const std::exception& e) {
        SweepRow row;
        row.cell = cell;
        row.error = e.what();
        return row;
    }
}

std::vector<SweepRow> summarize(std::vector<SweepRow> seed_rows) {
    std::sort(seed_rows.begin(), seed_rows.end(),
              [](const SweepRow& a, const SweepRow& b) { return cell_less(a.cell, b.cell); });
    std::vector<SweepRow> out;
    std::size_t i = 0;
    while (i < seed_rows.size()) {
        std::size_t j = i;
        while (j < seed_rows.size() && group_key(seed_rows[j].cell) == group_key(seed_rows[i].cell)) ++j;

        SweepRow mean;
        mean.cell = seed_rows[i].cell;
        mean.cell.seed = 0;
        mean.summary = true;
        std::size_t ok = 0;
        for (std::size_t k = i; k < j; ++k) {
            const SweepRow& r = seed_rows[k];
            out.push_back(r);
            if (!r.error.empty()) continue;
            ++ok;
            mean.pdr += r.pdr;
            mean.carried_kbps += r.carried_kbps;
            mean.mean_delay_s += r.mean_delay_s;
            mean.p95_delay_s += r.p95_delay_s;
            mean.mac_overflows += r.mac_overflows;
            mean.retransmissions += r.retransmissions;
            mean.failed_exchanges += r.failed_exchanges;
        }
        if (ok == 0) {
            mean.error = "no successful seeds";
        } else {
            const auto n = static_cast<double>(ok);
            mean.pdr /= n;
            mean.carried_kbps /= n;
            mean.mean_delay_s /= n;
            mean.p95_delay_s /= n;
            mean.mac_overflows /= n;
            mean.retransmissions /= n;
            mean.failed_exchanges /= n;
        }
        out.push_back(mean);
        i = j;
    }
    return out;
}

std::vector<SweepRow> run_sweep(const SweepConfig& config, unsigned workers, ProgressFn progress) {
    const auto cells = enumerate_cells(config);
    std::vector<SweepRow> rows(cells.size());
    std::atomic<std::size_t> next{0};
    std::atomic<std::size_t> done{0};
    std::mutex progress_mutex;

    auto work = [&] {
        for (std::size_t i = next++; i < cells.size(); i = next++) {
            rows[i] = run_cell(config, cells[i]);
            const std::size_t finished = ++done;
            if (progress) {
                std::lock_guard lock(progress_mutex);
                progress(finished, cells.size());
            }
        }
    };
    workers = std::max(1u, workers);
    if (workers == 1) {
        work();
    } else {
        std::vector<std::jthread> pool;
        for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
    }
    return summarize(std::move(rows));
}

std::string format_number(double value) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, value);
    return std::string(buf, res.ptr);
}

namespace {

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

// RFC 4180 records; quoted fields may span lines.
std::vector<std::vector<std::string>> split_csv(std::string_view text) {
    std::vector<std::vector<std::string>> records;
    std::vector<std::string> fields;
    std::string field;
    bool quoted = false;
    bool any = false;
    for (std::size_t i = 0; i < text.size(); ++i) {
        const char c = text[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < text.size() && text[i + 1] == '"') {
                    field += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                field += c;
            }
            continue;
        }
        if (c == '"') {
            quoted = true;
            any = true;
        } else if (c == ',') {
            fields.push_back(std::move(field));
            field.clear();
            any = true;
        } else if (c == '\n' || c == '\r') {
            if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') ++i;
            if (any || !field.empty()) {
                fields.push_back(std::move(field));
                records.push_back(std::move(fields));
            }
            fields.clear();
            field.clear();
            any = false;
        } else {
            field += c;
            any = true;
        }
    }
    if (quoted) throw std::runtime_error("unterminated quoted CSV field");
    if (any || !field.empty()) {
        fields.push_back(std::move(field));
        records.push_back(std::move(fields));
    }
    return records;
}

double parse_double(const std::string& s, std::size_t line) {
    double v = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
        throw std::runtime_error("CSV record " + std::to_string(line) + ": bad number '" + s + "'");
    }
    return v;
}

} // namespace

std::string to_csv(const std::vector<SweepRow>& rows) {
    std::string out(kCsvHeader);
    out += '\n';
    for (const auto& r : rows) {
        const bool failed = !r.error.empty();
        auto num = [&](double v) { return failed ? std::string() : format_number(v); };
        out += std::string(cc::to_string(r.cell.policy)) + ',' + std::string(to_string(r.cell.topology)) +
               ',' + format_number(r.cell.ldr) + ',' + format_number(r.cell.load_kbps) + ',' +
               (r.summary ? std::string("mean") : std::to_string(r.cell.seed)) + ',' + num(r.pdr) +
               ',' + num(r.carried_kbps) + ',' + num(r.mean_delay_s) + ',' + num(r.p95_delay_s) +
               ',' + num(r.mac_overflows) + ',' + num(r.retransmissions) + ',' +
               num(r.failed_exchanges) + ',' + csv_field(failed ? "error: " + r.error : "ok") + '\n';
    }
    return out;
}

std::vector<SweepRow> parse_csv(std::string_view text) {
    const auto records = split_csv(text);
    if (records.empty()) throw std::runtime_error("empty CSV");
    std::string header;
    for (std::size_t i = 0; i < records[0].size(); ++i) header += (i ? "," : "") + records[0][i];
    if (header != kCsvHeader) throw std::runtime_error("unexpected CSV header: " + header);

    std::vector<SweepRow> rows;
    for (std::size_t i = 1; i < records.size(); ++i) {
        const auto& f = records[i];
        if (f.size() != 13) {
            throw std::runtime_error("CSV record " + std::to_string(i) + ": expected 13 fields, got " +
                                     std::to_string(f.size()));
        }
        SweepRow r;
        r.cell.policy = cc::parse_policy(f[0]);
        r.cell.topology = parse_topology(f[1]);
        r.cell.ldr = parse_double(f[2], i);
        r.cell.load_kbps = parse_double(f[3], i);
        r.summary = f[4] == "mean";
        r.cell.seed = r.summary ? 0 : std::stoull(f[4]);
        if (f[12] != "ok") {
            r.error = f[12].rfind("error: ", 0) == 0 ? f[12].substr(7) : f[12];
        } else {
            r.pdr = parse_double(f[5], i);
            r.carried_kbps = parse_double(f[6], i);
            r.mean_delay_s = parse_double(f[7], i);
            r.p95_delay_s = parse_double(f[8], i);
            r.mac_overflows = parse_double(f[9], i);
            r.retransmissions = parse_double(f[10], i);
            r.failed_exchanges = parse_double(f[11], i);
        }
        rows.push_back(std::move(r));
    }
    return rows;
}

const std::vector<FigureSpec>& figure_specs() {
    static const std::vector<FigureSpec> specs = [] {
        std::vector<FigureSpec> v;
        const std::pair<TopologyKind, const char*> order[] = {
            {TopologyKind::Grid6, "Grid 6x6"},
            {TopologyKind::Chain, "Chain"},
            {TopologyKind::Dumbbell, "Dumbbell"},
            {TopologyKind::Grid7, "Grid 7x7"},
        };
        int number = 8;
        for (const auto& [topology, name] : order) {
            for (double ldr : {1.0, 0.5, 0.25}) {
                v.push_back({"fig" + std::to_string(number++), topology, ldr,
                             std::string(name) + ", " + std::to_string(static_cast<int>(ldr * 100)) +
                                 "% LDR"});
            }
        }
        return v;
    }();
    return specs;
}

const FigureSpec& find_figure(std::string_view id) {
    for (const auto& f : figure_specs())
        if (f.id == id) return f;
    std::string valid;
    for (const auto& f : figure_specs()) valid += (valid.empty() ? "" : ", ") + f.id;
    throw std::invalid_argument("unknown figure id '" + std::string(id) + "' (valid: " + valid + ")");
}

std::string emit_figure_data(const std::vector<SweepRow>& rows, std::string_view figure_id) {
    const FigureSpec& fig = find_figure(figure_id);
    constexpr cc::PolicyKind policies[] = {cc::PolicyKind::DefaultCoap, cc::PolicyKind::Cocoa,
                                           cc::PolicyKind::CocoaPlus};

    std::map<double, std::map<int, double>> series; // load -> policy -> carried
    std::vector<double> loads;
    for (const auto& r : rows) {
        if (r.cell.topology != fig.topology || !same_ldr(r.cell.ldr, fig.ldr)) continue;
        if (std::find(loads.begin(), loads.end(), r.cell.load_kbps) == loads.end()) {
            loads.push_back(r.cell.load_kbps);
        }
        if (r.summary && r.error.empty()) {
            series[r.cell.load_kbps][static_cast<int>(r.cell.policy)] = r.carried_kbps;
        }
    }
    if (loads.empty()) loads = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
    std::sort(loads.begin(), loads.end());

    std::string out = "# " + fig.id + ": " + fig.title + "\n";
    out += "offered_kbps,default_coap,cocoa,cocoa_plus,missing\n";
    for (double load : loads) {
        out += format_number(load);
        std::string missing;
        for (auto p : policies) {
            out += ',';
            const auto& at = series[load];
            if (auto it = at.find(static_cast<int>(p)); it != at.end()) {
                out += format_number(it->second);
            } else {
                missing += (missing.empty() ? "" : " ") + std::string(cc::to_string(p));
            }
        }
        out += ',' + missing + '\n';
    }
    return out;
}

std::vector<FigureSpec> figures_covered(const SweepConfig& config) {
    std::vector<FigureSpec> out;
    for (const auto& f : figure_specs()) {
        const bool topo = std::find(config.topologies.begin(), config.topologies.end(), f.topology) !=
                          config.topologies.end();
        const bool ldr = std::any_of(config.ldrs.begin(), config.ldrs.end(),
                                     [&](double l) { return same_ldr(l, f.ldr); });
        if (topo && ldr) out.push_back(f);
    }
    return out;
}

std::size_t write_outputs(const std::vector<SweepRow>& rows, const SweepConfig& config,
                          const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    auto write = [](const std::filesystem::path& path, const std::string& text) {
        std::ofstream out(path, std::ios::binary);
        out << text;
        if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
    };
    write(dir / "sweep.csv", to_csv(rows));
    std::size_t figures = 0;
    for (const auto& fig : figures_covered(config)) {
        write(dir / (fig.id + ".csv"), emit_figure_data(rows, fig.id));
        ++figures;
    }
    return figures;
}

} // namespace coapcc
