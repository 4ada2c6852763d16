// Command-line front end for the multibarrier library.  Every command emits a
// single table as CSV (default) or JSON, prefixed by the resolved
// configuration so a run can be reproduced from its own output.
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "multibarrier.h"

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitDomain = 3;
constexpr int kExitNumeric = 4;

using ConfigEcho = std::vector<std::pair<std::string, std::string>>;

struct LocalTable {
    std::vector<std::string> names;
    std::vector<std::vector<double>> columns;
    std::string text_name;
    std::vector<std::string> text;
    ConfigEcho meta;

    size_t rows() const { return columns.empty() ? 0 : columns.front().size(); }
};

struct CliError {
    int code;
    std::string message;
};

[[noreturn]] void fail(int code, const std::string& message) { throw CliError{code, message}; }

// Maps a C-API failure to the matching exit code, keeping the library message.
void check(mb_status status, const std::string& context) {
    if (status == MB_OK) return;
    const std::string message = context + ": " + mb_last_error();
    if (status == MB_ERR_DOMAIN) fail(kExitDomain, message);
    if (status == MB_ERR_NUMERIC) fail(kExitNumeric, message);
    fail(kExitUsage, message);
}

struct TableDeleter {
    void operator()(mb_table* t) const { mb_table_free(t); }
};
struct SpecDeleter {
    void operator()(mb_spec* s) const { mb_spec_free(s); }
};
struct PacketDeleter {
    void operator()(mb_packet* p) const { mb_packet_free(p); }
};
using TablePtr = std::unique_ptr<mb_table, TableDeleter>;
using SpecPtr = std::unique_ptr<mb_spec, SpecDeleter>;
using PacketPtr = std::unique_ptr<mb_packet, PacketDeleter>;

LocalTable to_local(const mb_table* table) {
    LocalTable local;
    const size_t cols = mb_table_n_cols(table);
    const size_t rows = mb_table_n_rows(table);
    for (size_t c = 0; c < cols; ++c) {
        local.names.emplace_back(mb_table_col_name(table, c));
        std::vector<double> column(rows);
        for (size_t r = 0; r < rows; ++r) mb_table_value(table, r, c, &column[r]);
        local.columns.push_back(std::move(column));
    }
    if (const char* tn = mb_table_text_name(table)) {
        local.text_name = tn;
        for (size_t r = 0; r < rows; ++r) local.text.emplace_back(mb_table_text(table, r));
    }
    const size_t n_meta = mb_table_n_meta(table);
    for (size_t i = 0; i < n_meta; ++i)
        local.meta.emplace_back(mb_table_meta_key(table, i), mb_table_meta_value(table, i));
    return local;
}

std::string format_double(double value) {
    if (std::isnan(value)) return "nan";
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", value);
    return buf;
}

std::string csv_escape(const std::string& value) {
    if (value.find_first_of(",\"\n") == std::string::npos) return value;
    std::string quoted = "\"";
    for (char ch : value) {
        if (ch == '"') quoted += "\"\"";
        else quoted += ch;
    }
    quoted += "\"";
    return quoted;
}

std::string timestamp_utc() {
    std::time_t now = std::time(nullptr);
    std::tm parts{};
    gmtime_r(&now, &parts);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &parts);
    return buf;
}

void write_csv(std::ostream& out, const std::string& command, const ConfigEcho& config,
               const LocalTable& table) {
    out << "# mbarrier " << mb_version() << "\n";
    out << "# generated: " << timestamp_utc() << "\n";
    out << "# command: " << command << "\n";
    for (const auto& [key, value] : config) out << "# cfg: " << key << "=" << value << "\n";
    for (const auto& [key, value] : table.meta) out << "# meta: " << key << "=" << value << "\n";
    for (size_t c = 0; c < table.names.size(); ++c) {
        if (c) out << ",";
        out << table.names[c];
    }
    if (!table.text_name.empty()) out << "," << table.text_name;
    out << "\n";
    for (size_t r = 0; r < table.rows(); ++r) {
        for (size_t c = 0; c < table.columns.size(); ++c) {
            if (c) out << ",";
            out << format_double(table.columns[c][r]);
        }
        if (!table.text_name.empty()) out << "," << csv_escape(table.text[r]);
        out << "\n";
    }
}

void write_json(std::ostream& out, const std::string& command, const ConfigEcho& config,
                const LocalTable& table) {
    nlohmann::json doc;
    doc["generated"] = timestamp_utc();
    doc["command"] = command;
    nlohmann::json cfg = nlohmann::json::object();
    for (const auto& [key, value] : config) cfg[key] = value;
    doc["config"] = cfg;
    doc["columns"] = table.names;
    nlohmann::json rows = nlohmann::json::array();
    for (size_t r = 0; r < table.rows(); ++r) {
        nlohmann::json row = nlohmann::json::array();
        for (size_t c = 0; c < table.columns.size(); ++c) row.push_back(table.columns[c][r]);
        rows.push_back(std::move(row));
    }
    doc["rows"] = std::move(rows);
    if (!table.text_name.empty()) {
        doc["text_column"] = table.text_name;
        doc["text"] = table.text;
    }
    nlohmann::json meta = nlohmann::json::object();
    for (const auto& [key, value] : table.meta) meta[key] = value;
    doc["meta"] = std::move(meta);
    out << doc.dump(2) << "\n";
}

struct OutputOptions {
    std::string path = "-";
    std::string format = "csv";
};

void emit(const OutputOptions& output, const std::string& command, const ConfigEcho& config,
          const LocalTable& table) {
    std::ofstream file;
    std::ostream* out = &std::cout;
    if (output.path != "-") {
        file.open(output.path, std::ios::trunc);
        if (!file) fail(kExitUsage, "cannot open output file " + output.path);
        out = &file;
    }
    if (output.format == "json") write_json(*out, command, config, table);
    else write_csv(*out, command, config, table);
    if (out->fail()) fail(kExitNumeric, "failed while writing " + output.path);
}

// Warn (stderr) about rows flagged as failed; the command still exits 0.
void warn_on_flagged_rows(const LocalTable& table) {
    auto it = std::find(table.names.begin(), table.names.end(), "ok");
    if (it == table.names.end()) return;
    const size_t col = static_cast<size_t>(it - table.names.begin());
    size_t failed = 0;
    std::string first;
    for (size_t r = 0; r < table.rows(); ++r) {
        if (table.columns[col][r] == 0.0) {
            if (failed == 0 && !table.text.empty()) first = table.text[r];
            ++failed;
        }
    }
    if (failed > 0) {
        std::cerr << "warning: " << failed << " of " << table.rows()
                  << " rows failed and are flagged with ok=0";
        if (!first.empty()) std::cerr << " (first: " << first << ")";
        std::cerr << "\n";
    }
}

// ---------------------------------------------------------------------------
// shared option bundles

struct SpecOptions {
    std::int64_t n_barriers = MB_INFINITE_BARRIERS;
    double width_a = 0.0;
    double gap_b = 0.0;
    double length = 0.0;
    double ratio_c = 0.0;
    double height_v = 0.0;
    bool by_length = false;

    SpecPtr build() const {
        mb_spec* raw = nullptr;
        if (by_length) {
            check(mb_spec_from_length_ratio(length, ratio_c, n_barriers, height_v, &raw),
                  "building barrier spec");
        } else {
            check(mb_spec_create(n_barriers, width_a, gap_b, height_v, &raw),
                  "building barrier spec");
        }
        return SpecPtr(raw);
    }

    void echo(ConfigEcho& config) const {
        config.emplace_back("n-barriers", std::to_string(n_barriers));
        if (by_length) {
            config.emplace_back("length", format_double(length));
            config.emplace_back("ratio-c", format_double(ratio_c));
        } else {
            config.emplace_back("width-a", format_double(width_a));
            config.emplace_back("gap-b", format_double(gap_b));
        }
        config.emplace_back("height-v", format_double(height_v));
    }
};

// Registers the two ways of describing the barrier geometry on a subcommand.
void add_spec_options(CLI::App* cmd, SpecOptions& spec, bool default_infinite) {
    auto* n = cmd->add_option("--n-barriers", spec.n_barriers,
                              default_infinite ? "Barrier count (-1 = infinite limit)"
                                               : "Barrier count");
    if (!default_infinite) n->required();
    auto* a = cmd->add_option("--width-a", spec.width_a, "Total barrier width a");
    auto* b = cmd->add_option("--gap-b", spec.gap_b, "Total gap width b");
    auto* len = cmd->add_option("--length", spec.length, "Total length L = a + b");
    auto* ratio = cmd->add_option("--ratio-c", spec.ratio_c, "Gap-to-width ratio c = b/a");
    cmd->add_option("--height-v", spec.height_v, "Barrier height v")->required();
    len->needs(ratio);
    ratio->needs(len);
    a->needs(b);
    b->needs(a);
    len->excludes(a);
    len->excludes(b);
    cmd->callback([&spec, len, a]() {
        spec.by_length = len->count() > 0;
        if (len->count() == 0 && a->count() == 0)
            throw CLI::RequiredError("--length/--ratio-c or --width-a/--gap-b");
    });
}

mb_method parse_method(const std::string& name) {
    if (name == "exact") return MB_METHOD_EXACT;
    if (name == "product") return MB_METHOD_PRODUCT;
    if (name == "limit") return MB_METHOD_LIMIT;
    fail(kExitUsage, "unknown method " + name);
}

// ---------------------------------------------------------------------------
// reproduction presets

struct PresetRun {
    std::string description;
    LocalTable table;
    ConfigEcho config;
};

LocalTable merge_sweeps(const std::string& axis_name, const std::vector<std::string>& labels,
                        const std::vector<LocalTable>& sweeps) {
    LocalTable merged;
    merged.names.push_back(axis_name);
    merged.columns.push_back(sweeps.front().columns.front());
    for (size_t s = 0; s < sweeps.size(); ++s) {
        merged.names.push_back(labels[s]);
        merged.columns.push_back(sweeps[s].columns[1]);
    }
    return merged;
}

LocalTable sweep_table(const SpecPtr& spec, const char* axis, double from, double to, int points,
                       double energy, mb_method method) {
    mb_table* raw = nullptr;
    check(mb_transmission_sweep(spec.get(), axis, from, to, points, energy, method, &raw),
          "transmission sweep");
    TablePtr table(raw);
    return to_local(table.get());
}

PresetRun preset_ratio_comparison(double height, double energy, double length,
                                  std::int64_t n_small, std::int64_t n_large) {
    std::vector<LocalTable> sweeps;
    std::vector<std::string> labels;
    for (std::int64_t n : {n_small, n_large}) {
        mb_spec* raw = nullptr;
        check(mb_spec_from_length_ratio(length, 1.0, n, height, &raw), "building barrier spec");
        SpecPtr spec(raw);
        sweeps.push_back(sweep_table(spec, "c", 1.0, 35.0, 341, energy, MB_METHOD_PRODUCT));
        labels.push_back("t_n" + std::to_string(n));
    }
    PresetRun run;
    run.table = merge_sweeps("c", labels, sweeps);
    run.config = {{"length", format_double(length)},
                  {"height-v", format_double(height)},
                  {"energy", format_double(energy)},
                  {"c-from", "1"},
                  {"c-to", "35"},
                  {"points", "341"},
                  {"barrier-counts", std::to_string(n_small) + "," + std::to_string(n_large)}};
    return run;
}

PresetRun preset_fig3() {
    std::vector<LocalTable> sweeps;
    std::vector<std::string> labels;
    for (std::int64_t n : {60, 120}) {
        mb_spec* raw = nullptr;
        check(mb_spec_create(n, 1.0, 0.5, 100.0, &raw), "building barrier spec");
        SpecPtr spec(raw);
        sweeps.push_back(sweep_table(spec, "a", 0.5, 30.0, 591, 200.0, MB_METHOD_PRODUCT));
        labels.push_back("t_n" + std::to_string(n));
    }
    PresetRun run;
    run.description = "transmission vs total width at half-width gaps, two barrier counts";
    run.table = merge_sweeps("a", labels, sweeps);
    run.config = {{"gap-over-width", "0.5"}, {"height-v", "100"},    {"energy", "200"},
                  {"a-from", "0.5"},         {"a-to", "30"},         {"points", "591"},
                  {"barrier-counts", "60,120"}};
    return run;
}

PresetRun preset_fig5() {
    PresetRun run;
    run.description = "transmission vs barrier count at fixed widths";
    run.table.names = {"n", "transmission"};
    run.table.columns.resize(2);
    for (std::int64_t n = 1; n <= 400; ++n) {
        mb_spec* raw = nullptr;
        check(mb_spec_create(n, 8.0, 4.0, 202.0, &raw), "building barrier spec");
        SpecPtr spec(raw);
        double t = 0.0;
        check(mb_transmission(spec.get(), 200.0, MB_METHOD_PRODUCT, &t), "transmission");
        run.table.columns[0].push_back(static_cast<double>(n));
        run.table.columns[1].push_back(t);
    }
    mb_spec* raw = nullptr;
    check(mb_spec_create(MB_INFINITE_BARRIERS, 8.0, 4.0, 202.0, &raw), "building barrier spec");
    SpecPtr spec(raw);
    double limit = 0.0;
    check(mb_transmission(spec.get(), 200.0, MB_METHOD_LIMIT, &limit), "transmission limit");
    run.table.meta.emplace_back("limit_transmission", format_double(limit));
    run.config = {{"width-a", "8"}, {"gap-b", "4"},   {"height-v", "202"},
                  {"energy", "200"}, {"n-from", "1"}, {"n-to", "400"}};
    return run;
}

PresetRun preset_grid(double length, double height, double e_min, double e_max, int e_points,
                      double c_min, double c_max, int c_points) {
    mb_table* raw = nullptr;
    check(mb_transmission_grid(length, height, e_min, e_max, e_points, c_min, c_max, c_points,
                               &raw),
          "transmission grid");
    TablePtr table(raw);
    PresetRun run;
    run.table = to_local(table.get());
    run.config = {{"length", format_double(length)},   {"height-v", format_double(height)},
                  {"e-min", format_double(e_min)},     {"e-max", format_double(e_max)},
                  {"e-points", std::to_string(e_points)}, {"c-min", format_double(c_min)},
                  {"c-max", format_double(c_max)},     {"c-points", std::to_string(c_points)}};
    return run;
}

PresetRun preset_fig7() {
    mb_spec* raw = nullptr;
    check(mb_spec_from_length_ratio(70.0, 0.75, MB_INFINITE_BARRIERS, 70.0, &raw),
          "building barrier spec");
    SpecPtr spec(raw);
    mb_table* table_raw = nullptr;
    check(mb_cross_section_table(spec.get(), 71.0, 1000.0, 9291, &table_raw),
          "cross-section table");
    TablePtr table(table_raw);
    PresetRun run;
    run.description = "cross-section branches vs energy above the barrier";
    run.table = to_local(table.get());
    run.config = {{"length", "70"}, {"ratio-c", "0.75"},  {"height-v", "70"},
                  {"e-min", "71"},  {"e-max", "1000"},    {"points", "9291"}};
    return run;
}

PresetRun preset_fig8() {
    mb_spec* raw = nullptr;
    check(mb_spec_from_length_ratio(20.0, 19.0, MB_INFINITE_BARRIERS, 120.0, &raw),
          "building barrier spec");
    SpecPtr spec(raw);
    mb_table* hist_raw = nullptr;
    check(mb_spectrum_compute(spec.get(), 90.0, 1.0, 600.0, MB_REGIME_BOTH, 25, nullptr,
                              &hist_raw),
          "spectrum");
    TablePtr hist(hist_raw);
    PresetRun run;
    run.description = "level-spacing histogram of the boxed spectrum";
    run.table = to_local(hist.get());
    run.config = {{"length", "20"},  {"ratio-c", "19"}, {"height-v", "120"}, {"box-c", "90"},
                  {"e-min", "1"},    {"e-max", "600"},  {"bins", "25"},      {"filter", "both"}};
    return run;
}

PresetRun preset_fig9() {
    const double dt = 5.8 / 16572.0;
    std::vector<std::vector<double>> abs2;
    std::vector<double> x_axis;
    for (std::int64_t n : {4, 150}) {
        mb_packet* packet_raw = nullptr;
        check(mb_packet_create(-10.0, 3.0, 0.5, -60.0, 60.0, 6001, &packet_raw),
              "building packet");
        PacketPtr packet(packet_raw);
        mb_spec* spec_raw = nullptr;
        check(mb_spec_from_length_ratio(20.0, 2.333, n, 2.0, &spec_raw), "building barrier spec");
        SpecPtr spec(spec_raw);
        check(mb_packet_set_barriers(packet.get(), spec.get(), -10.0, 10.0), "placing barriers");
        check(mb_packet_evolve(packet.get(), dt, 16572, MB_SCHEME_SPLIT_STEP,
                               MB_BOUNDARY_REFLECTING, 0.1),
              "evolving packet");
        mb_table* snap_raw = nullptr;
        check(mb_packet_snapshot(packet.get(), &snap_raw), "packet snapshot");
        TablePtr snap(snap_raw);
        LocalTable local = to_local(snap.get());
        if (x_axis.empty()) x_axis = local.columns[0];
        abs2.push_back(local.columns[3]);
    }
    PresetRun run;
    run.description = "final packet density for sparse and dense barrier arrays";
    run.table.names = {"x", "abs2_n4", "abs2_n150"};
    run.table.columns = {x_axis, abs2[0], abs2[1]};
    run.config = {{"x0", "-10"},        {"p0", "3"},        {"w0", "0.5"},
                  {"x-min", "-60"},     {"x-max", "60"},    {"grid-points", "6001"},
                  {"dt", format_double(dt)}, {"steps", "16572"}, {"length", "20"},
                  {"ratio-c", "2.333"}, {"height-v", "2"},  {"region-left", "-10"},
                  {"region-right", "10"}, {"barrier-counts", "4,150"}};
    return run;
}

PresetRun run_preset(const std::string& name) {
    if (name == "fig2") {
        PresetRun run = preset_ratio_comparison(100.0, 200.0, 30.0, 30, 40);
        run.description = "transmission vs gap ratio above the barrier, two barrier counts";
        return run;
    }
    if (name == "fig3") return preset_fig3();
    if (name == "fig4") {
        PresetRun run = preset_ratio_comparison(200.0, 180.0, 30.0, 30, 50);
        run.description = "transmission vs gap ratio below the barrier, two barrier counts";
        return run;
    }
    if (name == "fig5") return preset_fig5();
    if (name == "fig6") {
        PresetRun run = preset_grid(70.0, 60.0, 61.0, 120.0, 60, 0.01, 5.0, 100);
        run.description = "limit transmission over an (energy, ratio) grid above the barrier";
        return run;
    }
    if (name == "fig7") return preset_fig7();
    if (name == "fig8") return preset_fig8();
    if (name == "fig9") return preset_fig9();
    if (name == "fig10") {
        PresetRun run = preset_grid(70.0, 200.0, 150.0, 195.0, 46, 0.01, 5.0, 100);
        run.description = "limit transmission over an (energy, ratio) grid below the barrier";
        return run;
    }
    fail(kExitUsage, "unknown preset " + name + " (expected fig2..fig10)");
}

// ---------------------------------------------------------------------------
// config file handling: line-oriented key=value, flags override file values.

std::vector<std::string> inject_config(std::vector<std::string> args) {
    std::string config_path;
    for (size_t i = 1; i < args.size(); ++i) {
        const std::string& arg = args[i];
        if (arg == "--config") {
            if (i + 1 >= args.size()) fail(kExitUsage, "--config requires a file path");
            config_path = args[i + 1];
            args.erase(args.begin() + static_cast<long>(i), args.begin() + static_cast<long>(i) + 2);
            break;
        }
        if (arg.rfind("--config=", 0) == 0) {
            config_path = arg.substr(9);
            args.erase(args.begin() + static_cast<long>(i));
            break;
        }
    }
    if (config_path.empty()) return args;

    std::ifstream file(config_path);
    if (!file) fail(kExitUsage, "cannot read config file " + config_path);
    std::vector<std::string> injected;
    std::string line;
    while (std::getline(file, line)) {
        const size_t start = line.find_first_not_of(" \t");
        if (start == std::string::npos) continue;
        line = line.substr(start);
        if (line.empty() || line[0] == '#') continue;
        const size_t eq = line.find('=');
        if (eq == std::string::npos)
            fail(kExitUsage, "config line is not key=value: " + line);
        injected.push_back("--" + line.substr(0, eq) + "=" + line.substr(eq + 1));
    }

    // Insert file-provided flags right after the subcommand so that explicit
    // command-line flags, which come later, override them.
    static const std::vector<std::string> commands = {
        "transmission", "sweep", "cross-section", "spectrum", "poles", "wavepacket", "reproduce"};
    size_t insert_at = 0;
    for (size_t i = 1; i < args.size(); ++i) {
        if (std::find(commands.begin(), commands.end(), args[i]) != commands.end()) {
            insert_at = i + 1;
            break;
        }
    }
    if (insert_at == 0) fail(kExitUsage, "--config requires a command to apply to");
    args.insert(args.begin() + static_cast<long>(insert_at), injected.begin(), injected.end());
    return args;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Transmission, scattering, spectra, resonances and wave packets for a "
                 "one-dimensional array of identical potential barriers"};
    app.require_subcommand(1);
    // Later occurrences win, so config-file values can be overridden by flags.
    app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);

    OutputOptions output;
    app.add_option("-o,--output", output.path, "Output file path ('-' = stdout)")
        ->capture_default_str();
    app.add_option("--format", output.format, "Output format")
        ->check(CLI::IsMember({"csv", "json"}))
        ->capture_default_str();
    app.set_help_all_flag("--help-all", "Print help for all commands");

    // ---- transmission ----
    auto* cmd_trans = app.add_subcommand("transmission", "Transmission at a single energy");
    SpecOptions trans_spec;
    double trans_energy = 0.0;
    std::string trans_method = "exact";
    add_spec_options(cmd_trans, trans_spec, false);
    cmd_trans->add_option("--energy", trans_energy, "Incident energy")->required();
    cmd_trans->add_option("--method", trans_method, "exact | product | limit")
        ->check(CLI::IsMember({"exact", "product", "limit"}))
        ->capture_default_str();

    // ---- sweep ----
    auto* cmd_sweep = app.add_subcommand("sweep", "Transmission along one axis");
    SpecOptions sweep_spec;
    std::string sweep_axis = "energy";
    double sweep_from = 0.0, sweep_to = 0.0, sweep_energy = 0.0;
    int sweep_points = 200;
    std::string sweep_method = "product";
    add_spec_options(cmd_sweep, sweep_spec, false);
    cmd_sweep->add_option("--axis", sweep_axis, "energy | c | a")
        ->check(CLI::IsMember({"energy", "c", "a"}))
        ->capture_default_str();
    cmd_sweep->add_option("--from", sweep_from, "Axis start")->required();
    cmd_sweep->add_option("--to", sweep_to, "Axis end")->required();
    cmd_sweep->add_option("--points", sweep_points, "Sample count")->capture_default_str();
    cmd_sweep->add_option("--energy", sweep_energy, "Probe energy for c/a sweeps");
    cmd_sweep->add_option("--method", sweep_method, "exact | product | limit")
        ->check(CLI::IsMember({"exact", "product", "limit"}))
        ->capture_default_str();

    // ---- cross-section ----
    auto* cmd_cross = app.add_subcommand("cross-section",
                                         "Cross sections of the infinite-limit S matrix");
    SpecOptions cross_spec;
    std::string cross_mode = "table";
    double cross_emin = 0.0, cross_emax = 0.0;
    int cross_points = 500;
    int cross_branch = 1;
    double cross_prominence = 0.5;
    double cross_tol = 1e-3, cross_horizon = 60.0;
    add_spec_options(cmd_cross, cross_spec, true);
    cmd_cross->add_option("--mode", cross_mode, "table | peaks | saturation")
        ->check(CLI::IsMember({"table", "peaks", "saturation"}))
        ->capture_default_str();
    cmd_cross->add_option("--e-min", cross_emin, "Energy window start")->required();
    cmd_cross->add_option("--e-max", cross_emax, "Energy window end")->required();
    cmd_cross->add_option("--points", cross_points, "Sample count (table/saturation)")
        ->capture_default_str();
    cmd_cross->add_option("--branch", cross_branch, "+1 or -1 cross-section branch")
        ->capture_default_str();
    cmd_cross->add_option("--min-prominence", cross_prominence, "Peak prominence threshold")
        ->capture_default_str();
    cmd_cross->add_option("--tol", cross_tol, "Saturation tolerance")->capture_default_str();
    cmd_cross->add_option("--b-max-over-a", cross_horizon, "Saturation horizon in units of a")
        ->capture_default_str();

    // ---- spectrum ----
    auto* cmd_spectrum = app.add_subcommand("spectrum", "Quantized levels in a periodic box");
    SpecOptions spectrum_spec;
    double spectrum_box = 90.0, spectrum_emin = 1.0, spectrum_emax = 600.0;
    int spectrum_bins = 25;
    std::string spectrum_filter = "both";
    std::string spectrum_mode = "levels";
    add_spec_options(cmd_spectrum, spectrum_spec, true);
    cmd_spectrum->add_option("--box-c", spectrum_box, "Box half-width")->capture_default_str();
    cmd_spectrum->add_option("--e-min", spectrum_emin, "Window start")->capture_default_str();
    cmd_spectrum->add_option("--e-max", spectrum_emax, "Window end")->capture_default_str();
    cmd_spectrum->add_option("--bins", spectrum_bins, "Histogram bins")->capture_default_str();
    cmd_spectrum->add_option("--filter", spectrum_filter, "both | over | under")
        ->check(CLI::IsMember({"both", "over", "under"}))
        ->capture_default_str();
    cmd_spectrum->add_option("--mode", spectrum_mode, "levels | spacings")
        ->check(CLI::IsMember({"levels", "spacings"}))
        ->capture_default_str();

    // ---- poles ----
    auto* cmd_poles = app.add_subcommand("poles", "Complex-energy resonance poles");
    double poles_length = 0.0, poles_ratio = 0.0, poles_height = 0.0;
    double poles_e1min = 0.0, poles_e1max = 0.0, poles_e2min = 0.0, poles_e2max = 0.0;
    int poles_n1 = 20, poles_n2 = 20;
    std::string poles_case = "over";
    bool poles_exclusion = false;
    double poles_ebig = 1e6;
    cmd_poles->add_option("--length", poles_length, "Total length L")->required();
    cmd_poles->add_option("--ratio-c", poles_ratio, "Gap-to-width ratio c")->required();
    cmd_poles->add_option("--height-v", poles_height, "Barrier height v")->required();
    cmd_poles->add_option("--case", poles_case, "over | under-neg | under-pos")
        ->check(CLI::IsMember({"over", "under-neg", "under-pos"}))
        ->capture_default_str();
    cmd_poles->add_option("--e1-min", poles_e1min, "Real-part window start");
    cmd_poles->add_option("--e1-max", poles_e1max, "Real-part window end");
    cmd_poles->add_option("--e2-min", poles_e2min, "Imaginary-part window start");
    cmd_poles->add_option("--e2-max", poles_e2max, "Imaginary-part window end");
    cmd_poles->add_option("--n1", poles_n1, "Seed count along e1")->capture_default_str();
    cmd_poles->add_option("--n2", poles_n2, "Seed count along e2")->capture_default_str();
    cmd_poles->add_flag("--exclusion", poles_exclusion,
                        "Check the large-energy regions instead of searching a window");
    cmd_poles->add_option("--e-big", poles_ebig, "Large-energy scale for --exclusion")
        ->capture_default_str();

    // ---- wavepacket ----
    auto* cmd_packet = app.add_subcommand("wavepacket", "Evolve a Gaussian packet");
    SpecOptions packet_spec;
    double packet_x0 = -10.0, packet_p0 = 3.0, packet_w0 = 0.5;
    double packet_xmin = -60.0, packet_xmax = 60.0;
    int packet_points = 6001;
    double packet_dt = 0.0;
    long packet_steps = 0;
    double packet_left = -10.0, packet_right = 10.0;
    std::string packet_scheme = "split-step";
    std::string packet_boundary = "reflecting";
    double packet_absorb = 0.1;
    std::string packet_mode = "snapshot";
    long packet_every = 50;
    bool packet_free = false;
    add_spec_options(cmd_packet, packet_spec, false);
    cmd_packet->add_flag("--free", packet_free, "Ignore the barriers and evolve freely");
    cmd_packet->add_option("--x0", packet_x0, "Initial mean position")->capture_default_str();
    cmd_packet->add_option("--p0", packet_p0, "Initial mean momentum")->capture_default_str();
    cmd_packet->add_option("--w0", packet_w0, "Momentum-space width")->capture_default_str();
    cmd_packet->add_option("--x-min", packet_xmin, "Grid start")->capture_default_str();
    cmd_packet->add_option("--x-max", packet_xmax, "Grid end")->capture_default_str();
    cmd_packet->add_option("--grid-points", packet_points, "Grid nodes")->capture_default_str();
    cmd_packet->add_option("--dt", packet_dt, "Time step")->required();
    cmd_packet->add_option("--steps", packet_steps, "Step count")->required();
    cmd_packet->add_option("--region-left", packet_left, "Barrier region start")
        ->capture_default_str();
    cmd_packet->add_option("--region-right", packet_right, "Barrier region end")
        ->capture_default_str();
    cmd_packet->add_option("--scheme", packet_scheme, "split-step | staggered")
        ->check(CLI::IsMember({"split-step", "staggered"}))
        ->capture_default_str();
    cmd_packet->add_option("--boundary", packet_boundary, "reflecting | absorbing")
        ->check(CLI::IsMember({"reflecting", "absorbing"}))
        ->capture_default_str();
    cmd_packet->add_option("--absorb-fraction", packet_absorb, "Absorbing ramp width fraction")
        ->capture_default_str();
    cmd_packet->add_option("--mode", packet_mode, "snapshot | metrics")
        ->check(CLI::IsMember({"snapshot", "metrics"}))
        ->capture_default_str();
    cmd_packet->add_option("--metrics-every", packet_every, "Steps between metric rows")
        ->capture_default_str();

    // ---- reproduce ----
    auto* cmd_repro = app.add_subcommand("reproduce", "Run a named reproduction preset");
    std::string preset_name;
    bool preset_list = false;
    cmd_repro->add_option("preset", preset_name, "fig2 .. fig10");
    cmd_repro->add_flag("--list", preset_list, "List available presets");

    std::vector<std::string> args(argv, argv + argc);
    try {
        args = inject_config(std::move(args));
    } catch (const CliError& err) {
        std::cerr << "error: " << err.message << "\n";
        return err.code;
    }
    std::vector<const char*> c_args;
    c_args.reserve(args.size());
    for (const std::string& arg : args) c_args.push_back(arg.c_str());

    try {
        app.parse(static_cast<int>(c_args.size()), c_args.data());
    } catch (const CLI::ParseError& err) {
        if (err.get_exit_code() == 0) return app.exit(err);
        app.exit(err);
        return kExitUsage;
    }

    try {
        if (cmd_trans->parsed()) {
            SpecPtr spec = trans_spec.build();
            double value = 0.0;
            check(mb_transmission(spec.get(), trans_energy, parse_method(trans_method), &value),
                  "transmission");
            LocalTable table;
            table.names = {"energy", "transmission"};
            table.columns = {{trans_energy}, {value}};
            ConfigEcho config;
            trans_spec.echo(config);
            config.emplace_back("energy", format_double(trans_energy));
            config.emplace_back("method", trans_method);
            emit(output, "transmission", config, table);
        } else if (cmd_sweep->parsed()) {
            if (sweep_axis != "energy" && cmd_sweep->count("--energy") == 0)
                fail(kExitUsage, "sweeps over c or a need --energy");
            SpecPtr spec = sweep_spec.build();
            mb_table* raw = nullptr;
            check(mb_transmission_sweep(spec.get(), sweep_axis.c_str(), sweep_from, sweep_to,
                                        sweep_points, sweep_energy, parse_method(sweep_method),
                                        &raw),
                  "transmission sweep");
            TablePtr table(raw);
            LocalTable local = to_local(table.get());
            ConfigEcho config;
            sweep_spec.echo(config);
            config.emplace_back("axis", sweep_axis);
            config.emplace_back("from", format_double(sweep_from));
            config.emplace_back("to", format_double(sweep_to));
            config.emplace_back("points", std::to_string(sweep_points));
            if (sweep_axis != "energy")
                config.emplace_back("energy", format_double(sweep_energy));
            config.emplace_back("method", sweep_method);
            emit(output, "sweep", config, local);
            warn_on_flagged_rows(local);
        } else if (cmd_cross->parsed()) {
            SpecPtr spec = cross_spec.build();
            LocalTable local;
            ConfigEcho config;
            cross_spec.echo(config);
            config.emplace_back("mode", cross_mode);
            config.emplace_back("e-min", format_double(cross_emin));
            config.emplace_back("e-max", format_double(cross_emax));
            if (cross_mode == "table") {
                mb_table* raw = nullptr;
                check(mb_cross_section_table(spec.get(), cross_emin, cross_emax, cross_points,
                                             &raw),
                      "cross-section table");
                TablePtr table(raw);
                local = to_local(table.get());
                config.emplace_back("points", std::to_string(cross_points));
            } else if (cross_mode == "peaks") {
                mb_table* raw = nullptr;
                check(mb_sigma_peaks(spec.get(), cross_emin, cross_emax, cross_branch,
                                     cross_prominence, &raw),
                      "peak search");
                TablePtr table(raw);
                local = to_local(table.get());
                config.emplace_back("branch", std::to_string(cross_branch));
                config.emplace_back("min-prominence", format_double(cross_prominence));
            } else {
                if (cross_points < 2) fail(kExitUsage, "--points must be at least 2");
                int64_t n_barriers = 0;
                double width = 0.0, height = 0.0;
                check(mb_spec_describe(spec.get(), &n_barriers, &width, nullptr, &height),
                      "reading spec");
                std::vector<double> energies(static_cast<size_t>(cross_points));
                const double step = (cross_emax - cross_emin) / (cross_points - 1);
                for (int i = 0; i < cross_points; ++i) energies[static_cast<size_t>(i)] =
                    cross_emin + i * step;
                double b_star = 0.0;
                int saturated = 0;
                mb_table* raw = nullptr;
                check(mb_saturation_gap(width, height, energies.data(), energies.size(),
                                        cross_tol, cross_horizon, cross_branch, &b_star,
                                        &saturated, &raw),
                      "saturation scan");
                TablePtr table(raw);
                local = to_local(table.get());
                config.emplace_back("points", std::to_string(cross_points));
                config.emplace_back("branch", std::to_string(cross_branch));
                config.emplace_back("tol", format_double(cross_tol));
                config.emplace_back("b-max-over-a", format_double(cross_horizon));
            }
            emit(output, "cross-section", config, local);
            warn_on_flagged_rows(local);
        } else if (cmd_spectrum->parsed()) {
            SpecPtr spec = spectrum_spec.build();
            mb_regime_filter filter = MB_REGIME_BOTH;
            if (spectrum_filter == "over") filter = MB_REGIME_OVER_ONLY;
            if (spectrum_filter == "under") filter = MB_REGIME_UNDER_ONLY;
            mb_table* levels_raw = nullptr;
            mb_table* hist_raw = nullptr;
            const bool want_levels = spectrum_mode == "levels";
            check(mb_spectrum_compute(spec.get(), spectrum_box, spectrum_emin, spectrum_emax,
                                      filter, spectrum_bins,
                                      want_levels ? &levels_raw : nullptr,
                                      want_levels ? nullptr : &hist_raw),
                  "spectrum");
            TablePtr table(want_levels ? levels_raw : hist_raw);
            LocalTable local = to_local(table.get());
            ConfigEcho config;
            spectrum_spec.echo(config);
            config.emplace_back("box-c", format_double(spectrum_box));
            config.emplace_back("e-min", format_double(spectrum_emin));
            config.emplace_back("e-max", format_double(spectrum_emax));
            config.emplace_back("filter", spectrum_filter);
            config.emplace_back("mode", spectrum_mode);
            if (!want_levels) config.emplace_back("bins", std::to_string(spectrum_bins));
            emit(output, "spectrum", config, local);
        } else if (cmd_poles->parsed()) {
            mb_pole_case pole_case = MB_POLE_OVER;
            if (poles_case == "under-neg") pole_case = MB_POLE_UNDER_NEG;
            if (poles_case == "under-pos") pole_case = MB_POLE_UNDER_POS;
            ConfigEcho config = {{"length", format_double(poles_length)},
                                 {"ratio-c", format_double(poles_ratio)},
                                 {"height-v", format_double(poles_height)},
                                 {"case", poles_case}};
            LocalTable local;
            if (poles_exclusion) {
                int confirmed = 0;
                check(mb_pole_exclusion(poles_length, poles_ratio, poles_height, pole_case,
                                        poles_ebig, &confirmed),
                      "pole exclusion");
                local.names = {"confirmed"};
                local.columns = {{static_cast<double>(confirmed)}};
                config.emplace_back("exclusion", "true");
                config.emplace_back("e-big", format_double(poles_ebig));
            } else {
                for (const char* miss : {"--e1-min", "--e1-max", "--e2-min", "--e2-max"})
                    if (cmd_poles->count(miss) == 0)
                        fail(kExitUsage, std::string("pole search needs ") + miss);
                mb_table* raw = nullptr;
                check(mb_find_poles(poles_length, poles_ratio, poles_height, poles_e1min,
                                    poles_e1max, poles_e2min, poles_e2max, poles_n1, poles_n2,
                                    pole_case, &raw),
                      "pole search");
                TablePtr table(raw);
                local = to_local(table.get());
                config.emplace_back("e1-min", format_double(poles_e1min));
                config.emplace_back("e1-max", format_double(poles_e1max));
                config.emplace_back("e2-min", format_double(poles_e2min));
                config.emplace_back("e2-max", format_double(poles_e2max));
                config.emplace_back("n1", std::to_string(poles_n1));
                config.emplace_back("n2", std::to_string(poles_n2));
            }
            emit(output, "poles", config, local);
        } else if (cmd_packet->parsed()) {
            mb_packet* packet_raw = nullptr;
            check(mb_packet_create(packet_x0, packet_p0, packet_w0, packet_xmin, packet_xmax,
                                   packet_points, &packet_raw),
                  "building packet");
            PacketPtr packet(packet_raw);
            SpecPtr spec;
            if (!packet_free) {
                spec = packet_spec.build();
                check(mb_packet_set_barriers(packet.get(), spec.get(), packet_left, packet_right),
                      "placing barriers");
            }
            const mb_scheme scheme = (packet_scheme == "staggered") ? MB_SCHEME_STAGGERED
                                                                    : MB_SCHEME_SPLIT_STEP;
            const mb_boundary boundary = (packet_boundary == "absorbing")
                                             ? MB_BOUNDARY_ABSORBING
                                             : MB_BOUNDARY_REFLECTING;
            LocalTable local;
            if (packet_mode == "snapshot") {
                check(mb_packet_evolve(packet.get(), packet_dt, packet_steps, scheme, boundary,
                                       packet_absorb),
                      "evolving packet");
                mb_table* snap_raw = nullptr;
                check(mb_packet_snapshot(packet.get(), &snap_raw), "packet snapshot");
                TablePtr snap(snap_raw);
                local = to_local(snap.get());
            } else {
                if (packet_every < 1) fail(kExitUsage, "--metrics-every must be >= 1");
                local.names = {"time", "norm", "fraction_left", "fraction_inside",
                               "fraction_right", "spatial_variance", "gradient_energy"};
                local.columns.resize(local.names.size());
                double metrics[6];
                double now = 0.0;
                auto record = [&]() {
                    check(mb_packet_metrics(packet.get(), packet_left, packet_right, metrics),
                          "packet metrics");
                    check(mb_packet_time(packet.get(), &now), "packet time");
                    local.columns[0].push_back(now);
                    for (int i = 0; i < 6; ++i)
                        local.columns[static_cast<size_t>(i + 1)].push_back(metrics[i]);
                };
                record();
                long remaining = packet_steps;
                while (remaining > 0) {
                    const long chunk = std::min(packet_every, remaining);
                    check(mb_packet_evolve(packet.get(), packet_dt, chunk, scheme, boundary,
                                           packet_absorb),
                          "evolving packet");
                    remaining -= chunk;
                    record();
                }
            }
            ConfigEcho config;
            if (!packet_free) packet_spec.echo(config);
            config.emplace_back("free", packet_free ? "true" : "false");
            config.emplace_back("x0", format_double(packet_x0));
            config.emplace_back("p0", format_double(packet_p0));
            config.emplace_back("w0", format_double(packet_w0));
            config.emplace_back("x-min", format_double(packet_xmin));
            config.emplace_back("x-max", format_double(packet_xmax));
            config.emplace_back("grid-points", std::to_string(packet_points));
            config.emplace_back("dt", format_double(packet_dt));
            config.emplace_back("steps", std::to_string(packet_steps));
            config.emplace_back("region-left", format_double(packet_left));
            config.emplace_back("region-right", format_double(packet_right));
            config.emplace_back("scheme", packet_scheme);
            config.emplace_back("boundary", packet_boundary);
            config.emplace_back("mode", packet_mode);
            if (packet_mode == "metrics")
                config.emplace_back("metrics-every", std::to_string(packet_every));
            emit(output, "wavepacket", config, local);
        } else if (cmd_repro->parsed()) {
            if (preset_list) {
                for (const char* name : {"fig2", "fig3", "fig4", "fig5", "fig6", "fig7", "fig8",
                                         "fig9", "fig10"})
                    std::cout << name << "\n";
                return 0;
            }
            if (preset_name.empty()) fail(kExitUsage, "reproduce needs a preset name or --list");
            PresetRun run = run_preset(preset_name);
            ConfigEcho config = {{"preset", preset_name}};
            config.insert(config.end(), run.config.begin(), run.config.end());
            LocalTable& table = run.table;
            if (!run.description.empty())
                table.meta.emplace_back("description", run.description);
            emit(output, "reproduce", config, table);
        }
    } catch (const CliError& err) {
        std::cerr << "error: " << err.message << "\n";
        return err.code;
    } catch (const std::exception& err) {
        std::cerr << "error: " << err.what() << "\n";
        return kExitNumeric;
    }
    return 0;
}
