// End-to-end tests that drive the mbarrier executable as a subprocess.  The
// path to the binary arrives as argv[1] so the suite works from any build
// directory.
#define DOCTEST_CONFIG_IMPLEMENT
#include <doctest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

namespace {

std::string g_cli_path;

std::string shell_quote(const std::string& value) {
    std::string quoted = "'";
    for (char ch : value) {
        if (ch == '\'') quoted += "'\\''";
        else quoted += ch;
    }
    quoted += "'";
    return quoted;
}

std::string slurp(const std::string& path) {
    std::ifstream file(path, std::ios::binary);
    std::ostringstream buffer;
    buffer << file.rdbuf();
    return buffer.str();
}

std::string temp_path(const std::string& suffix) {
    static int counter = 0;
    const std::string name =
        "mbarrier_cli_" + std::to_string(getpid()) + "_" + std::to_string(counter++) + suffix;
    return (std::filesystem::temp_directory_path() / name).string();
}

struct RunResult {
    int exit_code = -1;
    std::string out;
    std::string err;
};

RunResult run_cli(const std::vector<std::string>& args) {
    const std::string out_path = temp_path(".out");
    const std::string err_path = temp_path(".err");
    std::string command = shell_quote(g_cli_path);
    for (const std::string& arg : args) command += " " + shell_quote(arg);
    command += " > " + shell_quote(out_path) + " 2> " + shell_quote(err_path);
    const int status = std::system(command.c_str());
    RunResult result;
    result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    result.out = slurp(out_path);
    result.err = slurp(err_path);
    std::remove(out_path.c_str());
    std::remove(err_path.c_str());
    return result;
}

std::vector<std::string> split_lines(const std::string& text) {
    std::vector<std::string> lines;
    std::istringstream stream(text);
    std::string line;
    while (std::getline(stream, line)) lines.push_back(line);
    return lines;
}

std::vector<std::string> split_csv_row(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream stream(line);
    while (std::getline(stream, cell, ',')) cells.push_back(cell);
    return cells;
}

struct CsvDoc {
    std::vector<std::string> preamble;
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};

CsvDoc parse_csv(const std::string& text) {
    CsvDoc doc;
    for (const std::string& line : split_lines(text)) {
        if (line.empty()) continue;
        if (line.front() == '#') {
            doc.preamble.push_back(line);
        } else if (doc.header.empty()) {
            doc.header = split_csv_row(line);
        } else {
            doc.rows.push_back(split_csv_row(line));
        }
    }
    return doc;
}

bool has_prefix_line(const std::string& text, const std::string& prefix) {
    for (const std::string& line : split_lines(text)) {
        if (line.rfind(prefix, 0) == 0) return true;
    }
    return false;
}

// Value of a "# meta: key=value" line, or an empty string if absent.
std::string meta_value(const std::string& text, const std::string& key) {
    const std::string prefix = "# meta: " + key + "=";
    for (const std::string& line : split_lines(text)) {
        if (line.rfind(prefix, 0) == 0) return line.substr(prefix.size());
    }
    return {};
}

int column_of(const CsvDoc& doc, const std::string& name) {
    for (size_t c = 0; c < doc.header.size(); ++c) {
        if (doc.header[c] == name) return static_cast<int>(c);
    }
    return -1;
}

// Drops the wall-clock line so two runs of the same command can be compared.
std::string without_timestamp(const std::string& text) {
    std::string filtered;
    for (const std::string& line : split_lines(text)) {
        if (line.rfind("# generated:", 0) == 0) continue;
        filtered += line;
        filtered += '\n';
    }
    return filtered;
}

const std::vector<std::string> kRingSpec = {"--n-barriers", "30",  "--length",   "30",
                                            "--ratio-c",    "10",  "--height-v", "100"};
constexpr double kRingProductT = 0.99995252871193580154;

}  // namespace

TEST_CASE("help exits cleanly and lists the commands") {
    const RunResult help = run_cli({"--help"});
    CHECK(help.exit_code == 0);
    CHECK(help.out.find("transmission") != std::string::npos);
    CHECK(help.out.find("wavepacket") != std::string::npos);

    const RunResult list = run_cli({"reproduce", "--list"});
    CHECK(list.exit_code == 0);
    const std::vector<std::string> lines = split_lines(list.out);
    REQUIRE(lines.size() == 9);
    CHECK(lines.front() == "fig2");
    CHECK(lines.back() == "fig10");
}

TEST_CASE("usage problems exit with code 2") {
    CHECK(run_cli({}).exit_code == 2);
    CHECK(run_cli({"transmission", "--bogus-flag"}).exit_code == 2);

    // --energy is required.
    std::vector<std::string> args = {"transmission"};
    args.insert(args.end(), kRingSpec.begin(), kRingSpec.end());
    CHECK(run_cli(args).exit_code == 2);

    // Geometry must come as length/ratio or width/gap, not half of each.
    CHECK(run_cli({"transmission", "--n-barriers", "2", "--length", "3", "--height-v", "5",
                   "--energy", "1"})
              .exit_code == 2);

    const RunResult sweep = run_cli({"sweep", "--n-barriers", "2", "--width-a", "2", "--gap-b",
                                     "1", "--height-v", "5", "--axis", "c", "--from", "1",
                                     "--to", "2"});
    CHECK(sweep.exit_code == 2);
    CHECK(sweep.err.find("--energy") != std::string::npos);
}

TEST_CASE("domain failures exit with code 3 and keep the library message") {
    const RunResult run = run_cli({"transmission", "--n-barriers", "2", "--width-a", "2",
                                   "--gap-b", "1", "--height-v", "5", "--energy", "5"});
    CHECK(run.exit_code == 3);
    CHECK(run.err.find("singular") != std::string::npos);
}

TEST_CASE("numeric failures exit with code 4") {
    const RunResult run =
        run_cli({"transmission", "--n-barriers", "2", "--width-a", "400", "--gap-b", "1",
                 "--height-v", "10", "--energy", "1", "--method", "product"});
    CHECK(run.exit_code == 4);
    CHECK(run.err.find("overflow") != std::string::npos);
}

TEST_CASE("transmission emits a reproducible annotated csv") {
    std::vector<std::string> args = {"transmission"};
    args.insert(args.end(), kRingSpec.begin(), kRingSpec.end());
    args.insert(args.end(), {"--energy", "200", "--method", "product"});
    const RunResult run = run_cli(args);
    REQUIRE(run.exit_code == 0);

    CHECK(has_prefix_line(run.out, "# mbarrier "));
    CHECK(has_prefix_line(run.out, "# generated: "));
    CHECK(has_prefix_line(run.out, "# command: transmission"));
    CHECK(has_prefix_line(run.out, "# cfg: n-barriers=30"));
    CHECK(has_prefix_line(run.out, "# cfg: method=product"));

    const CsvDoc doc = parse_csv(run.out);
    REQUIRE(doc.header.size() == 2);
    CHECK(doc.header[0] == "energy");
    CHECK(doc.header[1] == "transmission");
    REQUIRE(doc.rows.size() == 1);
    CHECK(std::stod(doc.rows[0][1]) == doctest::Approx(kRingProductT).epsilon(1e-12));

    const RunResult again = run_cli(args);
    REQUIRE(again.exit_code == 0);
    CHECK(without_timestamp(run.out) == without_timestamp(again.out));
}

TEST_CASE("json output carries config, columns, and null for failed rows") {
    std::vector<std::string> args = {"--format", "json", "transmission"};
    args.insert(args.end(), kRingSpec.begin(), kRingSpec.end());
    args.insert(args.end(), {"--energy", "200", "--method", "product"});
    const RunResult run = run_cli(args);
    REQUIRE(run.exit_code == 0);
    const nlohmann::json doc = nlohmann::json::parse(run.out);
    CHECK(doc.at("command") == "transmission");
    CHECK(doc.at("config").at("method") == "product");
    REQUIRE(doc.at("columns").size() == 2);
    CHECK(doc.at("columns")[1] == "transmission");
    REQUIRE(doc.at("rows").size() == 1);
    CHECK(doc.at("rows")[0][1].get<double>() ==
          doctest::Approx(kRingProductT).epsilon(1e-12));

    // A sweep across the singular energy serializes the bad row as null.
    const RunResult sweep = run_cli({"--format", "json", "sweep", "--n-barriers", "2",
                                     "--width-a", "2", "--gap-b", "1", "--height-v", "5",
                                     "--axis", "energy", "--from", "1", "--to", "9", "--points",
                                     "11", "--method", "product"});
    REQUIRE(sweep.exit_code == 0);
    const nlohmann::json table = nlohmann::json::parse(sweep.out);
    REQUIRE(table.at("rows").size() == 11);
    CHECK(table.at("rows")[5][0].get<double>() == doctest::Approx(5.0));
    CHECK(table.at("rows")[5][1].is_null());
    CHECK(table.at("text_column") == "message");
    CHECK(table.at("text")[5].get<std::string>().find("singular") != std::string::npos);
}

TEST_CASE("config files provide defaults and explicit flags win") {
    const std::string path = temp_path(".cfg");
    {
        std::ofstream file(path);
        file << "# probe configuration\n";
        file << "energy=200\n";
        file << "method=product\n";
    }

    std::vector<std::string> base = {"transmission", "--config", path};
    base.insert(base.end(), kRingSpec.begin(), kRingSpec.end());
    const RunResult from_file = run_cli(base);
    REQUIRE(from_file.exit_code == 0);
    const CsvDoc doc = parse_csv(from_file.out);
    REQUIRE(doc.rows.size() == 1);
    CHECK(std::stod(doc.rows[0][1]) == doctest::Approx(kRingProductT).epsilon(1e-12));

    std::vector<std::string> overridden = base;
    overridden.insert(overridden.end(), {"--energy", "60"});
    const RunResult changed = run_cli(overridden);
    REQUIRE(changed.exit_code == 0);
    CHECK(has_prefix_line(changed.out, "# cfg: energy=60"));
    const CsvDoc doc2 = parse_csv(changed.out);
    REQUIRE(doc2.rows.size() == 1);
    CHECK(std::fabs(std::stod(doc2.rows[0][1]) - kRingProductT) > 1e-3);

    {
        std::ofstream file(path);
        file << "energy=200\n";
        file << "bogus=7\n";
    }
    const RunResult unknown = run_cli(base);
    CHECK(unknown.exit_code == 2);
    CHECK(unknown.err.find("bogus") != std::string::npos);

    {
        std::ofstream file(path);
        file << "just some words\n";
    }
    const RunResult malformed = run_cli(base);
    CHECK(malformed.exit_code == 2);
    CHECK(malformed.err.find("key=value") != std::string::npos);
    std::remove(path.c_str());

    const RunResult missing = run_cli({"transmission", "--config", temp_path(".cfg")});
    CHECK(missing.exit_code == 2);
    CHECK(missing.err.find("config file") != std::string::npos);
}

TEST_CASE("sweeps across a singular point warn but still exit zero") {
    const RunResult run = run_cli({"sweep", "--n-barriers", "2", "--width-a", "2", "--gap-b",
                                   "1", "--height-v", "5", "--axis", "energy", "--from", "1",
                                   "--to", "9", "--points", "11", "--method", "product"});
    REQUIRE(run.exit_code == 0);
    CHECK(run.err.find("warning:") != std::string::npos);
    CHECK(run.err.find("1 of 11") != std::string::npos);
    CHECK(run.out.find(",nan,0") != std::string::npos);
    CHECK(run.out.find("singular") != std::string::npos);

    const CsvDoc doc = parse_csv(run.out);
    REQUIRE(doc.rows.size() == 11);
    const int ok_col = column_of(doc, "ok");
    REQUIRE(ok_col >= 0);
    int flagged = 0;
    for (const auto& row : doc.rows)
        if (row[static_cast<size_t>(ok_col)] == "0") ++flagged;
    CHECK(flagged == 1);
}

TEST_CASE("cross-section peak and saturation modes run end to end") {
    const RunResult peaks =
        run_cli({"cross-section", "--n-barriers", "-1", "--length", "70", "--ratio-c", "0.75",
                 "--height-v", "70", "--mode", "peaks", "--e-min", "71", "--e-max", "200"});
    REQUIRE(peaks.exit_code == 0);
    const CsvDoc peak_doc = parse_csv(peaks.out);
    CHECK(peak_doc.header == std::vector<std::string>{"energy", "value", "prominence"});
    REQUIRE(!peak_doc.rows.empty());
    CHECK(std::stod(peak_doc.rows[0][0]) == doctest::Approx(71.9272).epsilon(1e-3));
    CHECK(meta_value(peaks.out, "peak_count") == std::to_string(peak_doc.rows.size()));

    const RunResult saturation =
        run_cli({"cross-section", "--n-barriers", "-1", "--width-a", "10", "--gap-b", "1",
                 "--height-v", "70", "--mode", "saturation", "--e-min", "71", "--e-max", "1000",
                 "--points", "300", "--tol", "0.2"});
    REQUIRE(saturation.exit_code == 0);
    CHECK(meta_value(saturation.out, "b_star") == "34");
    CHECK(meta_value(saturation.out, "saturated") == "true");
    const CsvDoc curve = parse_csv(saturation.out);
    CHECK(curve.rows.size() == 600);
    CHECK(column_of(curve, "saturation_metric") >= 0);
}

TEST_CASE("spectrum command reports the level count") {
    const RunResult run = run_cli({"spectrum", "--n-barriers", "-1", "--length", "20",
                                   "--ratio-c", "19", "--height-v", "120", "--box-c", "30",
                                   "--e-min", "1", "--e-max", "80", "--mode", "levels"});
    REQUIRE(run.exit_code == 0);
    CHECK(meta_value(run.out, "level_count") == "156");
    const CsvDoc doc = parse_csv(run.out);
    CHECK(doc.header == std::vector<std::string>{"index", "energy", "unfolded"});
    REQUIRE(doc.rows.size() == 156);
    CHECK(std::stod(doc.rows[0][1]) == doctest::Approx(1.1594975377).epsilon(1e-6));
}

TEST_CASE("pole exclusion command confirms empty large-energy regions") {
    const RunResult run = run_cli({"poles", "--length", "70", "--ratio-c", "1", "--height-v",
                                   "70", "--case", "over", "--exclusion", "--e-big", "1e6"});
    REQUIRE(run.exit_code == 0);
    const CsvDoc doc = parse_csv(run.out);
    CHECK(doc.header == std::vector<std::string>{"confirmed"});
    REQUIRE(doc.rows.size() == 1);
    CHECK(doc.rows[0][0] == "1");

    // Searching a window without bounds is a usage error, not a crash.
    const RunResult missing = run_cli({"poles", "--length", "70", "--ratio-c", "1",
                                       "--height-v", "70", "--case", "over"});
    CHECK(missing.exit_code == 2);
    CHECK(missing.err.find("--e1-min") != std::string::npos);
}

TEST_CASE("wavepacket metrics mode tracks a conserved norm") {
    const RunResult run = run_cli(
        {"wavepacket", "--n-barriers", "4", "--length", "20", "--ratio-c", "2.333",
         "--height-v", "2", "--x0", "-10", "--p0", "3", "--w0", "0.5", "--x-min", "-60",
         "--x-max", "60", "--grid-points", "841", "--dt", "0.01", "--steps", "100",
         "--region-left", "-10", "--region-right", "10", "--mode", "metrics",
         "--metrics-every", "50"});
    REQUIRE(run.exit_code == 0);
    const CsvDoc doc = parse_csv(run.out);
    REQUIRE(doc.header.size() == 7);
    CHECK(doc.header[0] == "time");
    CHECK(doc.header[1] == "norm");
    REQUIRE(doc.rows.size() == 3);  // t = 0, 0.5, 1.0
    CHECK(std::stod(doc.rows[2][0]) == doctest::Approx(1.0).epsilon(1e-12));
    for (const auto& row : doc.rows)
        CHECK(std::stod(row[1]) == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("reproduce presets carry their own context") {
    const RunResult run = run_cli({"reproduce", "fig5"});
    REQUIRE(run.exit_code == 0);
    CHECK(has_prefix_line(run.out, "# cfg: preset=fig5"));
    const std::string limit = meta_value(run.out, "limit_transmission");
    REQUIRE(!limit.empty());
    CHECK(std::stod(limit) == doctest::Approx(0.95123739250778350442).epsilon(1e-12));
    const CsvDoc doc = parse_csv(run.out);
    CHECK(doc.header == std::vector<std::string>{"n", "transmission"});
    CHECK(doc.rows.size() == 400);

    CHECK(run_cli({"reproduce", "fig99"}).exit_code == 2);
    CHECK(run_cli({"reproduce"}).exit_code == 2);
}

TEST_CASE("output can be routed to a file") {
    const std::string path = temp_path(".csv");
    std::vector<std::string> args = {"-o", path, "transmission"};
    args.insert(args.end(), kRingSpec.begin(), kRingSpec.end());
    args.insert(args.end(), {"--energy", "200"});
    const RunResult run = run_cli(args);
    REQUIRE(run.exit_code == 0);
    CHECK(run.out.empty());
    const std::string written = slurp(path);
    CHECK(written.rfind("# mbarrier ", 0) == 0);
    std::remove(path.c_str());
}

int main(int argc, char** argv) {
    if (argc < 2) {
        std::fprintf(stderr, "usage: cli_tests <path-to-mbarrier>\n");
        return 1;
    }
    g_cli_path = argv[1];
    doctest::Context context;
    context.applyCommandLine(1, argv);
    return context.run();
}
