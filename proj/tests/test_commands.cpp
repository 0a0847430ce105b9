#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "fockcool/commands.hpp"
#include "fockcool/displacement.hpp"
#include "oracle.hpp"

using namespace fockcool;

namespace {

std::filesystem::path scratch_dir(const std::string &name) {
    auto dir = std::filesystem::temp_directory_path() / ("fockcool_test_" + name);
    std::filesystem::remove_all(dir);
    return dir;
}

// Data rows of a CSV with '#' metadata and one header line.
std::vector<std::vector<double>> read_rows(const std::filesystem::path &path,
                                           std::string *header = nullptr) {
    std::ifstream in(path);
    std::string line;
    std::vector<std::vector<double>> rows;
    bool seen_header = false;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') {
            continue;
        }
        if (!seen_header) {
            seen_header = true;
            if (header != nullptr) {
                *header = line;
            }
            continue;
        }
        std::vector<double> row;
        std::stringstream fields(line);
        std::string cell;
        while (std::getline(fields, cell, ',')) {
            // Non-numeric cells (pulse lists) become NaN.
            try {
                row.push_back(std::stod(cell));
            } catch (const std::invalid_argument &) {
                row.push_back(std::nan(""));
            }
        }
        rows.push_back(row);
    }
    return rows;
}

std::string value_after(const std::string &text, const std::string &label) {
    const auto pos = text.find(label);
    REQUIRE(pos != std::string::npos);
    std::istringstream in(text.substr(pos + label.size()));
    std::string value;
    in >> value;
    return value;
}

RunConfig cheap_config(const std::string &dir) {
    auto c = parse_config("params.eta = 1.0\n"
                          "initial.nbar = 1\n"
                          "cycle.pulses = [(-3, 1.0)]\n"
                          "cycle.n_cycles = 10\n");
    c.out_dir = dir;
    return c;
}

} // namespace

TEST_CASE("elements command") {
    std::ostringstream out, err;
    CHECK(cmd_elements(0, 0, 1.0, out, err) == kExitOk);
    CHECK(value_after(out.str(), "magnitude ") == "0.606530659713");

    out.str("");
    CHECK(cmd_elements(2, 2, 0.0, out, err) == kExitOk);
    CHECK(value_after(out.str(), "magnitude ") == "1.000000000000");

    out.str("");
    CHECK(cmd_elements(0, 25, 5.0, out, err) == kExitOk);
    const double printed = std::stod(value_after(out.str(), "magnitude "));
    const auto d = oracle::oracle_displacement_matrix(5.0, 25, kick_padding(5.0));
    CHECK(std::abs(printed - std::abs(d(0, 25))) <= 1e-8);

    CHECK(cmd_elements(-1, 0, 1.0, out, err) == kExitConfig);
    CHECK(format12(1.5e-7) == "1.50000000000e-07");
    CHECK(format12(-0.0) == "0.000000000000");
}

TEST_CASE("rates command") {
    auto c = parse_config("params.eta = 0\n");
    std::ostringstream out, err;
    REQUIRE(cmd_rates(c, -1.0, 10, out, err) == kExitOk);
    const std::string text = out.str();
    CHECK(text.find("# schema = fockcool-rates/1") != std::string::npos);
    CHECK(text.find("# delta_over_nu = -1") != std::string::npos);
    CHECK(text.find("# eta = 0") != std::string::npos);
    CHECK(text.find("# gamma_over_nu = 0.05") != std::string::npos);
    CHECK(text.find("n,gamma_n_units_omega2_over_gamma\n") != std::string::npos);
    const auto path = scratch_dir("rates");
    std::filesystem::create_directories(path);
    {
        std::ofstream f(path / "r.csv");
        f << text;
    }
    const auto rows = read_rows(path / "r.csv");
    REQUIRE(rows.size() == 11);
    for (const auto &row : rows) {
        CHECK(row[1] == rows[0][1]);
    }

    std::ostringstream out7;
    REQUIRE(cmd_rates(parse_config("params.eta = 5\n"), 7.0, 3, out7, err) == kExitOk);
    {
        std::ofstream f(path / "r7.csv");
        f << out7.str();
    }
    const auto r7 = read_rows(path / "r7.csv");
    CHECK(r7[0][1] / r7[1][1] == doctest::Approx(0.04).epsilon(0.5));
    CHECK(cmd_rates(c, -1.0, -1, out, err) == kExitConfig);
}

TEST_CASE("simulate with zero cycles returns the initial state") {
    const auto dir = scratch_dir("zero");
    auto c = cheap_config(dir.string());
    c.n_cycles = 0;
    std::ostringstream out, err;
    REQUIRE(cmd_simulate(c, out, err) == kExitOk);
    std::string header;
    const auto trace = read_rows(dir / "trace.csv", &header);
    CHECK(header == "cycle,P0,mean_n,tail_mass");
    REQUIRE(trace.size() == 1);
    const auto dist = read_rows(dir / "distribution.csv", &header);
    CHECK(header == "n,P_n");
    const auto initial = c.initial_state();
    for (const auto &row : dist) {
        const int n = static_cast<int>(row[0]);
        CHECK(row[1] == (n < initial.size() ? initial[n] : 0.0));
    }
}

TEST_CASE("simulate reports truncation failures with exit code 2") {
    const auto dir = scratch_dir("tail");
    auto c = cheap_config(dir.string());
    c.pulses = {{1.0, 200.0}};
    c.populations = {1.0};
    c.n_max = 20;
    std::ostringstream out, err;
    CHECK(cmd_simulate(c, out, err) == kExitNumerical);
    CHECK(err.str().find("cycle") != std::string::npos);
}

TEST_CASE("simulate rejects bad input with exit code 1") {
    const auto dir = scratch_dir("bad");
    auto c = cheap_config(dir.string());
    c.populations = std::vector<double>(60, 1.0 / 60.0);
    c.n_max = 30;
    std::ostringstream out, err;
    CHECK(cmd_simulate(c, out, err) == kExitConfig);
}

TEST_CASE("optimize output reproduces its result through simulate") {
    const auto dir = scratch_dir("optimize");
    auto c = cheap_config(dir.string());
    c.budget = 12;
    std::ostringstream out, err;
    REQUIRE(cmd_optimize(c, out, err) == kExitOk);
    const std::string text = out.str();
    const double reported = std::stod(value_after(text, "best P0 "));
    const auto fragment = text.substr(text.find("# configuration reproducing"));
    auto replay = parse_config(fragment, "fragment");
    replay.out_dir = (dir / "replay").string();
    std::ostringstream sim_out;
    REQUIRE(cmd_simulate(replay, sim_out, err) == kExitOk);
    const double simulated = std::stod(value_after(sim_out.str(), "final P0 "));
    CHECK(std::abs(simulated - reported) <= 1e-12);

    std::string header;
    const auto log = read_rows(dir / "optimize_log.csv", &header);
    CHECK(header == "evaluation,seed,P0,incumbent,improved,n_max,pulses");
    CHECK(log.size() <= 12);
}

TEST_CASE("optimize with budget one reports the seed") {
    const auto dir = scratch_dir("budget1");
    auto c = cheap_config(dir.string());
    c.budget = 1;
    std::ostringstream out, err;
    REQUIRE(cmd_optimize(c, out, err) == kExitOk);
    CHECK(out.str().find("(budget exhausted)") != std::string::npos);
    const double reported = std::stod(value_after(out.str(), "best P0 "));
    std::ostringstream sim_out;
    REQUIRE(cmd_simulate(c, sim_out, err) == kExitOk);
    CHECK(reported == std::stod(value_after(sim_out.str(), "final P0 ")));

    c.budget = 0;
    CHECK(cmd_optimize(c, out, err) == kExitConfig);
}

TEST_CASE("reproduce fig4 writes data and a plot script") {
    const auto dir = scratch_dir("fig4");
    auto c = parse_config("params.eta = 5\n");
    c.out_dir = dir.string();
    std::ostringstream out, err;
    REQUIRE(cmd_reproduce("fig4", c, out, err) == kExitOk);
    std::string header;
    const auto rows = read_rows(dir / "fig4.csv", &header);
    CHECK(header == "n,gamma_n_delta_7,gamma_n_delta_9");
    REQUIRE(rows.size() == 41);
    for (int col : {1, 2}) {
        const double ratio = rows[0][col] / rows[1][col];
        CHECK(ratio >= 0.02);
        CHECK(ratio <= 0.08);
    }
    std::ifstream gp(dir / "fig4.gp");
    std::stringstream script;
    script << gp.rdbuf();
    CHECK(script.str().find("'fig4.csv'") != std::string::npos);
    CHECK(cmd_reproduce("fig9", c, out, err) == kExitConfig);
}
