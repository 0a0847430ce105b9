#include <doctest.h>

#include <string>

#include "fockcool/config.hpp"

using namespace fockcool;

namespace {

int error_line(const std::string &text) {
    try {
        (void)parse_config(text, "t.cfg");
    } catch (const ConfigError &e) {
        return e.line();
    }
    return -1;
}

std::string error_key(const std::string &text) {
    try {
        (void)parse_config(text, "t.cfg");
    } catch (const ConfigError &e) {
        return e.key();
    }
    return "";
}

} // namespace

TEST_CASE("a full configuration parses") {
    const auto c = parse_config(R"(# trap and laser
params.eta = 2.5
params.Gamma = 0.2          # in nu
params.gamma_ratio = 0.25
params.Omega = 0.02
params.angular = isotropic
basis.n_max = 180
initial.nbar = 3
cycle.pulses = [(-24, 0.6), (-25, 0.6), (7, 0.2), (9, 0.2)]
cycle.n_cycles = 50
cycle.fig2_duration = 12.5
rates.quad_order = 96
output.dir = results/run1
optimize.budget = 30
)");
    CHECK(c.eta == 2.5);
    CHECK(c.Gamma == 0.2);
    CHECK(c.gamma_ratio == 0.25);
    CHECK(c.Omega == 0.02);
    CHECK(c.angular == AngularKind::isotropic);
    CHECK(c.n_max == 180);
    CHECK(c.nbar == 3.0);
    CHECK(c.pulses ==
          std::vector<Pulse>{{-24.0, 0.6}, {-25.0, 0.6}, {7.0, 0.2}, {9.0, 0.2}});
    CHECK(!c.scheme);
    CHECK(c.n_cycles == 50);
    CHECK(c.fig2_duration == 12.5);
    CHECK(c.quad_order == 96);
    CHECK(c.out_dir == "results/run1");
    CHECK(c.budget == 30);
    CHECK(c.params().gamma == doctest::Approx(0.05));
    CHECK(c.cycle().n_cycles == 50);
    CHECK(c.simulation_options().n_max == 180);
}

TEST_CASE("defaults and schemes") {
    const auto c = parse_config("cycle.scheme = fig3a\nbasis.n_max = auto\n");
    CHECK(c.scheme == SchemeId::fig3a);
    CHECK(c.n_max == 0);
    CHECK(c.cycle().pulses == std::vector<Pulse>{{-24.0, 0.6}});
    CHECK(parse_config("").cycle().pulses.size() == 4);
    const auto explicit_state = parse_config("initial.populations = [0.25, 0.75]\n");
    CHECK(explicit_state.initial_state().size() == 2);
}

TEST_CASE("diagnostics name the line and the field") {
    CHECK(error_line("params.eta = 1\nparams.Gamma = fast\n") == 2);
    CHECK(error_key("params.eta = 1\nparams.Gamma = fast\n") == "params.Gamma");
    CHECK(error_line("\n\nparams.bogus = 1\n") == 3);
    CHECK(error_line("params.eta 5\n") == 1);
    CHECK(error_line("params.eta = 1\nparams.eta = 2\n") == 2);
    CHECK(error_line("cycle.pulses = [(-24, 0.6), (7 0.2)]\n") == 1);
    CHECK(error_line("cycle.pulses = [(-24, 0)]\n") == 1);
    CHECK(error_line("cycle.pulses = []\n") == 1);
    CHECK(error_line("cycle.scheme = fig7\n") == 1);
    CHECK(error_line("basis.n_max = -3\n") == 1);
    CHECK(error_line("rates.quad_order = 16\n") == 1);
    CHECK(error_line("optimize.budget = 0\n") == 1);
    CHECK(error_line("initial.populations = [0.5, 0.4]\n") == 1);
    CHECK(error_line("params.Omega = -1\n") == 1);
    CHECK(error_line("params.angular = sideways\n") == 1);
    CHECK(error_key("cycle.scheme = fig3b\ncycle.pulses = [(-1, 1)]\n") == "cycle.pulses");
    CHECK(error_key("params.gamma_ratio = 3\n") == "params.gamma_ratio");

    try {
        (void)parse_config("x = 1\n", "run.cfg");
        FAIL("expected ConfigError");
    } catch (const ConfigError &e) {
        CHECK(std::string(e.what()) == "run.cfg:1: x: unknown key");
    }
    CHECK_THROWS_AS(load_config("/nonexistent/run.cfg"), ConfigError);
}

TEST_CASE("configuration text round-trips exactly") {
    RunConfig c;
    c.eta = 0.1 + 0.2;
    c.Gamma = 1.0 / 3.0;
    c.gamma_ratio = 0.7071067811865476;
    c.pulses = {{-24.0, 0.6 * 1.414}, {9.0, 0.2 * 0.707}};
    c.n_max = 321;
    c.n_cycles = 17;
    c.quad_order = 120;
    const auto back = parse_config(to_config_text(c));
    CHECK(back.eta == c.eta);
    CHECK(back.Gamma == c.Gamma);
    CHECK(back.gamma_ratio == c.gamma_ratio);
    CHECK(back.pulses == c.pulses);
    CHECK(back.n_max == 321);
    CHECK(back.n_cycles == 17);
    CHECK(back.quad_order == 120);

    c.pulses.clear();
    c.scheme = SchemeId::automatic;
    c.populations = {0.125, 0.875};
    const auto again = parse_config(to_config_text(c));
    CHECK(again.scheme == SchemeId::automatic);
    CHECK(again.populations == c.populations);
    CHECK(format_exact(0.6) == "0.6");
}
