#include <doctest.h>

#include <stdexcept>

#include "fockcool/errors.hpp"
#include "fockcool/protocol.hpp"

using namespace fockcool;

namespace {

PhysicalParams params_for(double eta) { return PhysicalParams::make(eta, 0.1, 0.5, 0.01); }

std::vector<double> deltas(const Cycle &c) {
    std::vector<double> out;
    for (const auto &p : c.pulses) {
        out.push_back(p.delta);
    }
    return out;
}

} // namespace

TEST_CASE("confining detunings") {
    CHECK(confining_detunings(1.0) == std::vector<double>{-2.0, -2.0});
    CHECK(confining_detunings(5.0) == std::vector<double>{-25.0, -26.0});
    CHECK(confining_detunings(0.3) == std::vector<double>{-2.0, -2.0});
    CHECK(confining_detunings(2.0) == std::vector<double>{-4.0, -5.0});
    for (double eta = 0.0; eta <= 1.4; eta += 0.05) {
        CHECK(confining_detunings(eta).front() == -2.0);
    }
    CHECK_THROWS_AS(confining_detunings(-0.5), std::invalid_argument);
}

TEST_CASE("blue detunings at eta = 5") {
    const auto p = params_for(5.0);
    const auto chosen = select_blue_detunings(p, 0.0, 26.0, 2);
    CHECK(chosen == std::vector<double>{7.0, 9.0});

    BlueSelectionOptions options;
    for (const auto &c : scan_blue_detunings(p, 0.0, 26.0)) {
        if (c.delta == 7.0 || c.delta == 9.0) {
            CHECK(c.feasible);
            CHECK(c.ratio() == doctest::Approx(0.045).epsilon(0.15));
            CHECK(c.gamma0 * options.duration <= options.max_gamma0_t);
        }
        if (c.feasible) {
            CHECK(c.gamma1 >= options.gamma1_floor);
            CHECK(c.gamma0 * options.duration <= options.max_gamma0_t);
        }
    }
}

TEST_CASE("blue detunings are distinct and safe") {
    const auto p = params_for(5.0);
    const auto chosen = select_blue_detunings(p, 0.0, 26.0, 3);
    REQUIRE(chosen.size() == 3);
    for (std::size_t i = 0; i < chosen.size(); ++i) {
        CHECK(chosen[i] > 0.0);
        for (std::size_t j = i + 1; j < chosen.size(); ++j) {
            CHECK(std::abs(chosen[i] - chosen[j]) >= 2.0);
        }
    }
}

TEST_CASE("deep Lamb-Dicke regime has no useful blue pulse") {
    CHECK_THROWS_AS(select_blue_detunings(params_for(0.1), 0.0, 26.0, 2), NoFeasibleDetuning);
    CHECK_THROWS_AS(select_blue_detunings(params_for(0.1), 0.0, 100.0, 1), NoFeasibleDetuning);
}

TEST_CASE("single-candidate range") {
    const auto p = params_for(5.0);
    CHECK(select_blue_detunings(p, 7.0, 7.0, 1) == std::vector<double>{7.0});
    // Gamma_1 at delta = 1 is far below the floor.
    CHECK_THROWS_AS(select_blue_detunings(p, 1.0, 1.0, 1), NoFeasibleDetuning);
    CHECK_THROWS_AS(select_blue_detunings(p, 0.0, 26.0, 0), std::invalid_argument);
    CHECK_THROWS_AS(select_blue_detunings(p, -5.0, -1.0, 1), std::invalid_argument);
}

TEST_CASE("scheme cycles") {
    const auto p5 = params_for(5.0);
    const Cycle fig3b = build_cycle(SchemeId::fig3b, p5);
    const std::vector<Pulse> expected{{-24.0, 0.6}, {-25.0, 0.6}, {7.0, 0.2}, {9.0, 0.2}};
    CHECK(fig3b.pulses == expected);
    CHECK(fig3b.n_cycles == 200);
    CHECK(build_cycle(SchemeId::fig3a, p5).pulses == std::vector<Pulse>{{-24.0, 0.6}});
    CHECK(deltas(build_cycle(SchemeId::fig3b_caption, p5)) ==
          std::vector<double>{-24.0, -25.0, 7.0, 5.0});

    for (double eta : {0.5, 1.0, 3.0}) {
        const auto b = build_cycle(SchemeId::fig2b, params_for(eta));
        REQUIRE(b.pulses.size() == 1);
        CHECK(b.pulses[0].delta == -1.0);
    }
    SchemeOptions options;
    options.fig2_duration = 0.6;
    const auto a = build_cycle(SchemeId::fig2a, params_for(1.0), options);
    CHECK(a.pulses == std::vector<Pulse>{{-2.0, 0.6}});
    const auto c = build_cycle(SchemeId::fig2c, params_for(2.0), options);
    CHECK(c.pulses == std::vector<Pulse>{{-4.0, 0.6}, {-1.0, 0.6}});

    const auto automatic = build_cycle(SchemeId::automatic, p5);
    CHECK(automatic.pulses ==
          std::vector<Pulse>{{-25.0, 0.6}, {-26.0, 0.6}, {7.0, 0.2}, {9.0, 0.2}});
}

TEST_CASE("scheme names") {
    for (auto id : {SchemeId::fig2a, SchemeId::fig2b, SchemeId::fig2c, SchemeId::fig3a,
                    SchemeId::fig3b, SchemeId::fig3b_caption, SchemeId::automatic}) {
        CHECK(parse_scheme(to_string(id)) == id);
    }
    CHECK(to_string(SchemeId::automatic) == "auto");
    CHECK_THROWS_AS(parse_scheme("fig9"), std::invalid_argument);
}

TEST_CASE("optimization problems are validated") {
    OptimizationProblem problem;
    problem.params = params_for(1.0);
    problem.initial = thermal_populations(1.0, 40);
    problem.bounds = {{-5.0, -1.0, 0.1, 10.0}};
    problem.seeds = {Cycle{{{-2.0, 1.0}}, 1}};
    problem.budget = 0;
    CHECK_THROWS_AS(problem.validate(), std::invalid_argument);
    problem.budget = 1;
    CHECK_NOTHROW(problem.validate());
    problem.seeds[0].pulses[0].delta = -8.0;
    CHECK_THROWS_AS(problem.validate(), std::invalid_argument);
    problem.seeds[0].pulses[0].delta = -2.0;
    problem.bounds[0].duration_max = INFINITY;
    CHECK_THROWS_AS(problem.validate(), std::invalid_argument);
    problem.bounds.push_back({-1.0, -1.0, 1.0, 1.0});
    CHECK_THROWS_AS(problem.validate(), std::invalid_argument);
}

TEST_CASE("coordinate descent improves a poor seed monotonically") {
    OptimizationProblem problem;
    problem.params = params_for(1.0);
    problem.initial = thermal_populations(1.0, 40);
    problem.n_cycles = 10;
    problem.bounds = {{-5.0, -1.0, 0.1, 50.0}};
    problem.seeds = {Cycle{{{-4.0, 1.0}}, 1}};
    problem.budget = 25;
    const auto result = optimize_sequence(problem);
    REQUIRE(!result.log.empty());
    CHECK(static_cast<int>(result.log.size()) <= problem.budget);
    const double seed_p0 = result.log.front().p0;
    CHECK(result.p0 > seed_p0);
    double incumbent = -1.0;
    for (const auto &e : result.log) {
        CHECK(e.incumbent >= incumbent);
        CHECK(e.incumbent >= e.p0);
        incumbent = e.incumbent;
        for (std::size_t i = 0; i < e.cycle.pulses.size(); ++i) {
            CHECK(e.cycle.pulses[i].delta >= problem.bounds[i].delta_min);
            CHECK(e.cycle.pulses[i].delta <= problem.bounds[i].delta_max);
            CHECK(e.cycle.pulses[i].delta == std::round(e.cycle.pulses[i].delta));
        }
    }
    CHECK(result.p0 == incumbent);

    // Same problem, same answer.
    const auto again = optimize_sequence(problem);
    CHECK(again.p0 == result.p0);
    CHECK(again.best == result.best);
    CHECK(again.log.size() == result.log.size());
}

TEST_CASE("a budget of one evaluates only the seed") {
    OptimizationProblem problem;
    problem.params = params_for(1.0);
    problem.initial = thermal_populations(1.0, 40);
    problem.n_cycles = 10;
    problem.bounds = {{-5.0, -1.0, 0.1, 50.0}};
    problem.seeds = {Cycle{{{-4.0, 1.0}}, 1}};
    problem.budget = 1;
    const auto result = optimize_sequence(problem);
    REQUIRE(result.log.size() == 1);
    CHECK(result.budget_exhausted);
    Cycle seed = problem.seeds[0];
    seed.n_cycles = 10;
    CHECK(result.best == seed);
    const auto direct = run_sequence(problem.initial, seed, problem.params);
    CHECK(result.p0 == direct.final_state()[0]);
}

TEST_CASE("without recoil the optimizer keeps its seed") {
    const auto p = params_for(0.0);
    SchemeOptions options;
    options.n_cycles = 5;
    auto problem = default_optimization_problem(p, thermal_populations(0.5, 40), 12, options);
    REQUIRE(problem.seeds.size() == 1);
    const auto result = optimize_sequence(problem);
    CHECK(result.best == problem.seeds[0]);
    for (const auto &e : result.log) {
        CHECK(e.p0 == doctest::Approx(result.p0).epsilon(1e-12));
    }
    for (std::size_t i = 0; i < result.best.pulses.size(); ++i) {
        CHECK((result.best.pulses[i].delta < 0) == (problem.seeds[0].pulses[i].delta < 0));
    }
}

TEST_CASE("default problem at eta = 5") {
    const auto problem =
        default_optimization_problem(params_for(5.0), thermal_populations(6.0, 149), 200);
    REQUIRE(problem.seeds.size() == 2);
    CHECK(problem.seeds[0] == build_cycle(SchemeId::fig3b, params_for(5.0)));
    CHECK(problem.bounds.size() == 4);
    CHECK_NOTHROW(problem.validate());
}
