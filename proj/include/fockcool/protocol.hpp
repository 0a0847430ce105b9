#ifndef FOCKCOOL_PROTOCOL_HPP
#define FOCKCOOL_PROTOCOL_HPP

// Pulse-cycle recipes and a search over pulse parameters that maximizes the
// final ground-state population.

#include <string>
#include <string_view>
#include <vector>

#include "fockcool/dynamics.hpp"
#include "fockcool/rates.hpp"

namespace fockcool {

/// [-max(2, ceil(eta^2)), -(1 + ceil(eta^2))] in units of nu.
std::vector<double> confining_detunings(double eta);

struct BlueSelectionOptions {
    /// Smallest acceptable Gamma_1, units Omega^2 / Gamma.
    double gamma1_floor = 1e-4;
    /// Largest acceptable Gamma_0 / Gamma_1.
    double max_ratio = 0.1;
    /// Pulse length used for the Gamma_0 t bound.
    double duration = 0.2;
    double max_gamma0_t = 0.02;
    /// Ratios within this relative distance of the best count as equal and
    /// go to the smaller detuning.
    double tie_tolerance = 0.1;
    /// Selected detunings differ by at least this many units of nu.
    int min_separation = 2;
};

struct BlueCandidate {
    double delta = 0.0;
    double gamma0 = 0.0;
    double gamma1 = 0.0;
    bool feasible = false;
    double ratio() const { return gamma0 / gamma1; }
};

/// Gamma_0 and Gamma_1 for every integer detuning in [ceil(lo), floor(hi)]
/// with delta > 0, flagged against the options.
std::vector<BlueCandidate> scan_blue_detunings(const PhysicalParams &params,
                                               double lo, double hi,
                                               const BlueSelectionOptions &options = {});

/// Picks `count` blue detunings from (lo, hi] that empty level 1 while
/// leaving level 0 nearly untouched. Throws NoFeasibleDetuning when fewer
/// than `count` candidates qualify.
std::vector<double> select_blue_detunings(const PhysicalParams &params,
                                          double lo, double hi, int count,
                                          const BlueSelectionOptions &options = {});

enum class SchemeId { fig2a, fig2b, fig2c, fig3a, fig3b, fig3b_caption, automatic };

std::string to_string(SchemeId id);
/// Accepts the names printed by to_string, with "auto" for automatic.
SchemeId parse_scheme(std::string_view name);

struct SchemeOptions {
    /// Pulse length of the fig2 schemes, units Gamma / Omega^2.
    double fig2_duration = 15.0;
    double confining_duration = 0.6;
    double emptying_duration = 0.2;
    int n_cycles = 200;
    BlueSelectionOptions blue{};
};

/// Upper end of the blue detuning range searched by the automatic scheme.
double blue_search_limit(double eta);

Cycle build_cycle(SchemeId scheme, const PhysicalParams &params,
                  const SchemeOptions &options = {});

struct PulseBounds {
    double delta_min = 0.0;
    double delta_max = 0.0;
    double duration_min = 0.0;
    double duration_max = 0.0;
};

struct OptimizationProblem {
    PhysicalParams params{};
    PopulationVector initial;
    int n_cycles = 200;
    /// One entry per pulse of every seed.
    std::vector<PulseBounds> bounds;
    std::vector<Cycle> seeds;
    /// Maximum number of simulations.
    int budget = 200;
    SimulationOptions simulation{};

    void validate() const;
};

/// Problem seeded with the fig3b and automatic cycles (when the latter
/// exists) for the given parameters. A `first_seed` is tried before them;
/// default seeds with a different pulse count are then dropped.
OptimizationProblem default_optimization_problem(const PhysicalParams &params,
                                                 const PopulationVector &initial,
                                                 int budget,
                                                 const SchemeOptions &options = {},
                                                 const Cycle *first_seed = nullptr);

struct Evaluation {
    int index = 0;
    int seed = 0;
    Cycle cycle;
    /// Final P_0; negative when the run failed.
    double p0 = -1.0;
    /// Best P_0 over this and all earlier evaluations.
    double incumbent = -1.0;
    int n_max = 0;
    /// Run with the automatic, growing basis rather than a fixed one.
    bool automatic_basis = false;
    bool improved = false;
    std::string note;
};

struct OptimizationResult {
    Cycle best;
    double p0 = -1.0;
    int n_max = 0;
    bool automatic_basis = false;
    std::vector<Evaluation> log;
    bool budget_exhausted = false;
};

/// Coordinate descent over integer detunings and geometric duration steps,
/// started from every seed in turn.
OptimizationResult optimize_sequence(const OptimizationProblem &problem,
                                     RateMatrixCache *cache = nullptr);

} // namespace fockcool

#endif
