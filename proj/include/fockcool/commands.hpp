#ifndef FOCKCOOL_COMMANDS_HPP
#define FOCKCOOL_COMMANDS_HPP

// Subcommands of the fockcool tool. Each returns the process exit code:
// 0 on success, 1 for configuration or usage errors, 2 for numerical or
// truncation failures. Files go to config.out_dir.

#include <iosfwd>
#include <string>
#include <vector>

#include "fockcool/config.hpp"
#include "fockcool/dynamics.hpp"

namespace fockcool {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 1;
inline constexpr int kExitNumerical = 2;

/// Version written into every CSV header.
inline constexpr int kCsvSchemaVersion = 1;

/// Fixed 12-decimal text for moderate magnitudes, 12 significant digits in
/// scientific notation otherwise.
std::string format12(double value);

int cmd_elements(int n, int m, double eta, std::ostream &out, std::ostream &err);

/// Emptying rates Gamma_n for n = 0..n_last.
int cmd_rates(const RunConfig &config, double delta, int n_last, std::ostream &out,
              std::ostream &err);

int cmd_simulate(const RunConfig &config, std::ostream &out, std::ostream &err);

/// figure is one of fig2, fig3, fig4.
int cmd_reproduce(const std::string &figure, const RunConfig &config,
                  std::ostream &out, std::ostream &err);

int cmd_optimize(const RunConfig &config, std::ostream &out, std::ostream &err);

struct Fig2Point {
    double eta = 0.0;
    double p0_a = 0.0;
    double p0_b = 0.0;
    double p0_c = 0.0;
    double max_norm_error = 0.0;
    double min_population = 1.0;
    /// Non-empty when one of the runs failed; its P0 is then NaN.
    std::string note;
};

/// Default eta grid 0.1, 0.2, ..., 4.0.
std::vector<double> fig2_etas();

/// Final P0 of the three fig2 schemes at one eta. Other settings come from
/// `config`.
Fig2Point fig2_point(double eta, const RunConfig &config,
                     RateMatrixCache *cache = nullptr);

struct Fig3Runs {
    SimulationTrace a;
    SimulationTrace b;
};

Fig3Runs fig3_runs(const RunConfig &config, RateMatrixCache *cache = nullptr);

} // namespace fockcool

#endif
