#ifndef FOCKCOOL_CONFIG_HPP
#define FOCKCOOL_CONFIG_HPP

// Flat "dotted.key = value" run configuration.
//
//   params.eta = 5.0
//   params.Gamma = 0.1          # units of nu
//   params.gamma_ratio = 0.5    # gamma / Gamma
//   params.Omega = 0.01
//   params.angular = dipole     # or isotropic
//   basis.n_max = auto          # or an integer
//   initial.nbar = 6            # or initial.populations = [0.5, 0.5]
//   cycle.scheme = fig3b        # or cycle.pulses = [(-24, 0.6), (7, 0.2)]
//   cycle.n_cycles = 200
//   cycle.fig2_duration = 15
//   rates.quad_order = auto
//   output.dir = out
//   optimize.budget = 200

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "fockcool/dynamics.hpp"
#include "fockcool/protocol.hpp"
#include "fockcool/rates.hpp"

namespace fockcool {

class ConfigError : public std::runtime_error {
  public:
    ConfigError(const std::string &source, int line, const std::string &key,
                const std::string &message);

    int line() const { return line_; }
    const std::string &key() const { return key_; }

  private:
    int line_;
    std::string key_;
};

struct RunConfig {
    double eta = 5.0;
    double Gamma = 0.1;
    double gamma_ratio = 0.5;
    double Omega = 0.01;
    AngularKind angular = AngularKind::dipole;

    /// 0 selects the truncation policy.
    int n_max = 0;

    double nbar = 6.0;
    /// Explicit initial populations; overrides nbar when non-empty.
    std::vector<double> populations;

    std::optional<SchemeId> scheme;
    /// Explicit pulse list; used when no scheme is given.
    std::vector<Pulse> pulses;
    int n_cycles = 200;
    double fig2_duration = 15.0;

    /// 0 selects the order automatically.
    int quad_order = 0;
    std::string out_dir = ".";
    int budget = 200;

    PhysicalParams params() const;
    PopulationVector initial_state() const;
    SchemeOptions scheme_options() const;
    /// The explicit pulses, or the scheme (fig3b when neither is set).
    Cycle cycle() const;
    SimulationOptions simulation_options() const;

    /// Throws ConfigError naming the offending field.
    void validate(const std::string &source = "config") const;
};

/// Parses configuration text on top of `base`. `source` names the input in
/// diagnostics.
RunConfig parse_config(const std::string &text, const std::string &source = "config",
                       RunConfig base = {});
RunConfig load_config(const std::string &path, RunConfig base = {});

/// Shortest text that reads back as the same double.
std::string format_exact(double value);

/// Configuration text that parse_config turns back into `config`.
std::string to_config_text(const RunConfig &config);

} // namespace fockcool

#endif
