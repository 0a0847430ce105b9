// fockcool: displacement elements, transition rates and pulse-cycle
// simulations for laser cooling of a trapped ion beyond the Lamb-Dicke limit.

#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "fockcool/angular.hpp"
#include "fockcool/commands.hpp"
#include "fockcool/config.hpp"

using namespace fockcool;

namespace {

struct GlobalFlags {
    std::string config_path;
    std::string out_dir;
    std::optional<int> quad_order;
    std::string n_max;
    std::string angular;
    std::optional<double> gamma_ratio;
};

RunConfig resolve(const GlobalFlags &flags) {
    RunConfig config;
    if (!flags.config_path.empty()) {
        config = load_config(flags.config_path);
    }
    if (!flags.out_dir.empty()) {
        config.out_dir = flags.out_dir;
    }
    if (flags.quad_order) {
        config.quad_order = *flags.quad_order;
    }
    if (!flags.n_max.empty()) {
        if (flags.n_max == "auto") {
            config.n_max = 0;
        } else {
            try {
                std::size_t used = 0;
                config.n_max = std::stoi(flags.n_max, &used);
                if (used != flags.n_max.size() || config.n_max < 1) {
                    throw std::invalid_argument("");
                }
            } catch (const std::exception &) {
                throw ConfigError("--nmax", 0, "", "expected a positive integer or 'auto'");
            }
        }
    }
    if (!flags.angular.empty()) {
        try {
            config.angular = parse_angular_kind(flags.angular);
        } catch (const std::exception &e) {
            throw ConfigError("--angular", 0, "", e.what());
        }
    }
    if (flags.gamma_ratio) {
        config.gamma_ratio = *flags.gamma_ratio;
    }
    config.validate("command line");
    return config;
}

} // namespace

int main(int argc, char **argv) {
    CLI::App app{"Rate-equation model of pulsed laser cooling of a trapped ion"};
    app.require_subcommand(1);

    GlobalFlags flags;
    app.add_option("--config", flags.config_path, "Configuration file (key = value)");
    app.add_option("--out", flags.out_dir, "Output directory");
    app.add_option("--quad-order", flags.quad_order, "Gauss-Legendre nodes (>= 32)");
    app.add_option("--nmax", flags.n_max, "Basis size N or 'auto'");
    app.add_option("--angular", flags.angular, "Emission pattern: dipole or isotropic");
    app.add_option("--gamma-ratio", flags.gamma_ratio, "gamma / Gamma");

    int n = 0;
    int m = 0;
    double eta = 0.0;
    auto *elements = app.add_subcommand("elements", "Print <n|exp(i eta (a + a^dagger))|m>");
    elements->add_option("n", n)->required();
    elements->add_option("m", m)->required();
    elements->add_option("eta", eta)->required();

    double delta = 0.0;
    int n_last = 40;
    auto *rates = app.add_subcommand("rates", "CSV of emptying rates Gamma_n");
    rates->add_option("--delta", delta, "Detuning in units of nu")->required();
    rates->add_option("--nlast", n_last, "Last Fock level")->capture_default_str();

    auto *simulate = app.add_subcommand("simulate", "Run a pulse cycle");

    std::string figure;
    auto *reproduce = app.add_subcommand("reproduce", "Figure data and gnuplot script");
    reproduce->add_option("figure", figure, "fig2, fig3 or fig4")
        ->required()
        ->check(CLI::IsMember({"fig2", "fig3", "fig4"}));

    std::optional<int> budget;
    auto *optimize = app.add_subcommand("optimize", "Search pulse detunings and durations");
    optimize->add_option("--budget", budget, "Number of simulations");

    for (auto *sub : {elements, rates, simulate, reproduce, optimize}) {
        sub->fallthrough();
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitConfig;
    }

    if (elements->parsed()) {
        return cmd_elements(n, m, eta, std::cout, std::cerr);
    }

    RunConfig config;
    try {
        config = resolve(flags);
    } catch (const ConfigError &e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    }

    if (rates->parsed()) {
        return cmd_rates(config, delta, n_last, std::cout, std::cerr);
    }
    if (simulate->parsed()) {
        return cmd_simulate(config, std::cout, std::cerr);
    }
    if (reproduce->parsed()) {
        return cmd_reproduce(figure, config, std::cout, std::cerr);
    }
    if (budget) {
        if (*budget < 1) {
            std::cerr << "usage error: --budget must be at least 1\n";
            return kExitConfig;
        }
        config.budget = *budget;
    }
    return cmd_optimize(config, std::cout, std::cerr);
}
