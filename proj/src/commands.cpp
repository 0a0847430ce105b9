#include "fockcool/commands.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <ostream>
#include <sstream>

#include "fockcool/displacement.hpp"
#include "fockcool/errors.hpp"
#include "fockcool/protocol.hpp"

namespace fockcool {

namespace {

int guarded(std::ostream &err, const std::function<int()> &body) {
    try {
        return body();
    } catch (const ConfigError &e) {
        err << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const TailMassError &e) {
        err << "truncation error: " << e.what() << "\n";
        return kExitNumerical;
    } catch (const TruncationError &e) {
        err << "truncation error: " << e.what() << "\n";
        return kExitNumerical;
    } catch (const QuadratureError &e) {
        err << "quadrature error: " << e.what() << "\n";
        return kExitNumerical;
    } catch (const NoFeasibleDetuning &e) {
        err << "no feasible detuning: " << e.what() << "\n";
        return kExitNumerical;
    } catch (const ConvergenceError &e) {
        err << "convergence error: " << e.what() << "\n";
        return kExitNumerical;
    } catch (const std::invalid_argument &e) {
        err << "invalid input: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::domain_error &e) {
        err << "invalid input: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::exception &e) {
        err << "error: " << e.what() << "\n";
        return kExitNumerical;
    }
}

std::string num(double v) {
    if (std::isnan(v)) {
        return "nan";
    }
    return format_exact(v);
}

std::filesystem::path output_path(const RunConfig &config, const std::string &name) {
    std::filesystem::path dir(config.out_dir);
    std::filesystem::create_directories(dir);
    return dir / name;
}

std::ofstream open_output(const std::filesystem::path &path) {
    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error("cannot write " + path.string());
    }
    return out;
}

void write_metadata(std::ostream &out, const std::string &kind, const RunConfig &config) {
    out << "# schema = fockcool-" << kind << "/" << kCsvSchemaVersion << "\n"
        << "# eta = " << num(config.eta) << "\n"
        << "# Gamma_over_nu = " << num(config.Gamma) << "\n"
        << "# gamma_over_nu = " << num(config.gamma_ratio * config.Gamma) << "\n"
        << "# Omega_over_nu = " << num(config.Omega) << "\n"
        << "# angular = " << to_string(config.angular) << "\n"
        << "# units = frequencies in nu, rates in Omega^2/Gamma, durations in "
           "Gamma/Omega^2\n";
}

void write_distribution(std::ostream &out, const PopulationVector &p) {
    out << "n,P_n\n";
    for (int n = 0; n < p.size(); ++n) {
        out << n << "," << num(p[n]) << "\n";
    }
}

std::string pulses_text(const Cycle &c) {
    std::ostringstream out;
    for (std::size_t i = 0; i < c.pulses.size(); ++i) {
        out << (i ? " " : "") << "(" << num(c.pulses[i].delta) << " "
            << num(c.pulses[i].duration) << ")";
    }
    return out.str();
}

void report_validity(const PhysicalParams &params, std::ostream &err) {
    for (const auto &warning : validity_check(params)) {
        err << "warning: " << warning << "\n";
    }
}

int reproduce_fig2(const RunConfig &config, std::ostream &out) {
    RateMatrixCache cache;
    std::vector<Fig2Point> rows;
    for (double eta : fig2_etas()) {
        rows.push_back(fig2_point(eta, config, &cache));
        const auto &r = rows.back();
        out << "eta " << num(eta) << "  P0 a=" << num(r.p0_a) << " b=" << num(r.p0_b)
            << " c=" << num(r.p0_c) << (r.note.empty() ? "" : "  (" + r.note + ")")
            << "\n";
    }
    const auto csv_path = output_path(config, "fig2.csv");
    auto csv = open_output(csv_path);
    RunConfig meta = config;
    write_metadata(csv, "fig2", meta);
    csv << "# eta = swept (column 1)\n"
        << "# pulse_duration = " << num(config.fig2_duration)
        << " Gamma/Omega^2 per pulse; a duration of 0.1/nu would need an Omega that "
           "is not given, so durations use Gamma/Omega^2 units and are calibrated\n"
        << "# n_cycles = " << config.n_cycles << "\n"
        << "# initial = thermal nbar " << num(config.nbar) << "\n"
        << "# curve a = single pulse delta = -max(2, ceil(eta^2))\n"
        << "# curve b = single pulse delta = -1\n"
        << "# curve c = pulse a followed by pulse b\n"
        << "eta,P0_a,P0_b,P0_c\n";
    for (const auto &r : rows) {
        csv << num(r.eta) << "," << num(r.p0_a) << "," << num(r.p0_b) << ","
            << num(r.p0_c) << "\n";
    }
    auto gp = open_output(output_path(config, "fig2.gp"));
    gp << "set datafile separator ','\n"
          "set terminal pngcairo size 800,600\n"
          "set output 'fig2.png'\n"
          "set xlabel 'eta'\n"
          "set ylabel 'P_0'\n"
          "set yrange [0:1.02]\n"
          "set key bottom left\n"
          "plot 'fig2.csv' using 1:2 with linespoints title '(a)', \\\n"
          "     '' using 1:3 with linespoints title '(b)', \\\n"
          "     '' using 1:4 with linespoints title '(c)'\n";
    out << "wrote " << csv_path.string() << "\n";
    return kExitOk;
}

int reproduce_fig3(const RunConfig &config, std::ostream &out) {
    const auto runs = fig3_runs(config);
    const int n_max = std::max(runs.a.n_max, runs.b.n_max);
    const auto pa = runs.a.final_state().resized(n_max);
    const auto pb = runs.b.final_state().resized(n_max);
    const auto csv_path = output_path(config, "fig3.csv");
    auto csv = open_output(csv_path);
    write_metadata(csv, "fig3", config);
    csv << "# n_cycles = " << config.n_cycles << "\n"
        << "# initial = thermal nbar " << num(config.nbar) << "\n"
        << "# curve a = " << pulses_text(build_cycle(SchemeId::fig3a, config.params()))
        << "\n"
        << "# curve b = " << pulses_text(build_cycle(SchemeId::fig3b, config.params()))
        << "\n"
        << "n,P_a,P_b\n";
    for (int n = 0; n <= n_max; ++n) {
        csv << n << "," << num(pa[n]) << "," << num(pb[n]) << "\n";
    }
    auto gp = open_output(output_path(config, "fig3.gp"));
    gp << "set datafile separator ','\n"
          "set terminal pngcairo size 900,400\n"
          "set output 'fig3.png'\n"
          "set multiplot layout 1,2\n"
          "set xlabel 'n'\n"
          "set ylabel 'P_n'\n"
          "set xrange [0:60]\n"
          "set style fill solid 0.6\n"
          "set boxwidth 0.8\n"
          "plot 'fig3.csv' using 1:2 with boxes title '(a)'\n"
          "plot 'fig3.csv' using 1:3 with boxes title '(b)'\n"
          "unset multiplot\n";
    out << "final P0 a=" << num(pa[0]) << " b=" << num(pb[0]) << "\n"
        << "wrote " << csv_path.string() << "\n";
    return kExitOk;
}

int reproduce_fig4(const RunConfig &config, std::ostream &out) {
    constexpr int kLast = 40;
    const auto params = config.params();
    const auto g7 = converged_emptying_rates(kLast, 7.0, params);
    const auto g9 = converged_emptying_rates(kLast, 9.0, params);
    const auto csv_path = output_path(config, "fig4.csv");
    auto csv = open_output(csv_path);
    write_metadata(csv, "fig4", config);
    csv << "# curve 1 = delta 7, curve 2 = delta 9\n"
        << "# ratio_gamma0_over_gamma1 = " << num(g7[0] / g7[1]) << " (delta 7), "
        << num(g9[0] / g9[1]) << " (delta 9)\n"
        << "n,gamma_n_delta_7,gamma_n_delta_9\n";
    for (int n = 0; n <= kLast; ++n) {
        csv << n << "," << num(g7[static_cast<std::size_t>(n)]) << ","
            << num(g9[static_cast<std::size_t>(n)]) << "\n";
    }
    auto gp = open_output(output_path(config, "fig4.gp"));
    gp << "set datafile separator ','\n"
          "set terminal pngcairo size 800,600\n"
          "set output 'fig4.png'\n"
          "set xlabel 'n'\n"
          "set ylabel 'Gamma_n (Omega^2/Gamma)'\n"
          "plot 'fig4.csv' using 1:2 with linespoints title 'delta = 7', \\\n"
          "     '' using 1:3 with linespoints title 'delta = 9'\n";
    out << "Gamma_0/Gamma_1 delta 7: " << num(g7[0] / g7[1])
        << "  delta 9: " << num(g9[0] / g9[1]) << "\n"
        << "wrote " << csv_path.string() << "\n";
    return kExitOk;
}

} // namespace

std::string format12(double value) {
    if (value == 0.0) {
        value = 0.0; // drop the sign of -0
    }
    char buf[64];
    const double a = std::abs(value);
    if (value == 0.0 || (a >= 1e-4 && a < 1e6)) {
        std::snprintf(buf, sizeof buf, "%.12f", value);
    } else {
        std::snprintf(buf, sizeof buf, "%.11e", value);
    }
    return buf;
}

int cmd_elements(int n, int m, double eta, std::ostream &out, std::ostream &err) {
    return guarded(err, [&] {
        if (n < 0 || m < 0) {
            err << "usage error: Fock indices must be non-negative\n";
            return kExitConfig;
        }
        const auto a = displacement_element(n, m, KickStrength(eta));
        out << "<" << n << "|exp(i " << num(eta) << " (a + a^dagger))|" << m << ">\n"
            << "real      " << format12(a.value.real()) << "\n"
            << "imag      " << format12(a.value.imag()) << "\n"
            << "magnitude " << format12(std::abs(a.value)) << "\n";
        return kExitOk;
    });
}

int cmd_rates(const RunConfig &config, double delta, int n_last, std::ostream &out,
              std::ostream &err) {
    return guarded(err, [&] {
        if (n_last < 0) {
            err << "usage error: n_last must be non-negative\n";
            return kExitConfig;
        }
        const auto params = config.params();
        const auto rates = converged_emptying_rates(n_last, delta, params);
        std::ostringstream csv;
        write_metadata(csv, "rates", config);
        csv << "# delta_over_nu = " << num(delta) << "\n"
            << "n,gamma_n_units_omega2_over_gamma\n";
        for (int n = 0; n <= n_last; ++n) {
            csv << n << "," << num(rates[static_cast<std::size_t>(n)]) << "\n";
        }
        out << csv.str();
        return kExitOk;
    });
}

int cmd_simulate(const RunConfig &config, std::ostream &out, std::ostream &err) {
    return guarded(err, [&] {
        const auto params = config.params();
        report_validity(params, err);
        const Cycle cycle = config.cycle();
        const auto trace = run_sequence(config.initial_state(), cycle, params,
                                        config.simulation_options());

        const auto trace_path = output_path(config, "trace.csv");
        auto csv = open_output(trace_path);
        write_metadata(csv, "trace", config);
        csv << "# pulses = " << pulses_text(cycle) << "\n"
            << "# n_max = " << trace.n_max << "\n"
            << "# quad_order = " << trace.quad_order << "\n"
            << "cycle,P0,mean_n,tail_mass\n";
        for (std::size_t c = 0; c < trace.snapshots.size(); ++c) {
            const auto &s = trace.snapshots[c];
            csv << c << "," << num(s[0]) << "," << num(s.mean_n()) << ","
                << num(s.tail_mass()) << "\n";
        }
        const auto dist_path = output_path(config, "distribution.csv");
        auto dist = open_output(dist_path);
        write_metadata(dist, "distribution", config);
        dist << "# cycle = " << cycle.n_cycles << "\n";
        write_distribution(dist, trace.final_state());

        const auto &final_state = trace.final_state();
        out << "pulses " << pulses_text(cycle) << " x " << cycle.n_cycles << "\n"
            << "n_max " << trace.n_max;
        if (trace.basis_growths > 0) {
            out << " (grown from " << trace.initial_n_max << ")";
        }
        out << "\n"
            << "final P0 " << num(final_state[0]) << "\n"
            << "final mean_n " << num(final_state.mean_n()) << "\n"
            << "max |sum P - 1| " << num(trace.max_norm_error) << "\n"
            << "wrote " << trace_path.string() << " and " << dist_path.string() << "\n";
        return kExitOk;
    });
}

int cmd_reproduce(const std::string &figure, const RunConfig &config, std::ostream &out,
                  std::ostream &err) {
    return guarded(err, [&] {
        report_validity(config.params(), err);
        if (figure == "fig2") {
            return reproduce_fig2(config, out);
        }
        if (figure == "fig3") {
            return reproduce_fig3(config, out);
        }
        if (figure == "fig4") {
            return reproduce_fig4(config, out);
        }
        err << "usage error: unknown figure '" << figure << "' (fig2, fig3, fig4)\n";
        return kExitConfig;
    });
}

int cmd_optimize(const RunConfig &config, std::ostream &out, std::ostream &err) {
    return guarded(err, [&] {
        if (config.budget < 1) {
            err << "usage error: budget must be at least 1\n";
            return kExitConfig;
        }
        const auto params = config.params();
        report_validity(params, err);
        const bool user_cycle = config.scheme.has_value() || !config.pulses.empty();
        const Cycle seed = config.cycle();
        auto problem = default_optimization_problem(
            params, config.initial_state(), config.budget, config.scheme_options(),
            user_cycle ? &seed : nullptr);
        problem.simulation = config.simulation_options();
        const auto result = optimize_sequence(problem);

        const auto log_path = output_path(config, "optimize_log.csv");
        auto csv = open_output(log_path);
        write_metadata(csv, "optimize", config);
        csv << "# budget = " << config.budget << "\n"
            << "evaluation,seed,P0,incumbent,improved,n_max,pulses\n";
        for (const auto &e : result.log) {
            csv << e.index << "," << e.seed << "," << num(e.p0) << "," << num(e.incumbent)
                << "," << (e.improved ? 1 : 0) << "," << e.n_max << ","
                << pulses_text(e.cycle) << "\n";
        }

        out << "incumbent history:\n";
        for (const auto &e : result.log) {
            if (e.improved) {
                out << "  evaluation " << e.index << " (seed " << e.seed << "): P0 "
                    << num(e.p0) << "  " << pulses_text(e.cycle) << "\n";
            }
        }
        out << "evaluations " << result.log.size() << " of " << config.budget
            << (result.budget_exhausted ? " (budget exhausted)" : "") << "\n"
            << "best P0 " << num(result.p0) << "\n"
            << "wrote " << log_path.string() << "\n\n"
            << "# configuration reproducing the best cycle\n";
        RunConfig best = config;
        best.scheme.reset();
        best.pulses = result.best.pulses;
        best.n_max = result.automatic_basis ? 0 : result.n_max;
        out << to_config_text(best);
        return kExitOk;
    });
}

std::vector<double> fig2_etas() {
    std::vector<double> etas;
    for (int i = 1; i <= 40; ++i) {
        etas.push_back(i / 10.0);
    }
    return etas;
}

Fig2Point fig2_point(double eta, const RunConfig &config, RateMatrixCache *cache) {
    RunConfig local = config;
    local.eta = eta;
    const auto params = local.params();
    const auto initial = local.initial_state();
    const auto options = local.simulation_options();
    Fig2Point point;
    point.eta = eta;
    double *slots[] = {&point.p0_a, &point.p0_b, &point.p0_c};
    const SchemeId schemes[] = {SchemeId::fig2a, SchemeId::fig2b, SchemeId::fig2c};
    for (int i = 0; i < 3; ++i) {
        try {
            const auto trace = run_sequence(
                initial, build_cycle(schemes[i], params, local.scheme_options()), params,
                options, cache);
            *slots[i] = trace.final_state()[0];
            point.max_norm_error = std::max(point.max_norm_error, trace.max_norm_error);
            point.min_population = std::min(point.min_population, trace.min_population);
        } catch (const TailMassError &e) {
            *slots[i] = std::numeric_limits<double>::quiet_NaN();
            point.note += to_string(schemes[i]) + ": " + e.what() + "; ";
        }
    }
    return point;
}

Fig3Runs fig3_runs(const RunConfig &config, RateMatrixCache *cache) {
    const auto params = config.params();
    const auto initial = config.initial_state();
    const auto options = config.simulation_options();
    RateMatrixCache local;
    RateMatrixCache &shared = cache != nullptr ? *cache : local;
    auto cycle_a = build_cycle(SchemeId::fig3a, params, config.scheme_options());
    auto cycle_b = build_cycle(SchemeId::fig3b, params, config.scheme_options());
    return {run_sequence(initial, cycle_a, params, options, &shared),
            run_sequence(initial, cycle_b, params, options, &shared)};
}

} // namespace fockcool
