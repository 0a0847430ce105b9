#include "fockcool/protocol.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>
#include <stdexcept>

#include "fockcool/errors.hpp"

namespace fockcool {

namespace {

void check_eta(double eta) {
    if (!std::isfinite(eta) || eta < 0.0) {
        throw std::invalid_argument("eta must be finite and non-negative");
    }
}

} // namespace

std::vector<double> confining_detunings(double eta) {
    check_eta(eta);
    const int e = eta_hat_sq(eta);
    return {-static_cast<double>(std::max(2, e)), -static_cast<double>(1 + e)};
}

std::vector<BlueCandidate> scan_blue_detunings(const PhysicalParams &params,
                                               double lo, double hi,
                                               const BlueSelectionOptions &options) {
    params.validate();
    if (!(hi > 0.0) || !(hi >= lo)) {
        throw std::invalid_argument("blue detuning range must be a positive interval");
    }
    std::vector<BlueCandidate> out;
    const int first = std::max(1, static_cast<int>(std::ceil(lo)));
    const int last = static_cast<int>(std::floor(hi));
    for (int d = first; d <= last; ++d) {
        BlueCandidate c;
        c.delta = d;
        const auto rates = converged_emptying_rates(1, d, params);
        c.gamma0 = rates[0];
        c.gamma1 = rates[1];
        c.feasible = c.gamma1 >= options.gamma1_floor && c.gamma1 > 0.0 &&
                     c.ratio() <= options.max_ratio &&
                     c.gamma0 * options.duration <= options.max_gamma0_t;
        out.push_back(c);
    }
    return out;
}

std::vector<double> select_blue_detunings(const PhysicalParams &params,
                                          double lo, double hi, int count,
                                          const BlueSelectionOptions &options) {
    if (count < 1) {
        throw std::invalid_argument("count must be at least 1");
    }
    std::vector<BlueCandidate> pool;
    for (const auto &c : scan_blue_detunings(params, lo, hi, options)) {
        if (c.feasible) {
            pool.push_back(c);
        }
    }

    std::vector<double> chosen;
    while (static_cast<int>(chosen.size()) < count && !pool.empty()) {
        double best = pool.front().ratio();
        for (const auto &c : pool) {
            best = std::min(best, c.ratio());
        }
        // Smallest detuning among those tied with the best ratio.
        const BlueCandidate *pick = nullptr;
        for (const auto &c : pool) {
            if (c.ratio() <= best * (1.0 + options.tie_tolerance) &&
                (pick == nullptr || c.delta < pick->delta)) {
                pick = &c;
            }
        }
        const double delta = pick->delta;
        chosen.push_back(delta);
        std::erase_if(pool, [&](const BlueCandidate &c) {
            return std::abs(c.delta - delta) < options.min_separation;
        });
    }
    if (static_cast<int>(chosen.size()) < count) {
        std::ostringstream msg;
        msg << "only " << chosen.size() << " of " << count
            << " blue detunings in [" << lo << ", " << hi << "] satisfy Gamma_1 >= "
            << options.gamma1_floor << " and Gamma_0/Gamma_1 <= " << options.max_ratio
            << " at eta = " << params.eta;
        throw NoFeasibleDetuning(msg.str());
    }
    return chosen;
}

std::string to_string(SchemeId id) {
    switch (id) {
    case SchemeId::fig2a:
        return "fig2a";
    case SchemeId::fig2b:
        return "fig2b";
    case SchemeId::fig2c:
        return "fig2c";
    case SchemeId::fig3a:
        return "fig3a";
    case SchemeId::fig3b:
        return "fig3b";
    case SchemeId::fig3b_caption:
        return "fig3b_caption";
    case SchemeId::automatic:
        return "auto";
    }
    throw std::invalid_argument("unknown scheme");
}

SchemeId parse_scheme(std::string_view name) {
    for (SchemeId id : {SchemeId::fig2a, SchemeId::fig2b, SchemeId::fig2c,
                        SchemeId::fig3a, SchemeId::fig3b, SchemeId::fig3b_caption,
                        SchemeId::automatic}) {
        if (name == to_string(id)) {
            return id;
        }
    }
    throw std::invalid_argument("unknown scheme '" + std::string(name) + "'");
}

double blue_search_limit(double eta) {
    check_eta(eta);
    return std::max(10.0, 1.0 + eta_hat_sq(eta));
}

Cycle build_cycle(SchemeId scheme, const PhysicalParams &params,
                  const SchemeOptions &options) {
    const auto red = confining_detunings(params.eta);
    const double conf = options.confining_duration;
    const double empty = options.emptying_duration;
    Cycle c;
    c.n_cycles = options.n_cycles;
    switch (scheme) {
    case SchemeId::fig2a:
        c.pulses = {{red[0], options.fig2_duration}};
        break;
    case SchemeId::fig2b:
        c.pulses = {{-1.0, options.fig2_duration}};
        break;
    case SchemeId::fig2c:
        c.pulses = {{red[0], options.fig2_duration}, {-1.0, options.fig2_duration}};
        break;
    case SchemeId::fig3a:
        c.pulses = {{-24.0, 0.6}};
        break;
    case SchemeId::fig3b:
        c.pulses = {{-24.0, 0.6}, {-25.0, 0.6}, {7.0, 0.2}, {9.0, 0.2}};
        break;
    case SchemeId::fig3b_caption:
        c.pulses = {{-24.0, 0.6}, {-25.0, 0.6}, {7.0, 0.2}, {5.0, 0.2}};
        break;
    case SchemeId::automatic: {
        BlueSelectionOptions blue = options.blue;
        blue.duration = empty;
        const auto blues = select_blue_detunings(
            params, 0.0, blue_search_limit(params.eta), 2, blue);
        c.pulses = {{red[0], conf}, {red[1], conf}, {blues[0], empty}, {blues[1], empty}};
        break;
    }
    }
    c.validate();
    return c;
}

void OptimizationProblem::validate() const {
    params.validate();
    if (budget < 1) {
        throw std::invalid_argument("evaluation budget must be at least 1");
    }
    if (n_cycles < 0) {
        throw std::invalid_argument("n_cycles must be non-negative");
    }
    if (seeds.empty()) {
        throw std::invalid_argument("optimization needs at least one seed cycle");
    }
    for (const auto &b : bounds) {
        const bool finite = std::isfinite(b.delta_min) && std::isfinite(b.delta_max) &&
                            std::isfinite(b.duration_min) &&
                            std::isfinite(b.duration_max);
        if (!finite || b.delta_min > b.delta_max || !(b.duration_min > 0.0) ||
            b.duration_min > b.duration_max) {
            throw std::invalid_argument("pulse bounds must be finite, ordered and "
                                        "have positive durations");
        }
    }
    for (const auto &seed : seeds) {
        seed.validate();
        if (seed.pulses.size() != bounds.size()) {
            throw std::invalid_argument("every seed needs one bound per pulse");
        }
        for (std::size_t i = 0; i < bounds.size(); ++i) {
            const auto &p = seed.pulses[i];
            const auto &b = bounds[i];
            if (p.delta < b.delta_min || p.delta > b.delta_max ||
                p.duration < b.duration_min || p.duration > b.duration_max) {
                throw std::invalid_argument("seed pulse outside its bounds");
            }
        }
    }
}

OptimizationProblem default_optimization_problem(const PhysicalParams &params,
                                                 const PopulationVector &initial,
                                                 int budget,
                                                 const SchemeOptions &options,
                                                 const Cycle *first_seed) {
    OptimizationProblem problem;
    problem.params = params;
    problem.initial = initial;
    problem.n_cycles = options.n_cycles;
    problem.budget = budget;
    std::vector<Cycle> candidates;
    if (first_seed != nullptr) {
        candidates.push_back(*first_seed);
    }
    candidates.push_back(build_cycle(SchemeId::fig3b, params, options));
    try {
        candidates.push_back(build_cycle(SchemeId::automatic, params, options));
    } catch (const NoFeasibleDetuning &) {
    }
    for (auto &c : candidates) {
        c.n_cycles = options.n_cycles;
        const bool duplicate = std::find(problem.seeds.begin(), problem.seeds.end(),
                                         c) != problem.seeds.end();
        const bool same_shape =
            problem.seeds.empty() || c.pulses.size() == problem.seeds[0].pulses.size();
        if (!duplicate && same_shape) {
            problem.seeds.push_back(c);
        }
    }

    const double depth = 6.0 + eta_hat_sq(params.eta);
    const double reach = std::max(26.0, blue_search_limit(params.eta));
    for (const auto &pulse : problem.seeds.front().pulses) {
        PulseBounds b;
        if (pulse.delta < 0.0) {
            b.delta_min = -std::max(depth, std::abs(pulse.delta) + 2.0);
            b.delta_max = -1.0;
        } else {
            b.delta_min = 1.0;
            b.delta_max = std::max(reach, pulse.delta + 2.0);
        }
        b.duration_min = 0.05;
        b.duration_max = 20.0;
        problem.bounds.push_back(b);
    }
    for (const auto &seed : problem.seeds) {
        for (std::size_t i = 0; i < seed.pulses.size(); ++i) {
            auto &b = problem.bounds[i];
            b.delta_min = std::min(b.delta_min, seed.pulses[i].delta);
            b.delta_max = std::max(b.delta_max, seed.pulses[i].delta);
            if (seed.pulses[i].duration > 0.0) {
                b.duration_min = std::min(b.duration_min, seed.pulses[i].duration);
                b.duration_max = std::max(b.duration_max, seed.pulses[i].duration);
            }
        }
    }
    return problem;
}

namespace {

using PulseKey = std::vector<std::pair<double, double>>;

PulseKey key_of(const Cycle &c) {
    PulseKey key;
    for (const auto &p : c.pulses) {
        key.emplace_back(p.delta, p.duration);
    }
    return key;
}

class Search {
  public:
    Search(const OptimizationProblem &problem, RateMatrixCache &cache)
        : problem_(problem), cache_(cache) {}

    OptimizationResult run() {
        // Seeds run with the automatic basis; the largest basis they end up
        // with is then fixed for every other candidate.
        std::vector<std::pair<double, int>> seed_scores;
        for (std::size_t s = 0; s < problem_.seeds.size(); ++s) {
            if (exhausted()) {
                refused_ = true;
                break;
            }
            const double p0 = evaluate(static_cast<int>(s), problem_.seeds[s], true);
            seed_scores.emplace_back(p0, static_cast<int>(s));
        }
        if (fixed_n_max_ == 0) {
            fixed_n_max_ = problem_.simulation.n_max;
        }
        std::stable_sort(seed_scores.begin(), seed_scores.end(),
                         [](const auto &a, const auto &b) { return a.first > b.first; });

        std::size_t started = 0;
        for (; started < seed_scores.size() && !exhausted(); ++started) {
            const int remaining_seeds = static_cast<int>(seed_scores.size() - started);
            const int share = (problem_.budget - used_) / remaining_seeds;
            descend(seed_scores[started].second, share);
        }
        if (started < seed_scores.size()) {
            refused_ = true;
        }

        // Each start ends at its own incumbent; equal objectives go to the
        // shorter cycle.
        OptimizationResult result;
        result.log = log_;
        result.budget_exhausted = refused_;
        for (std::size_t s = 0; s < problem_.seeds.size(); ++s) {
            const Evaluation *e = final_of_seed(static_cast<int>(s));
            if (e == nullptr || e->p0 < 0.0) {
                continue;
            }
            const bool better = e->p0 > result.p0;
            const bool tie = e->p0 == result.p0 &&
                             e->cycle.total_duration() < result.best.total_duration();
            if (better || tie) {
                result.p0 = e->p0;
                result.best = e->cycle;
                result.n_max = e->n_max;
                result.automatic_basis = e->automatic_basis;
            }
        }
        if (result.p0 < 0.0) {
            throw ConvergenceError("no candidate cycle could be simulated");
        }
        return result;
    }

  private:
    const Evaluation *find(const PulseKey &key) const {
        for (const auto &e : log_) {
            if (key_of(e.cycle) == key) {
                return &e;
            }
        }
        return nullptr;
    }

    const Evaluation *final_of_seed(int seed) const {
        if (auto it = finals_.find(seed); it != finals_.end()) {
            return find(it->second);
        }
        return find(key_of(problem_.seeds[static_cast<std::size_t>(seed)]));
    }

    // True once no further simulation may start.
    bool exhausted() const { return used_ >= problem_.budget; }

    double evaluate(int seed, const Cycle &cycle, bool automatic_basis) {
        Cycle run = cycle;
        run.n_cycles = problem_.n_cycles;
        const auto key = key_of(run);
        if (auto it = memo_.find(key); it != memo_.end()) {
            return it->second;
        }
        ++used_;
        Evaluation e;
        e.index = static_cast<int>(log_.size());
        e.seed = seed;
        e.cycle = run;
        SimulationOptions sim = problem_.simulation;
        if (!automatic_basis && fixed_n_max_ > 0) {
            sim.n_max = fixed_n_max_;
        }
        e.automatic_basis = sim.n_max == 0;
        try {
            const auto trace = run_sequence(problem_.initial, run, problem_.params, sim,
                                            &cache_);
            e.p0 = trace.final_state()[0];
            e.n_max = trace.n_max;
            if (automatic_basis) {
                fixed_n_max_ = std::max(fixed_n_max_, trace.n_max);
            }
        } catch (const TailMassError &err) {
            e.note = err.what();
        } catch (const TruncationError &err) {
            e.note = err.what();
        } catch (const QuadratureError &err) {
            e.note = err.what();
        }
        e.improved = e.p0 > incumbent_;
        incumbent_ = std::max(incumbent_, e.p0);
        e.incumbent = incumbent_;
        log_.push_back(e);
        memo_.emplace(key, e.p0);
        return e.p0;
    }

    std::vector<Cycle> neighbours(const Cycle &current, std::size_t i) const {
        static constexpr double kSteps[] = {0.5, 0.707, 1.414, 2.0};
        const auto &b = problem_.bounds[i];
        const Pulse p = current.pulses[i];
        std::vector<Cycle> out;
        for (double step : {-1.0, 1.0}) {
            const double delta = p.delta + step;
            if (delta >= b.delta_min && delta <= b.delta_max && delta != 0.0) {
                Cycle c = current;
                c.pulses[i].delta = delta;
                out.push_back(c);
            }
        }
        for (double factor : kSteps) {
            const double duration =
                std::clamp(p.duration * factor, b.duration_min, b.duration_max);
            if (duration != p.duration) {
                Cycle c = current;
                c.pulses[i].duration = duration;
                out.push_back(c);
            }
        }
        return out;
    }

    void descend(int seed, int share) {
        Cycle current = problem_.seeds[static_cast<std::size_t>(seed)];
        double value = memo_.at(key_of(current));
        const int stop = used_ + share;
        bool moved = true;
        while (moved && used_ < stop) {
            moved = false;
            for (std::size_t i = 0; i < current.pulses.size() && used_ < stop; ++i) {
                Cycle best = current;
                double best_value = value;
                for (const auto &candidate : neighbours(current, i)) {
                    if (used_ >= stop && !memo_.contains(key_of(candidate))) {
                        refused_ = true;
                        break;
                    }
                    const double v = evaluate(seed, candidate, false);
                    if (v > best_value) {
                        best_value = v;
                        best = candidate;
                    }
                }
                if (best_value > value) {
                    current = best;
                    value = best_value;
                    moved = true;
                }
            }
        }
        if (moved && used_ >= stop) {
            refused_ = true;
        }
        finals_[seed] = key_of(current);
    }

    const OptimizationProblem &problem_;
    RateMatrixCache &cache_;
    std::vector<Evaluation> log_;
    std::map<PulseKey, double> memo_;
    std::map<int, PulseKey> finals_;
    int used_ = 0;
    bool refused_ = false;
    int fixed_n_max_ = 0;
    double incumbent_ = -1.0;
};

} // namespace

OptimizationResult optimize_sequence(const OptimizationProblem &problem,
                                     RateMatrixCache *cache) {
    problem.validate();
    RateMatrixCache local;
    Search search(problem, cache != nullptr ? *cache : local);
    return search.run();
}

} // namespace fockcool
