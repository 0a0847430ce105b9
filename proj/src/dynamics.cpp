#include "fockcool/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <sstream>
#include <stdexcept>

#include "fockcool/errors.hpp"

namespace fockcool {

namespace {

// Largest Lambda * t handled in one uniformization step; keeps exp(-Lambda t)
// far from underflow.
constexpr double kMaxStepWeight = 40.0;
// Poisson mass left out of the truncated series.
constexpr double kSeriesTolerance = 1e-15;
constexpr int kMaxSeriesTerms = 10000;

// Column-stochastic S = I + R / Lambda. The diagonal is clamped at zero so
// rounding in 1 - outflow/Lambda cannot produce a negative entry.
Eigen::MatrixXd stochastic_matrix(const RateMatrix &rates, double lambda) {
    Eigen::MatrixXd s = rates.generator() / lambda;
    for (int i = 0; i < s.rows(); ++i) {
        s(i, i) = std::max(0.0, 1.0 + s(i, i));
    }
    return s;
}

struct Schedule {
    double lambda = 0.0;
    int steps = 0;
    double step_weight = 0.0; // Lambda * t per step
};

Schedule schedule_for(const RateMatrix &rates, double duration) {
    Schedule s;
    s.lambda = rates.max_outflow();
    if (!(s.lambda > 0.0) || duration == 0.0) {
        return s;
    }
    const double total = s.lambda * duration;
    s.steps = std::max(1, static_cast<int>(std::ceil(total / kMaxStepWeight)));
    s.step_weight = total / s.steps;
    return s;
}

// Poisson weights exp(-a) a^j / j! until the remaining mass drops below the
// tolerance.
std::vector<double> poisson_weights(double a) {
    std::vector<double> w;
    double term = std::exp(-a);
    double acc = 0.0;
    for (int j = 0;; ++j) {
        if (j > 0) {
            term *= a / j;
        }
        w.push_back(term);
        acc += term;
        if (1.0 - acc < kSeriesTolerance && j >= a) {
            break;
        }
        if (j >= kMaxSeriesTerms) {
            throw ConvergenceError("uniformization series did not converge");
        }
    }
    return w;
}

void require_duration(double duration) {
    if (!(duration >= 0.0) || !std::isfinite(duration)) {
        throw std::invalid_argument("pulse duration must be finite and >= 0");
    }
}

} // namespace

PopulationVector::PopulationVector(Eigen::VectorXd p) : p_(std::move(p)) {
    if (p_.size() == 0) {
        throw std::invalid_argument("empty population vector");
    }
}

PopulationVector PopulationVector::from_values(const std::vector<double> &values,
                                               double tolerance) {
    if (values.empty()) {
        throw std::invalid_argument("empty population vector");
    }
    Eigen::VectorXd p(static_cast<Eigen::Index>(values.size()));
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (!(values[i] >= 0.0 && values[i] <= 1.0)) {
            throw std::invalid_argument("population entry " + std::to_string(i) +
                                        " outside [0, 1]");
        }
        p(static_cast<Eigen::Index>(i)) = values[i];
    }
    if (std::abs(p.sum() - 1.0) > tolerance) {
        std::ostringstream msg;
        msg << "populations sum to " << p.sum() << ", not 1";
        throw std::invalid_argument(msg.str());
    }
    return PopulationVector(std::move(p));
}

double PopulationVector::mean_n() const {
    double s = 0.0;
    for (int n = 0; n < size(); ++n) {
        s += n * p_(n);
    }
    return s;
}

double PopulationVector::tail_mass(int window) const {
    const int first = std::max(0, size() - window);
    return p_.tail(size() - first).sum();
}

PopulationVector PopulationVector::resized(int n_max) const {
    if (n_max < 0) {
        throw std::invalid_argument("negative n_max");
    }
    const int dim = n_max + 1;
    Eigen::VectorXd out = Eigen::VectorXd::Zero(dim);
    const int keep = std::min(dim, size());
    out.head(keep) = p_.head(keep);
    if (keep < size() && p_.tail(size() - keep).sum() != 0.0) {
        throw std::invalid_argument(
            "cannot shrink a population vector with mass above n_max");
    }
    return PopulationVector(std::move(out));
}

PopulationVector thermal_populations(double nbar, int n_max) {
    if (!(nbar >= 0.0) || !std::isfinite(nbar)) {
        throw std::invalid_argument("mean occupation must be >= 0");
    }
    if (n_max < 0) {
        throw std::invalid_argument("negative n_max");
    }
    Eigen::VectorXd p = Eigen::VectorXd::Zero(n_max + 1);
    const double ratio = nbar / (1.0 + nbar);
    double term = 1.0;
    for (int n = 0; n <= n_max; ++n) {
        p(n) = term;
        term *= ratio;
    }
    p /= p.sum();
    PopulationVector out(std::move(p));
    if (std::abs(out.mean_n() - nbar) > 1e-6) {
        std::ostringstream msg;
        msg << "n_max=" << n_max << " truncates the thermal state (nbar=" << nbar
            << ") to mean " << out.mean_n();
        throw std::invalid_argument(msg.str());
    }
    return out;
}

int thermal_support(double nbar, double tail) {
    if (nbar <= 0.0) {
        return 0;
    }
    const double ratio = nbar / (1.0 + nbar);
    // sum_{j > n} P_j = ratio^(n+1)
    const int n = static_cast<int>(std::ceil(std::log(tail) / std::log(ratio))) - 1;
    return std::max(0, n);
}

int population_support(const PopulationVector &p, double tail) {
    double above = 0.0;
    for (int n = p.n_max(); n >= 0; --n) {
        above += p[n];
        if (above >= tail) {
            return n;
        }
    }
    return 0;
}

void Cycle::validate() const {
    if (pulses.empty()) {
        throw std::invalid_argument("cycle has no pulses");
    }
    if (n_cycles < 0) {
        throw std::invalid_argument("negative cycle count");
    }
    for (const auto &p : pulses) {
        if (!std::isfinite(p.delta)) {
            throw std::invalid_argument("pulse detuning must be finite");
        }
        if (!(p.duration > 0.0) || !std::isfinite(p.duration)) {
            throw std::invalid_argument("pulse duration must be positive");
        }
    }
}

double Cycle::total_duration() const {
    double t = 0.0;
    for (const auto &p : pulses) {
        t += p.duration;
    }
    return t;
}

double Cycle::max_abs_delta() const {
    double d = 0.0;
    for (const auto &p : pulses) {
        d = std::max(d, std::abs(p.delta));
    }
    return d;
}

PopulationVector evolve_pulse(const PopulationVector &p, const RateMatrix &rates,
                              double duration) {
    require_duration(duration);
    if (p.size() != rates.dim()) {
        throw std::invalid_argument("population and rate matrix sizes differ");
    }
    const Schedule sched = schedule_for(rates, duration);
    if (sched.steps == 0) {
        return p;
    }
    const Eigen::MatrixXd s = stochastic_matrix(rates, sched.lambda);
    const std::vector<double> w = poisson_weights(sched.step_weight);
    double weight_sum = 0.0;
    for (double x : w) {
        weight_sum += x;
    }
    Eigen::VectorXd state = p.values();
    Eigen::VectorXd power(state.size());
    Eigen::VectorXd next(state.size());
    for (int step = 0; step < sched.steps; ++step) {
        power = state;
        Eigen::VectorXd acc = w[0] * power;
        for (std::size_t j = 1; j < w.size(); ++j) {
            next.noalias() = s * power;
            power.swap(next);
            acc += w[j] * power;
        }
        state = acc / weight_sum;
    }
    return PopulationVector(std::move(state));
}

PulsePropagator::PulsePropagator(const RateMatrix &rates, double duration) {
    require_duration(duration);
    const int dim = rates.dim();
    const Schedule sched = schedule_for(rates, duration);
    if (sched.steps == 0) {
        transfer_ = Eigen::MatrixXd::Identity(dim, dim);
        return;
    }
    const Eigen::MatrixXd s = stochastic_matrix(rates, sched.lambda);
    const std::vector<double> w = poisson_weights(sched.step_weight);
    double weight_sum = 0.0;
    for (double x : w) {
        weight_sum += x;
    }
    Eigen::MatrixXd power = Eigen::MatrixXd::Identity(dim, dim);
    Eigen::MatrixXd next(dim, dim);
    Eigen::MatrixXd step = w[0] * power;
    for (std::size_t j = 1; j < w.size(); ++j) {
        next.noalias() = s * power;
        power.swap(next);
        step += w[j] * power;
    }
    step /= weight_sum;
    transfer_ = step;
    for (int i = 1; i < sched.steps; ++i) {
        next.noalias() = step * transfer_;
        transfer_.swap(next);
    }
}

PopulationVector PulsePropagator::apply(const PopulationVector &p) const {
    if (p.size() != transfer_.rows()) {
        throw std::invalid_argument("population and propagator sizes differ");
    }
    Eigen::VectorXd out = transfer_ * p.values();
    return PopulationVector(std::move(out));
}

std::shared_ptr<const RateMatrix>
RateMatrixCache::get(double delta, const PhysicalParams &params, int n_max,
                     const RateOptions &options) {
    const Key key{delta,
                  params.eta,
                  params.gamma,
                  params.Gamma,
                  static_cast<int>(params.angular.kind),
                  n_max,
                  options.quad_order,
                  options.intermediate_cutoff,
                  options.check_quadrature,
                  options.quadrature_tolerance};
    {
        std::lock_guard<std::mutex> lock(mutex_);
        auto it = entries_.find(key);
        if (it != entries_.end()) {
            return it->second;
        }
    }
    // Built outside the lock; a concurrent duplicate build yields an
    // identical matrix and the first insertion wins.
    auto built = std::make_shared<const RateMatrix>(
        build_rate_matrix(delta, params, n_max, options));
    std::lock_guard<std::mutex> lock(mutex_);
    return entries_.emplace(key, std::move(built)).first->second;
}

std::size_t RateMatrixCache::size() const {
    std::lock_guard<std::mutex> lock(mutex_);
    return entries_.size();
}

int simulation_basis_size(const PopulationVector &initial, const Cycle &cycle,
                          const PhysicalParams &params) {
    return auto_basis_size(population_support(initial), cycle.max_abs_delta(),
                           params.eta);
}

SimulationTrace run_sequence(const PopulationVector &initial,
                             const Cycle &cycle, const PhysicalParams &params,
                             const SimulationOptions &options,
                             RateMatrixCache *cache) {
    params.validate();
    cycle.validate();
    const bool fixed_basis = options.n_max > 0;
    int n_max = fixed_basis
                    ? options.n_max
                    : std::max(simulation_basis_size(initial, cycle, params),
                               initial.n_max());
    PopulationVector state = initial.resized(n_max);

    RateMatrixCache local_cache;
    RateMatrixCache &rates_cache = cache != nullptr ? *cache : local_cache;

    SimulationTrace trace;
    trace.params = params;
    trace.initial_n_max = n_max;

    // One step per distinct (delta, duration). A dense propagator pays off
    // only when enough cycles remain to amortize its N^3 build.
    struct Step {
        std::shared_ptr<const RateMatrix> rates;
        double duration = 0.0;
        std::optional<PulsePropagator> dense;
    };
    constexpr int kDenseLevelsPerCycle = 3;
    std::vector<Step> steps;
    std::vector<std::size_t> step_of_pulse;
    auto build_propagators = [&](int remaining_cycles) {
        steps.clear();
        step_of_pulse.clear();
        std::vector<Pulse> seen;
        const bool dense = n_max + 1 < kDenseLevelsPerCycle * remaining_cycles;
        for (const auto &pulse : cycle.pulses) {
            auto it = std::find(seen.begin(), seen.end(), pulse);
            if (it != seen.end()) {
                step_of_pulse.push_back(static_cast<std::size_t>(it - seen.begin()));
                continue;
            }
            Step step;
            step.rates = rates_cache.get(pulse.delta, params, n_max, options.rates);
            step.duration = pulse.duration;
            trace.quad_order = std::max(trace.quad_order, step.rates->quad_order());
            if (dense) {
                step.dense.emplace(*step.rates, pulse.duration);
            }
            steps.push_back(std::move(step));
            seen.push_back(pulse);
            step_of_pulse.push_back(steps.size() - 1);
        }
    };
    build_propagators(cycle.n_cycles);

    trace.snapshots.reserve(static_cast<std::size_t>(cycle.n_cycles) + 1);
    trace.snapshots.push_back(state);

    for (int c = 0; c < cycle.n_cycles;) {
        const std::size_t p0_mark = trace.p0_per_pulse.size();
        const std::size_t snapshot_mark = trace.pulse_snapshots.size();
        double worst_tail = 0.0;
        bool overflow = false;
        for (std::size_t i = 0; i < cycle.pulses.size(); ++i) {
            const Step &step = steps[step_of_pulse[i]];
            state = step.dense ? step.dense->apply(state)
                               : evolve_pulse(state, *step.rates, step.duration);
            trace.p0_per_pulse.push_back(state[0]);
            trace.max_norm_error =
                std::max(trace.max_norm_error, std::abs(state.total() - 1.0));
            trace.min_population =
                std::min(trace.min_population, state.min_value());
            if (options.per_pulse_snapshots) {
                trace.pulse_snapshots.push_back(state);
            }
            const double tail = state.tail_mass(options.tail_window);
            worst_tail = std::max(worst_tail, tail);
            if (tail <= options.tail_limit) {
                continue;
            }
            if (fixed_basis || trace.basis_growths >= options.max_basis_growth) {
                std::ostringstream msg;
                msg << "population " << tail << " reached the top "
                    << options.tail_window << " levels of the basis (n_max="
                    << n_max << ") in cycle " << c;
                throw TailMassError(msg.str(), c, tail);
            }
            overflow = true;
            break;
        }
        if (overflow) {
            n_max = static_cast<int>(
                std::ceil(n_max * options.basis_growth_factor));
            ++trace.basis_growths;
            trace.p0_per_pulse.resize(p0_mark);
            trace.pulse_snapshots.resize(snapshot_mark);
            state = trace.snapshots.back().resized(n_max);
            build_propagators(cycle.n_cycles - c);
            continue;
        }
        trace.tail_mass_per_cycle.push_back(worst_tail);
        trace.snapshots.push_back(state);
        ++c;
    }

    trace.n_max = n_max;
    for (auto *list : {&trace.snapshots, &trace.pulse_snapshots}) {
        for (auto &snapshot : *list) {
            if (snapshot.n_max() != n_max) {
                snapshot = snapshot.resized(n_max);
            }
        }
    }
    return trace;
}

std::vector<std::string> validity_check(const PhysicalParams &params) {
    // A ratio above this no longer counts as "much less than".
    constexpr double kMuchLess = 0.2;
    std::vector<std::string> warnings;
    std::ostringstream msg;
    if (params.Gamma > 0.0) {
        const double ratio = params.Omega / params.Gamma;
        if (!(ratio <= kMuchLess)) {
            msg.str("");
            msg << "Omega << Gamma violated (Omega/Gamma = " << ratio << ")";
            warnings.push_back(msg.str());
        }
        const double light_shift = params.Omega * params.Omega / params.Gamma;
        if (!(light_shift / PhysicalParams::nu <= kMuchLess)) {
            msg.str("");
            msg << "nu >> Omega^2/Gamma violated (Omega^2/(Gamma nu) = "
                << light_shift / PhysicalParams::nu << ")";
            warnings.push_back(msg.str());
        }
    }
    if (!(params.Gamma < PhysicalParams::nu)) {
        msg.str("");
        msg << "strong confinement Gamma < nu violated (Gamma/nu = "
            << params.Gamma / PhysicalParams::nu << ")";
        warnings.push_back(msg.str());
    }
    if (!(params.gamma < PhysicalParams::nu)) {
        msg.str("");
        msg << "resolved sidebands gamma < nu violated (gamma/nu = "
            << params.gamma / PhysicalParams::nu << ")";
        warnings.push_back(msg.str());
    }
    return warnings;
}

} // namespace fockcool
