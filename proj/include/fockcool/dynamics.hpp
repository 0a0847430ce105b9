#ifndef FOCKCOOL_DYNAMICS_HPP
#define FOCKCOOL_DYNAMICS_HPP

// Time evolution of trap-level populations under piecewise-constant laser
// pulses. Durations are in units of Gamma / Omega^2, so a duration times a
// rate from the rates module is dimensionless.

#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <tuple>
#include <vector>

#include <Eigen/Dense>

#include "fockcool/rates.hpp"

namespace fockcool {

/// Probabilities P_n on levels n = 0..n_max.
class PopulationVector {
  public:
    PopulationVector() = default;
    explicit PopulationVector(Eigen::VectorXd p);

    /// Rejects negative entries and totals more than `tolerance` away from 1.
    static PopulationVector from_values(const std::vector<double> &values,
                                        double tolerance = 1e-9);

    const Eigen::VectorXd &values() const { return p_; }
    int size() const { return static_cast<int>(p_.size()); }
    int n_max() const { return size() - 1; }
    double operator[](int n) const { return p_(n); }

    double total() const { return p_.sum(); }
    double mean_n() const;
    double min_value() const { return p_.minCoeff(); }
    /// Mass on the top `window` levels, n > n_max - window.
    double tail_mass(int window = 10) const;

    /// Same distribution on levels 0..n_max; growing pads with zeros,
    /// shrinking requires the dropped mass to be exactly zero.
    PopulationVector resized(int n_max) const;

  private:
    Eigen::VectorXd p_;
};

/// Geometric distribution with mean `nbar`, truncated at n_max and
/// renormalized. Throws if truncation moves the mean by more than 1e-6.
PopulationVector thermal_populations(double nbar, int n_max);

/// Smallest n with sum_{j > n} P_j < tail for the thermal state.
int thermal_support(double nbar, double tail = 1e-10);

/// Smallest n with sum_{j > n} P_j < tail for an explicit vector.
int population_support(const PopulationVector &p, double tail = 1e-10);

struct Pulse {
    double delta = 0.0;    ///< Detuning, units of nu.
    double duration = 0.0; ///< Units of Gamma / Omega^2.

    friend bool operator==(const Pulse &, const Pulse &) = default;
};

struct Cycle {
    std::vector<Pulse> pulses;
    int n_cycles = 1;

    void validate() const;
    double total_duration() const;
    double max_abs_delta() const;

    friend bool operator==(const Cycle &, const Cycle &) = default;
};

/// exp(R t) P by uniformization: with Lambda >= max outflow and
/// S = I + R / Lambda (column stochastic),
///   exp(R t) = sum_j Poisson(j; Lambda t) S^j.
/// Every term is a non-negative combination, so the result stays a
/// probability vector.
PopulationVector evolve_pulse(const PopulationVector &p, const RateMatrix &rates,
                              double duration);

/// exp(R t) as a dense column-stochastic matrix, assembled with the same
/// uniformization series. Cheap to apply many times.
class PulsePropagator {
  public:
    PulsePropagator(const RateMatrix &rates, double duration);

    const Eigen::MatrixXd &matrix() const { return transfer_; }
    PopulationVector apply(const PopulationVector &p) const;

  private:
    Eigen::MatrixXd transfer_;
};

/// Shared store of assembled rate matrices, keyed by detuning, physical
/// parameters, basis size and assembly options. Safe for concurrent use.
class RateMatrixCache {
  public:
    std::shared_ptr<const RateMatrix> get(double delta,
                                          const PhysicalParams &params,
                                          int n_max,
                                          const RateOptions &options);
    std::size_t size() const;

  private:
    using Key = std::tuple<double, double, double, double, int, int, int, int,
                           bool, double>;
    mutable std::mutex mutex_;
    std::map<Key, std::shared_ptr<const RateMatrix>> entries_;
};

struct SimulationOptions {
    /// Fixed basis size; 0 applies the truncation policy.
    int n_max = 0;
    RateOptions rates{};
    bool per_pulse_snapshots = false;
    /// Abort when mass on the top `tail_window` levels exceeds this.
    double tail_limit = 1e-8;
    int tail_window = 10;
    /// With an automatic basis, times the basis may be enlarged when mass
    /// reaches its edge. The failed cycle is replayed in the larger basis.
    int max_basis_growth = 4;
    double basis_growth_factor = 1.5;
};

struct SimulationTrace {
    /// Initial state plus one entry per completed cycle.
    std::vector<PopulationVector> snapshots;
    /// P_0 after every pulse, in application order.
    std::vector<double> p0_per_pulse;
    /// Full vectors after every pulse when requested.
    std::vector<PopulationVector> pulse_snapshots;
    /// Per cycle, the largest tail mass seen after any of its pulses.
    std::vector<double> tail_mass_per_cycle;

    PhysicalParams params{};
    /// Final basis size; every stored vector is padded to it.
    int n_max = 0;
    int initial_n_max = 0;
    int basis_growths = 0;
    int quad_order = 0;
    /// Largest |sum P - 1| and smallest entry seen after any pulse.
    double max_norm_error = 0.0;
    double min_population = 1.0;

    const PopulationVector &final_state() const { return snapshots.back(); }
};

/// Basis size the truncation policy assigns to a run.
int simulation_basis_size(const PopulationVector &initial, const Cycle &cycle,
                          const PhysicalParams &params);

/// Applies the pulses of `cycle` in order, n_cycles times. The initial state
/// is padded to the basis size chosen by the options. Throws TailMassError
/// with the offending cycle index when mass reaches the basis edge and the
/// basis may not grow any further.
SimulationTrace run_sequence(const PopulationVector &initial,
                             const Cycle &cycle, const PhysicalParams &params,
                             const SimulationOptions &options = {},
                             RateMatrixCache *cache = nullptr);

/// Human-readable notes for each violated validity condition of the rate
/// equations. Never throws.
std::vector<std::string> validity_check(const PhysicalParams &params);

} // namespace fockcool

#endif
