#ifndef FOCKCOOL_RATES_HPP
#define FOCKCOOL_RATES_HPP

// Transition rates between trap levels of the ground state, obtained after
// adiabatic elimination of the excited state. Frequencies are in units of the
// trap frequency nu; rates are in units of Omega^2 / Gamma.

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "fockcool/angular.hpp"

namespace fockcool {

struct PhysicalParams {
    /// Trap frequency; the frequency unit.
    static constexpr double nu = 1.0;

    double eta = 0.0;   ///< Lamb-Dicke parameter.
    double Gamma = 0.1; ///< Effective decay rate of |e>.
    double gamma = 0.05; ///< Half-linewidth in the Lorentzian denominators.
    double Omega = 0.01; ///< Rabi frequency; only enters validity checks.
    AngularDistribution angular{};

    /// gamma = gamma_ratio * Gamma.
    static PhysicalParams make(double eta, double Gamma, double gamma_ratio,
                               double Omega,
                               AngularKind angular = AngularKind::dipole);

    /// Throws std::invalid_argument on non-physical values.
    void validate() const;
};

/// ceil(eta^2): the smallest integer not below eta^2.
int eta_hat_sq(double eta);

/// Generator of the population dynamics on levels 0..n_max.
///
/// Off-diagonal entry (n, m) is the rate from m into n; the diagonal holds
/// the negative column sum, so columns sum to zero. The elastic channel
/// n <- n cancels in the rate equation and is left out.
class RateMatrix {
  public:
    RateMatrix() = default;
    RateMatrix(Eigen::MatrixXd generator, double delta, int quad_order,
               int intermediate_cutoff);

    const Eigen::MatrixXd &generator() const { return generator_; }
    int dim() const { return static_cast<int>(generator_.rows()); }
    int n_max() const { return dim() - 1; }
    double operator()(int n, int m) const { return generator_(n, m); }

    double delta() const { return delta_; }
    int quad_order() const { return quad_order_; }
    int intermediate_cutoff() const { return intermediate_cutoff_; }

    /// Largest total outflow rate over all levels.
    double max_outflow() const;
    /// max |column sum|; zero up to rounding.
    double max_column_sum() const;

  private:
    Eigen::MatrixXd generator_;
    double delta_ = 0.0;
    int quad_order_ = 0;
    int intermediate_cutoff_ = 0;
};

struct RateOptions {
    /// Gauss-Legendre nodes for the emission angle. 0 selects
    /// recommended_quad_order().
    int quad_order = 0;
    /// Last intermediate Fock level in the excitation sum. 0 selects
    /// recommended_intermediate_cutoff() and grows it until the tail check
    /// passes; an explicit value that fails the check throws.
    int intermediate_cutoff = 0;
    /// Re-evaluate with twice the nodes and compare.
    bool check_quadrature = true;
    /// Relative shift under doubling that counts as non-convergence.
    double quadrature_tolerance = 1e-6;
    /// Last-term share of the accumulated excitation weight.
    double tail_tolerance = 1e-12;
};

/// Gamma_{n <- m} for a laser detuned by delta.
double rate_nm(int n, int m, double delta, const PhysicalParams &params,
               int intermediate_cutoff, int quad_order = 64);

/// Total rate Gamma_n at which level n is emptied, summed over intermediate
/// levels k = 0..intermediate_cutoff.
double emptying_rate(int n, double delta, const PhysicalParams &params,
                     int intermediate_cutoff);

/// Gamma_n on all levels 0..n_last with a shared intermediate cutoff.
std::vector<double> emptying_rates(int n_last, double delta,
                                   const PhysicalParams &params,
                                   int intermediate_cutoff);

/// Gamma_n on levels 0..n_last with the intermediate cutoff enlarged until
/// the tail check passes.
std::vector<double> converged_emptying_rates(int n_last, double delta,
                                             const PhysicalParams &params);

/// Single resonant term for delta = -k0 nu: |<n-k0| e^{i k x} |n>|^2 when
/// the target level exists. `strict_gt` requires n > k0 rather than n >= k0.
double emptying_rate_resonant(int n, int k0, const PhysicalParams &params,
                              bool strict_gt = false);

RateMatrix build_rate_matrix(double delta, const PhysicalParams &params,
                             int n_max, const RateOptions &options = {});

/// Node count that resolves the emission-angle oscillations on levels up to
/// n_max; never below 64.
int recommended_quad_order(double eta, int n_max);

/// Intermediate cutoff that usually satisfies the tail check.
int recommended_intermediate_cutoff(double eta, int n_max, double delta);

/// Basis truncation policy: the larger of the initial-state support and the
/// largest |delta|, plus 4 ceil(eta^2) + 30.
int auto_basis_size(int initial_support, double max_abs_delta, double eta);

} // namespace fockcool

#endif
