#include "fockcool/rates.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <utility>
#include <vector>
#include <stdexcept>

#include "fockcool/displacement.hpp"
#include "fockcool/errors.hpp"

namespace fockcool {

namespace {

// Number of trailing intermediate terms inspected by the tail check.
constexpr int kTailTerms = 4;
// Entries below this (units Omega^2/Gamma) are exempt from the relative
// quadrature comparison.
constexpr double kQuadratureAbsFloor = 1e-14;

// Excitation weights c(k, m) = gamma b(k, m) / (delta - (k - m) + i gamma),
// k = 0..cutoff, m = 0..n_max, split into real and imaginary parts stacked
// side by side: [Re C | Im C].
Eigen::MatrixXd excitation_weights(double delta, const PhysicalParams &params,
                                   int cutoff, int n_max) {
    const int rows = cutoff + 1;
    const int cols = n_max + 1;
    const Eigen::MatrixXd b =
        reduced_displacement_matrix(params.eta, rows, cols);
    Eigen::MatrixXd out(rows, 2 * cols);
    const double g = params.gamma;
    for (int m = 0; m < cols; ++m) {
        for (int k = 0; k < rows; ++k) {
            const double detuning = delta - PhysicalParams::nu * (k - m);
            const double denom = detuning * detuning + g * g;
            // g / (detuning + i g) = g (detuning - i g) / denom
            out(k, m) = g * b(k, m) * detuning / denom;
            out(k, cols + m) = -g * b(k, m) * g / denom;
        }
    }
    return out;
}

// Column indices whose intermediate sum is not converged at the cutoff.
std::vector<int> failing_tails(const Eigen::MatrixXd &weights, int cols,
                               double tolerance) {
    std::vector<int> bad;
    const int rows = static_cast<int>(weights.rows());
    const int first_tail = std::max(0, rows - kTailTerms);
    for (int m = 0; m < cols; ++m) {
        double total = 0.0;
        double tail = 0.0;
        for (int k = 0; k < rows; ++k) {
            const double w = weights(k, m) * weights(k, m) +
                             weights(k, cols + m) * weights(k, cols + m);
            total += w;
            if (k >= first_tail) {
                tail = std::max(tail, w);
            }
        }
        if (tail > tolerance * total) {
            bad.push_back(m);
        }
    }
    return bad;
}

// Integral over the emission angle of |sum_k b(n,k,-eta u) c(k,m)|^2 for all
// n, m, using the given rule.
//
// b(n,k,-kappa) = (-1)^(n-k) b(n,k,kappa) and N(u) is even, so the nodes +u
// and -u are handled together: splitting the k-sum into even and odd k gives
// amplitudes X + Y at +u and (-1)^n (X - Y) at -u, and
// |X + Y|^2 + |X - Y|^2 = 2 (|X|^2 + |Y|^2). One product with half of the
// intermediate levels per parity covers both nodes.
// Index range [first, last] of levels k whose sqrt lies within reach of
// [sqrt(lo), sqrt(hi)].
std::pair<int, int> reach_range(int lo, int hi, double reach, int limit) {
    const double a = std::sqrt(static_cast<double>(lo)) - reach;
    const double b = std::sqrt(static_cast<double>(hi)) + reach;
    const int first = a <= 0.0 ? 0 : static_cast<int>(std::floor(a * a));
    const int last = static_cast<int>(std::ceil(b * b));
    return {first, std::min(last, limit - 1)};
}

constexpr int kBlock = 64;
// Margin in sqrt(n) beyond the classical reach of a kick.
constexpr double kReachMargin = 3.5;

// Only column blocks with `selected[cb]` set are integrated when a mask is
// given; the other columns stay zero.
Eigen::MatrixXd integrate_emission(const Eigen::MatrixXd &weights,
                                   const PhysicalParams &params, int n_max,
                                   const GaussLegendre &rule,
                                   const std::vector<bool> &selected = {}) {
    using Strided = Eigen::Map<const Eigen::MatrixXd, 0, Eigen::OuterStride<>>;
    const int cols = n_max + 1;
    const int k_rows = static_cast<int>(weights.rows());
    const int n_even = (k_rows + 1) / 2;
    const int n_odd = k_rows / 2;
    const int n_blocks = (cols + kBlock - 1) / kBlock;

    // Rows split by parity of k, columns regrouped as [Re | Im] per block.
    Eigen::MatrixXd even_weights(n_even, 2 * cols);
    Eigen::MatrixXd odd_weights(n_odd, 2 * cols);
    std::vector<std::pair<int, int>> col_reach;
    for (int b = 0; b < n_blocks; ++b) {
        const int m0 = b * kBlock;
        const int mb = std::min(kBlock, cols - m0);
        for (int k = 0; k < k_rows; ++k) {
            auto &dst = k % 2 == 0 ? even_weights : odd_weights;
            dst.row(k / 2).segment(2 * m0, mb) = weights.row(k).segment(m0, mb);
            dst.row(k / 2).segment(2 * m0 + mb, mb) =
                weights.row(k).segment(cols + m0, mb);
        }
        col_reach.push_back(reach_range(m0, m0 + mb - 1,
                                        params.eta + kReachMargin, k_rows));
    }

    const DisplacementTable table(cols, k_rows);
    const double top = std::sqrt(static_cast<double>(std::max(cols, k_rows)));
    Eigen::MatrixXd emission;
    Eigen::MatrixXd amp(kBlock, 2 * kBlock);
    Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(cols, cols);

    const int order = rule.order();
    for (int q = order / 2; q < order; ++q) {
        const double u = rule.nodes[static_cast<std::size_t>(q)];
        const double w = rule.weights[static_cast<std::size_t>(q)] *
                         params.angular.density(u);
        if (u == 0.0) {
            acc.array() += w * (weights.topLeftCorner(cols, cols).array().square() +
                                weights.topRightCorner(cols, cols).array().square());
            continue;
        }
        const double kappa = params.eta * u;
        const double reach = std::abs(kappa) + kReachMargin;
        table.fill(kappa, emission,
                   static_cast<int>(std::ceil(2.0 * reach * top)) + 8);
        const Strided even_cols(emission.data(), cols, n_even,
                                Eigen::OuterStride<>(2 * cols));
        const Strided odd_cols(emission.data() + cols, cols, n_odd,
                               Eigen::OuterStride<>(2 * cols));

        for (int rb = 0; rb < n_blocks; ++rb) {
            const int n0 = rb * kBlock;
            const int nb = std::min(kBlock, cols - n0);
            const auto rows = reach_range(n0, n0 + nb - 1, reach, k_rows);
            for (int cb = 0; cb < n_blocks; ++cb) {
                if (!selected.empty() && !selected[static_cast<std::size_t>(cb)]) {
                    continue;
                }
                const int m0 = cb * kBlock;
                const int mb = std::min(kBlock, cols - m0);
                const int k_first = std::max(rows.first, col_reach[cb].first);
                const int k_last = std::min(rows.second, col_reach[cb].second);
                if (k_first > k_last) {
                    continue;
                }
                auto out = acc.block(n0, m0, nb, mb);
                auto product = amp.topLeftCorner(nb, 2 * mb);
                const int e0 = (k_first + 1) / 2;
                const int e1 = k_last / 2;
                if (e1 >= e0) {
                    product.noalias() =
                        even_cols.block(n0, e0, nb, e1 - e0 + 1) *
                        even_weights.block(e0, 2 * m0, e1 - e0 + 1, 2 * mb);
                    out.array() += 2.0 * w *
                                   (product.leftCols(mb).array().square() +
                                    product.rightCols(mb).array().square());
                }
                const int o0 = k_first / 2;
                const int o1 = (k_last - 1) / 2;
                if (k_last >= 1 && o1 >= o0) {
                    product.noalias() =
                        odd_cols.block(n0, o0, nb, o1 - o0 + 1) *
                        odd_weights.block(o0, 2 * m0, o1 - o0 + 1, 2 * mb);
                    out.array() += 2.0 * w *
                                   (product.leftCols(mb).array().square() +
                                    product.rightCols(mb).array().square());
                }
            }
        }
    }
    return acc;
}

void require_quad_order(int order) {
    if (order < 32) {
        throw std::invalid_argument("quadrature order must be at least 32");
    }
}

} // namespace

PhysicalParams PhysicalParams::make(double eta, double Gamma,
                                    double gamma_ratio, double Omega,
                                    AngularKind angular) {
    PhysicalParams p;
    p.eta = eta;
    p.Gamma = Gamma;
    p.gamma = gamma_ratio * Gamma;
    p.Omega = Omega;
    p.angular.kind = angular;
    p.validate();
    return p;
}

void PhysicalParams::validate() const {
    if (!std::isfinite(eta) || eta < 0.0) {
        throw std::invalid_argument("eta must be finite and non-negative");
    }
    if (!(Gamma > 0.0) || !std::isfinite(Gamma)) {
        throw std::invalid_argument("Gamma must be positive");
    }
    if (!(gamma > 0.0) || !std::isfinite(gamma)) {
        throw std::invalid_argument("gamma must be positive");
    }
    if (gamma > Gamma) {
        throw std::invalid_argument("gamma must not exceed Gamma");
    }
    if (!(Omega > 0.0) || !std::isfinite(Omega)) {
        throw std::invalid_argument("Omega must be positive");
    }
}

int eta_hat_sq(double eta) {
    if (!(eta >= 0.0) || !std::isfinite(eta)) {
        throw std::invalid_argument("eta must be finite and non-negative");
    }
    return static_cast<int>(std::ceil(eta * eta));
}

RateMatrix::RateMatrix(Eigen::MatrixXd generator, double delta, int quad_order,
                       int intermediate_cutoff)
    : generator_(std::move(generator)), delta_(delta), quad_order_(quad_order),
      intermediate_cutoff_(intermediate_cutoff) {}

double RateMatrix::max_outflow() const {
    return generator_.size() == 0 ? 0.0 : (-generator_.diagonal()).maxCoeff();
}

double RateMatrix::max_column_sum() const {
    return generator_.size() == 0
               ? 0.0
               : generator_.colwise().sum().cwiseAbs().maxCoeff();
}

double rate_nm(int n, int m, double delta, const PhysicalParams &params,
               int intermediate_cutoff, int quad_order) {
    params.validate();
    require_quad_order(quad_order);
    if (n < 0 || m < 0 || n > intermediate_cutoff ||
        m > intermediate_cutoff) {
        throw std::invalid_argument("Fock index outside the intermediate basis");
    }
    const Eigen::MatrixXd all =
        excitation_weights(delta, params, intermediate_cutoff, m);
    const int rows = intermediate_cutoff + 1;
    Eigen::MatrixXd weights(rows, 2);
    weights.col(0) = all.col(m);
    weights.col(1) = all.col(m + 1 + m);
    if (!failing_tails(weights, 1, 1e-12).empty()) {
        std::ostringstream msg;
        msg << "intermediate sum for m=" << m << " not converged at cutoff "
            << intermediate_cutoff;
        throw TruncationError(msg.str());
    }

    auto integrate = [&](int order) {
        const GaussLegendre rule = GaussLegendre::make(order);
        double sum = 0.0;
        for (int q = 0; q < order; ++q) {
            const double u = rule.nodes[static_cast<std::size_t>(q)];
            const Eigen::MatrixXd emission =
                reduced_displacement_matrix(-params.eta * u, n + 1, rows);
            const double re = emission.row(n).dot(weights.col(0));
            const double im = emission.row(n).dot(weights.col(1));
            sum += rule.weights[static_cast<std::size_t>(q)] *
                   params.angular.density(u) * (re * re + im * im);
        }
        return sum;
    };

    const double value = integrate(quad_order);
    const double doubled = integrate(2 * quad_order);
    if (std::abs(value - doubled) >
        1e-6 * std::abs(doubled) + kQuadratureAbsFloor) {
        std::ostringstream msg;
        msg << "rate " << n << "<-" << m << " changes from " << value << " to "
            << doubled << " when the quadrature order is doubled";
        throw QuadratureError(msg.str());
    }
    return value;
}

std::vector<double> emptying_rates(int n_last, double delta,
                                   const PhysicalParams &params,
                                   int intermediate_cutoff) {
    params.validate();
    if (n_last < 0 || n_last > intermediate_cutoff) {
        throw std::invalid_argument("Fock index outside the intermediate basis");
    }
    const int rows = intermediate_cutoff + 1;
    const Eigen::MatrixXd b =
        reduced_displacement_matrix(params.eta, rows, n_last + 1);
    const double g2 = params.gamma * params.gamma;
    std::vector<double> out(static_cast<std::size_t>(n_last) + 1, 0.0);
    for (int n = 0; n <= n_last; ++n) {
        double total = 0.0;
        double tail = 0.0;
        for (int k = 0; k < rows; ++k) {
            const double detuning = delta - PhysicalParams::nu * (k - n);
            const double term =
                g2 * b(k, n) * b(k, n) / (detuning * detuning + g2);
            total += term;
            if (k >= rows - kTailTerms) {
                tail = std::max(tail, term);
            }
        }
        if (tail > 1e-12 * total) {
            std::ostringstream msg;
            msg << "emptying rate of level " << n
                << " not converged at intermediate cutoff "
                << intermediate_cutoff;
            throw TruncationError(msg.str());
        }
        out[static_cast<std::size_t>(n)] = total;
    }
    return out;
}

double emptying_rate(int n, double delta, const PhysicalParams &params,
                     int intermediate_cutoff) {
    if (n < 0) {
        throw std::invalid_argument("negative Fock index");
    }
    return emptying_rates(n, delta, params, intermediate_cutoff)
        .at(static_cast<std::size_t>(n));
}

std::vector<double> converged_emptying_rates(int n_last, double delta,
                                             const PhysicalParams &params) {
    int cutoff =
        std::max(recommended_intermediate_cutoff(params.eta, n_last, delta),
                 n_last + static_cast<int>(std::ceil(std::abs(delta))) + 20);
    for (int attempt = 0;; ++attempt) {
        try {
            return emptying_rates(n_last, delta, params, cutoff);
        } catch (const TruncationError &) {
            if (attempt >= 8) {
                throw;
            }
            cutoff = cutoff * 3 / 2 + 8;
        }
    }
}

double emptying_rate_resonant(int n, int k0, const PhysicalParams &params,
                              bool strict_gt) {
    if (n < 0) {
        throw std::invalid_argument("negative Fock index");
    }
    const int target = n - k0;
    if (target < 0 || (strict_gt && target == 0)) {
        return 0.0;
    }
    const double b = reduced_displacement(target, n, params.eta);
    return b * b;
}

RateMatrix build_rate_matrix(double delta, const PhysicalParams &params,
                             int n_max, const RateOptions &options) {
    params.validate();
    if (n_max < 0) {
        throw std::invalid_argument("n_max must be non-negative");
    }
    if (!std::isfinite(delta)) {
        throw std::invalid_argument("detuning must be finite");
    }
    const int order = options.quad_order > 0
                          ? options.quad_order
                          : recommended_quad_order(params.eta, n_max);
    require_quad_order(order);
    const int cols = n_max + 1;

    const bool auto_cutoff = options.intermediate_cutoff <= 0;
    int cutoff = auto_cutoff
                     ? recommended_intermediate_cutoff(params.eta, n_max, delta)
                     : options.intermediate_cutoff;
    if (cutoff < n_max) {
        throw std::invalid_argument("intermediate cutoff below n_max");
    }
    Eigen::MatrixXd weights;
    for (int attempt = 0;; ++attempt) {
        weights = excitation_weights(delta, params, cutoff, n_max);
        const auto bad =
            failing_tails(weights, cols, options.tail_tolerance);
        if (bad.empty()) {
            break;
        }
        if (!auto_cutoff || attempt >= 8) {
            std::ostringstream msg;
            msg << "intermediate sum not converged at cutoff " << cutoff
                << " for " << bad.size() << " levels (first m=" << bad.front()
                << ")";
            throw TruncationError(msg.str());
        }
        cutoff = static_cast<int>(std::ceil(cutoff * 1.1)) + 8;
    }

    Eigen::MatrixXd rates =
        integrate_emission(weights, params, n_max, GaussLegendre::make(order));
    if (options.check_quadrature) {
        // The angular integrand oscillates fastest on the highest levels, so
        // the first and the last two column blocks stand in for the rest.
        const int n_blocks = (cols + kBlock - 1) / kBlock;
        std::vector<bool> selected(static_cast<std::size_t>(n_blocks), false);
        selected.front() = true;
        for (int cb = std::max(0, n_blocks - 2); cb < n_blocks; ++cb) {
            selected[static_cast<std::size_t>(cb)] = true;
        }
        const Eigen::MatrixXd doubled = integrate_emission(
            weights, params, n_max, GaussLegendre::make(2 * order), selected);
        for (int m = 0; m < cols; ++m) {
            if (!selected[static_cast<std::size_t>(m / kBlock)]) {
                continue;
            }
            for (int n = 0; n < cols; ++n) {
                if (n == m) {
                    continue;
                }
                const double a = rates(n, m);
                const double b = doubled(n, m);
                if (std::abs(a - b) > options.quadrature_tolerance *
                                              std::abs(b) +
                                          kQuadratureAbsFloor) {
                    std::ostringstream msg;
                    msg << "rate " << n << "<-" << m << " changes from " << a
                        << " to " << b << " when the quadrature order is "
                        << "doubled from " << order;
                    throw QuadratureError(msg.str());
                }
            }
        }
    }

    rates.diagonal().setZero();
    for (int m = 0; m < cols; ++m) {
        rates(m, m) = -rates.col(m).sum();
    }
    return RateMatrix(std::move(rates), delta, order, cutoff);
}

int recommended_quad_order(double eta, int n_max) {
    const double spread = 2.0 * eta * std::sqrt(static_cast<double>(n_max) + 1.0);
    const int order = static_cast<int>(std::ceil(spread + 32.0));
    return std::max(64, ((order + 7) / 8) * 8);
}

int recommended_intermediate_cutoff(double eta, int n_max, double /*delta*/) {
    // A kick eta moves amplitude by about eta in sqrt(n); the excitation
    // weights of level n_max fall below 1e-12 of their total roughly half a
    // unit past that edge.
    const double reach = std::sqrt(static_cast<double>(n_max)) + eta + 1.0;
    return static_cast<int>(std::ceil(reach * reach)) + 4;
}

int auto_basis_size(int initial_support, double max_abs_delta, double eta) {
    const double base =
        std::max(static_cast<double>(initial_support), std::abs(max_abs_delta));
    return static_cast<int>(std::ceil(base + 4.0 * eta_hat_sq(eta) + 30.0));
}

} // namespace fockcool
