#include "fockcool/displacement.hpp"

#include <cmath>
#include <cstdlib>
#include <stdexcept>
#include <string>

namespace fockcool {

namespace {

constexpr double kRescaleHigh = 1e150;
constexpr double kRescaleLow = 1e-150;
const double kLogRescale = std::log(kRescaleHigh);

// Walks the diagonal {(lo + d, lo)} for lo = 0, 1, ... and hands the magnitude
// part |kappa|^d exp(-x/2) sqrt(lo!/(lo+d)!) L^{(d)}_lo(x) to `emit`.
//
// f_j = sqrt(j!/(j+d)!) L^{(d)}_j(x) obeys
//   sqrt((j+1)(j+1+d)) f_{j+1} = (2j+1+d-x) f_j - sqrt(j(j+d)) f_{j-1},
// which keeps the iterates near unit size once the log-prefactor is split off.
template <typename Emit>
void walk_diagonal(double abs_kappa, int d, int length, Emit &&emit) {
    if (length <= 0) {
        return;
    }
    const double x = abs_kappa * abs_kappa;
    double log_scale = d * std::log(abs_kappa) - 0.5 * x -
                       0.5 * std::lgamma(static_cast<double>(d) + 1.0);
    double scale = std::exp(log_scale);
    double prev = 0.0;
    double cur = 1.0;
    for (int j = 0; j < length; ++j) {
        if (j > 0) {
            const double jm = j - 1;
            const double next =
                ((2.0 * jm + 1.0 + d - x) * cur -
                 std::sqrt(jm * (jm + d)) * prev) /
                std::sqrt((jm + 1.0) * (jm + 1.0 + d));
            prev = cur;
            cur = next;
            const double mag = std::max(std::abs(cur), std::abs(prev));
            if (mag > kRescaleHigh) {
                cur *= kRescaleLow;
                prev *= kRescaleLow;
                log_scale += kLogRescale;
                scale = std::exp(log_scale);
            } else if (mag < kRescaleLow && mag > 0.0) {
                cur *= kRescaleHigh;
                prev *= kRescaleHigh;
                log_scale -= kLogRescale;
                scale = std::exp(log_scale);
            }
        }
        emit(j, cur * scale);
    }
}

// Sign of b(n, m) relative to the magnitude part.
double reduced_sign(int n, int m, double kappa) {
    const int d = std::abs(n - m);
    double sign = 1.0;
    if (kappa < 0.0 && (d % 2) == 1) {
        sign = -sign;
    }
    if (n < m && (d % 2) == 1) {
        sign = -sign;
    }
    return sign;
}

Complex i_power(int p) {
    switch (((p % 4) + 4) % 4) {
    case 0:
        return {1.0, 0.0};
    case 1:
        return {0.0, 1.0};
    case 2:
        return {-1.0, 0.0};
    default:
        return {0.0, -1.0};
    }
}

void require_index(int n, const char *what) {
    if (n < 0) {
        throw std::invalid_argument(std::string("negative Fock index ") + what);
    }
}

} // namespace

KickStrength::KickStrength(double kappa) : kappa_(kappa) {
    if (!std::isfinite(kappa)) {
        throw std::invalid_argument("kick strength must be finite");
    }
}

double reduced_displacement(int n, int m, double kappa) {
    require_index(n, "n");
    require_index(m, "m");
    const int d = std::abs(n - m);
    if (kappa == 0.0) {
        return d == 0 ? 1.0 : 0.0;
    }
    const int lo = std::min(n, m);
    double value = 0.0;
    walk_diagonal(std::abs(kappa), d, lo + 1, [&](int j, double v) {
        if (j == lo) {
            value = v;
        }
    });
    return reduced_sign(n, m, kappa) * value;
}

DisplacementAmplitude displacement_element(int n, int m, KickStrength kappa) {
    const double b = reduced_displacement(n, m, kappa.value());
    return {i_power(n - m) * b, n, m};
}

std::vector<DisplacementAmplitude> displacement_row(int m, KickStrength kappa,
                                                    int n_max) {
    require_index(m, "m");
    if (n_max < m) {
        throw std::invalid_argument("displacement_row requires n_max >= m");
    }
    const Eigen::MatrixXd column =
        reduced_displacement_matrix(kappa.value(), n_max + 1, m + 1);
    std::vector<DisplacementAmplitude> out;
    out.reserve(static_cast<std::size_t>(n_max) + 1);
    for (int n = 0; n <= n_max; ++n) {
        out.push_back({i_power(n - m) * column(n, m), n, m});
    }
    return out;
}

Eigen::MatrixXd reduced_displacement_matrix(double kappa, int rows, int cols) {
    Eigen::MatrixXd out;
    DisplacementTable(rows, cols).fill(kappa, out);
    return out;
}

DisplacementTable::DisplacementTable(int rows, int cols)
    : rows_(rows), cols_(cols) {
    if (rows < 0 || cols < 0) {
        throw std::invalid_argument("negative matrix dimension");
    }
    for (int offset = -(cols - 1); offset < rows; ++offset) {
        Diagonal diag;
        diag.offset = offset;
        const int d = std::abs(offset);
        diag.length = offset >= 0 ? std::min(cols, rows - offset)
                                  : std::min(rows, cols - d);
        if (diag.length <= 0) {
            continue;
        }
        diag.half_log_factorial = 0.5 * std::lgamma(static_cast<double>(d) + 1.0);
        diag.inv_norm.resize(static_cast<std::size_t>(diag.length));
        diag.back.resize(static_cast<std::size_t>(diag.length));
        for (int j = 0; j < diag.length; ++j) {
            const double jj = j;
            diag.inv_norm[static_cast<std::size_t>(j)] =
                1.0 / std::sqrt((jj + 1.0) * (jj + 1.0 + d));
            diag.back[static_cast<std::size_t>(j)] = std::sqrt(jj * (jj + d));
        }
        diagonals_.push_back(std::move(diag));
    }
}

void DisplacementTable::fill(double kappa, Eigen::MatrixXd &out,
                             int max_offset) const {
    if (!std::isfinite(kappa)) {
        throw std::invalid_argument("kick strength must be finite");
    }
    out.setZero(rows_, cols_);
    if (kappa == 0.0) {
        for (int i = 0; i < std::min(rows_, cols_); ++i) {
            out(i, i) = 1.0;
        }
        return;
    }
    const double abs_kappa = std::abs(kappa);
    const double log_kappa = std::log(abs_kappa);
    const double x = abs_kappa * abs_kappa;
    const bool flip_odd = kappa < 0.0;
    for (const Diagonal &diag : diagonals_) {
        const int d = std::abs(diag.offset);
        if (d > max_offset) {
            continue;
        }
        const bool odd = (d % 2) == 1;
        // Lower diagonals flip with kappa < 0; upper ones also carry (-1)^d.
        double sign = 1.0;
        if (odd && (diag.offset >= 0) == flip_odd) {
            sign = -1.0;
        }
        double log_scale = d * log_kappa - 0.5 * x - diag.half_log_factorial;
        double scale = sign * std::exp(log_scale);
        double prev = 0.0;
        double cur = 1.0;
        const double base = 1.0 + d - x;
        const int row0 = diag.offset >= 0 ? diag.offset : 0;
        const int col0 = diag.offset >= 0 ? 0 : d;
        for (int j = 0; j < diag.length; ++j) {
            if (j > 0) {
                const auto jm = static_cast<std::size_t>(j - 1);
                const double next =
                    ((2.0 * (j - 1) + base) * cur - diag.back[jm] * prev) *
                    diag.inv_norm[jm];
                prev = cur;
                cur = next;
                const double mag = std::max(std::abs(cur), std::abs(prev));
                if (mag > kRescaleHigh || (mag < kRescaleLow && mag > 0.0)) {
                    const bool high = mag > kRescaleHigh;
                    const double f = high ? kRescaleLow : kRescaleHigh;
                    cur *= f;
                    prev *= f;
                    log_scale += high ? kLogRescale : -kLogRescale;
                    scale = sign * std::exp(log_scale);
                }
            }
            out(row0 + j, col0 + j) = cur * scale;
        }
    }
}

int kick_padding(double kappa) {
    const double a = std::abs(kappa);
    return static_cast<int>(std::ceil(6.0 * a * a + 10.0 * a + 20.0));
}

} // namespace fockcool
