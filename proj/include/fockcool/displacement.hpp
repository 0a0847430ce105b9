#ifndef FOCKCOOL_DISPLACEMENT_HPP
#define FOCKCOOL_DISPLACEMENT_HPP

// Matrix elements of the momentum-kick operator exp(i kappa (a + a^dagger))
// in the harmonic-oscillator Fock basis.
//
// With d = |n - m| and n_< = min(n, m) the element is
//
//   <n| exp(i kappa (a + a^dagger)) |m>
//       = exp(-kappa^2/2) (i kappa)^d sqrt(n_<! / n_>!) L^{(d)}_{n_<}(kappa^2).
//
// The Laguerre factor is generated by a normalized ascending recurrence that
// carries sqrt(j!/(j+d)!) along, with an explicit log-scale so that neither
// the factorials nor the polynomial overflow for indices in the hundreds.

#include <complex>
#include <limits>
#include <vector>

#include <Eigen/Dense>

namespace fockcool {

using Complex = std::complex<double>;

/// Dimensionless momentum kick; kappa = eta for absorption along the laser,
/// kappa = -eta * u for emission at direction cosine u.
class KickStrength {
  public:
    explicit KickStrength(double kappa);

    double value() const { return kappa_; }

  private:
    double kappa_;
};

struct DisplacementAmplitude {
    Complex value;
    int n = 0;
    int m = 0;
};

/// <n| exp(i kappa (a + a^dagger)) |m>.
DisplacementAmplitude displacement_element(int n, int m, KickStrength kappa);

/// All elements <n|...|m> for n = 0..n_max.
std::vector<DisplacementAmplitude> displacement_row(int m, KickStrength kappa,
                                                    int n_max);

/// Real part b(n,m) of the factorization <n|...|m> = i^(n-m) b(n,m).
///
/// Every product of kick operators that appears in the rate sums carries the
/// phase i^(n-m) through the intermediate index, so the rate code works with
/// b alone.
double reduced_displacement(int n, int m, double kappa);

/// Dense block b(n, k) for 0 <= n < rows, 0 <= k < cols. Elements are exact
/// (no basis truncation); cost is O(rows * cols).
Eigen::MatrixXd reduced_displacement_matrix(double kappa, int rows, int cols);

/// Precomputed recurrence coefficients for repeatedly filling the dense
/// block b(n, k), 0 <= n < rows, 0 <= k < cols, at varying kappa.
class DisplacementTable {
  public:
    DisplacementTable(int rows, int cols);

    int rows() const { return rows_; }
    int cols() const { return cols_; }

    /// Same result as reduced_displacement_matrix(kappa, rows, cols).
    /// Diagonals with |n - k| > max_offset are left at zero.
    void fill(double kappa, Eigen::MatrixXd &out,
              int max_offset = std::numeric_limits<int>::max()) const;

  private:
    struct Diagonal {
        int offset = 0; // n - k
        int length = 0;
        double half_log_factorial = 0.0; // 0.5 lgamma(|d| + 1)
        std::vector<double> inv_norm;    // 1 / sqrt((j+1)(j+1+d))
        std::vector<double> back;        // sqrt(j (j+d))
    };
    int rows_;
    int cols_;
    std::vector<Diagonal> diagonals_;
};

/// Extra basis states needed beyond a Fock index before the kick spreads
/// out of reach: ceil(6 kappa^2 + 10 |kappa| + 20).
int kick_padding(double kappa);

} // namespace fockcool

#endif
