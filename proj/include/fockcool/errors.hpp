#ifndef FOCKCOOL_ERRORS_HPP
#define FOCKCOOL_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace fockcool {

/// The intermediate Fock sum was cut off while its terms were still significant.
class TruncationError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// The angular integral did not converge under quadrature-order doubling.
class QuadratureError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Population leaked into the top of the truncated Fock basis.
class TailMassError : public std::runtime_error {
  public:
    TailMassError(const std::string &what, int cycle, double tail_mass)
        : std::runtime_error(what), cycle_(cycle), tail_mass_(tail_mass) {}

    int cycle() const { return cycle_; }
    double tail_mass() const { return tail_mass_; }

  private:
    int cycle_;
    double tail_mass_;
};

/// No blue detuning in the scanned range satisfies the emptying-rate floor.
class NoFeasibleDetuning : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Divergence of a series expansion (uniformization).
class ConvergenceError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

} // namespace fockcool

#endif
