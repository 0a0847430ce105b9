#ifndef FOCKCOOL_ANGULAR_HPP
#define FOCKCOOL_ANGULAR_HPP

#include <string>
#include <string_view>
#include <vector>

namespace fockcool {

enum class AngularKind { dipole, isotropic };

/// Distribution N(u) of the direction cosine u of a spontaneously emitted
/// photon relative to the trap axis. Normalized on [-1, 1].
struct AngularDistribution {
    AngularKind kind = AngularKind::dipole;

    double density(double u) const;
};

double angular_density(const AngularDistribution &dist, double u);

std::string to_string(AngularKind kind);
AngularKind parse_angular_kind(std::string_view text);

/// Gauss-Legendre rule on [-1, 1].
struct GaussLegendre {
    std::vector<double> nodes;
    std::vector<double> weights;

    static GaussLegendre make(int order);

    int order() const { return static_cast<int>(nodes.size()); }
};

} // namespace fockcool

#endif
