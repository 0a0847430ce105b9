#include "fockcool/angular.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace fockcool {

double AngularDistribution::density(double u) const {
    if (!(u >= -1.0 && u <= 1.0)) {
        throw std::domain_error("direction cosine outside [-1, 1]: " +
                                std::to_string(u));
    }
    switch (kind) {
    case AngularKind::dipole:
        return 0.375 * (1.0 + u * u);
    case AngularKind::isotropic:
        return 0.5;
    }
    return 0.0;
}

double angular_density(const AngularDistribution &dist, double u) {
    return dist.density(u);
}

std::string to_string(AngularKind kind) {
    return kind == AngularKind::dipole ? "dipole" : "isotropic";
}

AngularKind parse_angular_kind(std::string_view text) {
    if (text == "dipole") {
        return AngularKind::dipole;
    }
    if (text == "isotropic") {
        return AngularKind::isotropic;
    }
    throw std::invalid_argument("unknown angular distribution '" +
                                std::string(text) + "'");
}

GaussLegendre GaussLegendre::make(int order) {
    if (order < 1) {
        throw std::invalid_argument("quadrature order must be positive");
    }
    GaussLegendre rule;
    rule.nodes.resize(static_cast<std::size_t>(order));
    rule.weights.resize(static_cast<std::size_t>(order));
    const int half = (order + 1) / 2;
    for (int i = 0; i < half; ++i) {
        // Tricomi initial guess, then Newton on P_order.
        double x = std::cos(std::numbers::pi * (i + 0.75) / (order + 0.5));
        double dp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0;
            double p1 = x;
            for (int k = 2; k <= order; ++k) {
                const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = order * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) {
                break;
            }
        }
        // Recompute the derivative at the converged root.
        double p0 = 1.0;
        double p1 = x;
        for (int k = 2; k <= order; ++k) {
            const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
            p0 = p1;
            p1 = p2;
        }
        dp = order * (x * p1 - p0) / (x * x - 1.0);
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        const auto lo = static_cast<std::size_t>(i);
        const auto hi = static_cast<std::size_t>(order - 1 - i);
        rule.nodes[lo] = -x;
        rule.nodes[hi] = x;
        rule.weights[lo] = w;
        rule.weights[hi] = w;
    }
    if (order % 2 == 1) {
        rule.nodes[static_cast<std::size_t>(order / 2)] = 0.0;
    }
    return rule;
}

} // namespace fockcool
