#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "fockcool/angular.hpp"

using namespace fockcool;

TEST_CASE("angular densities are normalized") {
    const auto rule = GaussLegendre::make(16);
    for (auto kind : {AngularKind::dipole, AngularKind::isotropic}) {
        AngularDistribution dist{kind};
        double total = 0.0;
        for (int q = 0; q < rule.order(); ++q) {
            total += rule.weights[q] * dist.density(rule.nodes[q]);
        }
        CHECK(total == doctest::Approx(1.0).epsilon(1e-14));
    }
    CHECK(AngularDistribution{AngularKind::dipole}.density(0.0) == 0.375);
    CHECK(AngularDistribution{AngularKind::dipole}.density(1.0) == 0.75);
    CHECK(AngularDistribution{AngularKind::isotropic}.density(-0.3) == 0.5);
    CHECK(angular_density(AngularDistribution{}, 0.5) == doctest::Approx(0.375 * 1.25));
}

TEST_CASE("angular density rejects directions outside [-1, 1]") {
    CHECK_THROWS_AS(AngularDistribution{}.density(1.5), std::domain_error);
    CHECK_THROWS_AS(AngularDistribution{}.density(-1.0001), std::domain_error);
}

TEST_CASE("angular names round-trip") {
    for (auto kind : {AngularKind::dipole, AngularKind::isotropic}) {
        CHECK(parse_angular_kind(to_string(kind)) == kind);
    }
    CHECK_THROWS_AS(parse_angular_kind("quadrupole"), std::invalid_argument);
}

TEST_CASE("Gauss-Legendre integrates polynomials of degree 2n-1 exactly") {
    for (int order : {2, 5, 32, 64, 257}) {
        const auto rule = GaussLegendre::make(order);
        REQUIRE(rule.order() == order);
        for (int degree : {0, 2, 2 * order - 2}) {
            double sum = 0.0;
            for (int q = 0; q < order; ++q) {
                sum += rule.weights[q] * std::pow(rule.nodes[q], degree);
            }
            CHECK(sum == doctest::Approx(2.0 / (degree + 1)).epsilon(1e-12));
        }
        for (int q = 0; q < order; ++q) {
            CHECK(rule.nodes[q] == doctest::Approx(-rule.nodes[order - 1 - q]).epsilon(1e-15));
        }
    }
    CHECK_THROWS(GaussLegendre::make(0));
}
