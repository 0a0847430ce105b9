#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "fockcool/displacement.hpp"
#include "oracle.hpp"

using namespace fockcool;

namespace {

double norm_sq(const std::vector<DisplacementAmplitude> &row) {
    double s = 0.0;
    for (const auto &a : row) {
        s += std::norm(a.value);
    }
    return s;
}

} // namespace

TEST_CASE("kick strength rejects non-finite values") {
    CHECK_THROWS_AS(KickStrength(std::nan("")), std::invalid_argument);
    CHECK_THROWS_AS(KickStrength{INFINITY}, std::invalid_argument);
    CHECK(KickStrength(-2.5).value() == -2.5);
}

TEST_CASE("elements at small indices") {
    CHECK(displacement_element(0, 0, KickStrength(0.0)).value == Complex(1.0, 0.0));
    CHECK(std::abs(displacement_element(3, 1, KickStrength(0.0)).value) == 0.0);

    const auto a00 = displacement_element(0, 0, KickStrength(1.0));
    CHECK(a00.value.real() == doctest::Approx(std::exp(-0.5)).epsilon(1e-14));
    CHECK(std::abs(a00.value.imag()) < 1e-16);

    // <1|..|0> = i kappa e^{-kappa^2/2}.
    const auto a10 = displacement_element(1, 0, KickStrength(1.0));
    CHECK(std::abs(a10.value.real()) < 1e-16);
    CHECK(a10.value.imag() == doctest::Approx(std::exp(-0.5)).epsilon(1e-14));
    CHECK(a10.n == 1);
    CHECK(a10.m == 0);

    // <2|..|0> = (i kappa)^2 / sqrt(2) e^{-kappa^2/2} at kappa = 0.7.
    const double k = 0.7;
    const auto a20 = displacement_element(2, 0, KickStrength(k));
    CHECK(a20.value.real() ==
          doctest::Approx(-k * k / std::sqrt(2.0) * std::exp(-k * k / 2)).epsilon(1e-14));
}

TEST_CASE("element is symmetric in n and m") {
    for (double k : {-3.0, 0.4, 2.0, 5.0}) {
        for (int n = 0; n < 30; n += 3) {
            for (int m = 0; m < 30; m += 4) {
                const auto a = displacement_element(n, m, KickStrength(k)).value;
                const auto b = displacement_element(m, n, KickStrength(k)).value;
                CHECK(std::abs(a - b) <= 1e-14 * (1.0 + std::abs(a)));
            }
        }
    }
}

TEST_CASE("reduced element changes sign with kappa by (-1)^(n-k)") {
    for (int n = 0; n < 25; ++n) {
        for (int k = 0; k < 25; ++k) {
            const double plus = reduced_displacement(n, k, 2.3);
            const double minus = reduced_displacement(n, k, -2.3);
            const double sign = (n - k) % 2 == 0 ? 1.0 : -1.0;
            CHECK(minus == doctest::Approx(sign * plus).epsilon(1e-13));
        }
    }
}

TEST_CASE("reduced element carries the full phase") {
    for (int n = 0; n < 20; ++n) {
        for (int m = 0; m < 20; ++m) {
            const Complex phase = std::pow(Complex(0.0, 1.0), n - m);
            const Complex full = displacement_element(n, m, KickStrength(1.7)).value;
            CHECK(std::abs(full - phase * reduced_displacement(n, m, 1.7)) < 1e-14);
        }
    }
}

TEST_CASE("row examples") {
    const auto row = displacement_row(0, KickStrength(0.0), 5);
    REQUIRE(row.size() == 6);
    CHECK(row[0].value == Complex(1.0, 0.0));
    for (int n = 1; n <= 5; ++n) {
        CHECK(std::abs(row[n].value) == 0.0);
    }
    CHECK(norm_sq(displacement_row(0, KickStrength(1.0), 40)) ==
          doctest::Approx(1.0).epsilon(1e-10));
    CHECK_THROWS_AS(displacement_row(10, KickStrength(1.0), 5), std::invalid_argument);
}

TEST_CASE("row matches the oracle at m=10, kappa=5") {
    const auto row = displacement_row(10, KickStrength(5.0), 200);
    const auto d = oracle::oracle_displacement_matrix(5.0, 200, kick_padding(5.0));
    double worst = 0.0;
    for (int n = 0; n <= 200; ++n) {
        worst = std::max(worst, std::abs(row[n].value - d(n, 10)));
    }
    CHECK(worst <= 1e-8);
}

TEST_CASE("oracle examples") {
    const auto small = oracle::oracle_displacement_matrix(1.0, 40, 60);
    CHECK(std::abs(small(0, 0)) == doctest::Approx(std::exp(-0.5)).epsilon(1e-12));
    CHECK(std::abs(small(1, 0)) == doctest::Approx(std::exp(-0.5)).epsilon(1e-12));

    // Padding 200 is below ceil(6*25 + 50 + 20) = 220.
    CHECK_THROWS_AS(oracle::oracle_displacement_matrix(5.0, 120, 200),
                    std::invalid_argument);
    const auto d = oracle::oracle_displacement_matrix(5.0, 120, 220);
    double worst = 0.0;
    for (int n = 0; n <= 120; ++n) {
        for (int m = 0; m <= 120; ++m) {
            worst = std::max(worst, std::abs(displacement_element(n, m, KickStrength(5.0)).value -
                                             d(n, m)));
        }
    }
    CHECK(worst <= 1e-8);
}

TEST_CASE("padding formula") {
    CHECK(kick_padding(0.0) == 20);
    CHECK(kick_padding(1.0) == 36);
    CHECK(kick_padding(5.0) == 220);
    CHECK(kick_padding(-5.0) == 220);
    CHECK(kick_padding(0.3) == 24);
}

TEST_CASE("large indices stay finite and unitary") {
    const double k = 3.0;
    const int m = 300;
    // The padding rule is sized for small m; the row spreads like kappa sqrt(m).
    const auto row = displacement_row(m, KickStrength(k), m + 3 * kick_padding(k));
    for (const auto &a : row) {
        REQUIRE(std::isfinite(a.value.real()));
        REQUIRE(std::isfinite(a.value.imag()));
    }
    CHECK(norm_sq(row) == doctest::Approx(1.0).epsilon(1e-8));

    const double far = reduced_displacement(900, 880, 4.0);
    CHECK(std::isfinite(far));
    CHECK(std::abs(far) < 1.0);
}

TEST_CASE("dense table agrees with single elements") {
    const DisplacementTable table(40, 55);
    Eigen::MatrixXd out;
    for (double k : {-4.0, -0.5, 0.0, 1.3, 3.0}) {
        table.fill(k, out);
        REQUIRE(out.rows() == 40);
        REQUIRE(out.cols() == 55);
        const Eigen::MatrixXd direct = reduced_displacement_matrix(k, 40, 55);
        for (int n = 0; n < 40; ++n) {
            for (int c = 0; c < 55; ++c) {
                const double single = reduced_displacement(n, c, k);
                CAPTURE(n);
                CAPTURE(c);
                CHECK(std::abs(out(n, c) - single) <= 1e-12 * std::abs(single) + 1e-14);
                CHECK(direct(n, c) == out(n, c));
            }
        }
    }
}

TEST_CASE("dense table leaves far diagonals empty when asked") {
    const DisplacementTable table(20, 20);
    Eigen::MatrixXd out;
    table.fill(2.0, out, 3);
    for (int n = 0; n < 20; ++n) {
        for (int c = 0; c < 20; ++c) {
            if (std::abs(n - c) > 3) {
                CHECK(out(n, c) == 0.0);
            } else {
                CHECK(out(n, c) == doctest::Approx(reduced_displacement(n, c, 2.0)));
            }
        }
    }
}
