#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "lavgap/quadrature.hpp"

using namespace lavgap;

TEST_CASE("adaptive Gauss-Kronrod on smooth integrands") {
    CHECK(adaptive_integrate([](double x) { return x * x; }, 0.0, 1.0) ==
          Catch::Approx(1.0 / 3.0).epsilon(1e-13));
    CHECK(adaptive_integrate([](double x) { return std::sin(x); }, 0.0, pi) ==
          Catch::Approx(2.0).epsilon(1e-12));
    CHECK(adaptive_integrate([](double) { return 1.0; }, 2.0, 2.0) == 0.0);
}

TEST_CASE("Gauss-Legendre rule integrates polynomials exactly") {
    GaussLegendre gl(8);
    // degree 15 is exact for an 8-point rule
    CHECK(gl.integrate([](double x) { return std::pow(x, 15); }, 0.0, 1.0) ==
          Catch::Approx(1.0 / 16.0).epsilon(1e-13));
    CHECK(gl.integrate([](double x) { return 3 * x * x - x; }, -1.0, 2.0) ==
          Catch::Approx(7.5).epsilon(1e-13));
}

TEST_CASE("power-singular integrals via substitution") {
    const PowerSingularity s0{0.0, -0.5};
    // closed antiderivative 2*sqrt(t) as oracle
    CHECK(integrate_power_singular([](double t) { return 1.0 / std::sqrt(t); }, 0.0, 1.0,
                                   std::span(&s0, 1), 1e-10) ==
          Catch::Approx(2.0).epsilon(1e-9));

    const PowerSingularity s1{0.0, -2.0 / 3.0};
    CHECK(integrate_power_singular([](double t) { return std::pow(t, -2.0 / 3.0); }, 0.0,
                                   1.0, std::span(&s1, 1), 1e-10) ==
          Catch::Approx(3.0).epsilon(1e-9));

    // interior singularity at 1/2, exponent -1/3 from both sides:
    // integral of |t - 1/2|^{-1/3} over (0,1) = 2 * (3/2) * (1/2)^{2/3}
    const PowerSingularity si{0.5, -1.0 / 3.0};
    const double oracle = 3.0 * std::pow(0.5, 2.0 / 3.0);
    CHECK(integrate_power_singular(
              [](double t) { return std::pow(std::abs(t - 0.5), -1.0 / 3.0); }, 0.0, 1.0,
              std::span(&si, 1), 1e-10) == Catch::Approx(oracle).epsilon(1e-9));

    const PowerSingularity bad{0.0, -1.0};
    CHECK_THROWS_AS(integrate_power_singular([](double t) { return 1.0 / t; }, 0.0, 1.0,
                                             std::span(&bad, 1), 1e-8),
                    divergence_error);
}

TEST_CASE("product-Gauss variant agrees with the adaptive scheme") {
    const PowerSingularity s{0.0, -0.5};
    const double a =
        integrate_power_singular([](double t) { return std::cos(t) / std::sqrt(t); }, 0.0,
                                 1.0, std::span(&s, 1), 1e-10);
    const double g = integrate_power_singular_gauss(
        [](double t) { return std::cos(t) / std::sqrt(t); }, 0.0, 1.0, std::span(&s, 1), 64);
    CHECK(a == Catch::Approx(g).epsilon(1e-9));
}

TEST_CASE("spherical quadrature in the plane") {
    // Jacobian-only integrand: the disk area in polar form.
    auto area = spherical_quadrature(
        2, [](double rho, std::span<const double>) { return rho; }, 1.0, {}, 1e-6);
    CHECK(area.converged);
    CHECK(area.value == Catch::Approx(pi).epsilon(1e-8));

    // rho^{-1/2} over the rectangle (0,1) x (0,2pi): oracle 2 * 2pi.
    auto singular = spherical_quadrature(
        2, [](double rho, std::span<const double>) { return 1.0 / std::sqrt(rho); }, -0.5,
        {}, 1e-6);
    CHECK(singular.converged);
    CHECK(singular.value == Catch::Approx(4.0 * pi).margin(1e-6));

    CHECK_THROWS_AS(spherical_quadrature(
                        2, [](double rho, std::span<const double>) { return 1.0 / rho; },
                        -1.0, {}, 1e-6),
                    divergence_error);
}

TEST_CASE("spherical quadrature of the 3-ball volume") {
    auto vol = spherical_quadrature(
        3,
        [](double rho, std::span<const double> ang) {
            return rho * rho * std::sin(ang[1]);
        },
        2.0, {}, 1e-7);
    CHECK(vol.converged);
    CHECK(vol.value == Catch::Approx(4.0 * pi / 3.0).epsilon(1e-7));
}

TEST_CASE("angular power singularities are handled") {
    // integrand |cos(2 theta)|^{-1/3} * rho over the quarter-plane sector
    // theta in (pi/4, 3pi/4); 1D oracle via substitution t = 2 theta - pi/2:
    // integral = (1/2) int_0^pi |sin t|^{-1/3} dt * int_0^1 rho drho.
    const double oracle_angular =
        adaptive_integrate([](double t) { return std::pow(std::sin(t), -1.0 / 3.0); },
                           1e-12, pi - 1e-12, 1e-9);
    std::vector<PowerSingularity> sing{{pi / 4, -1.0 / 3.0}, {3 * pi / 4, -1.0 / 3.0}};
    auto g = [&](double th) { return std::pow(std::abs(std::cos(2 * th)), -1.0 / 3.0); };
    const double val = integrate_power_singular(g, pi / 4, 3 * pi / 4,
                                                std::span(sing.data(), sing.size()), 1e-9);
    CHECK(val == Catch::Approx(0.5 * oracle_angular).epsilon(1e-6));
}
