#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "blowlab/heat_kernel.hpp"
#include "blowlab/quadrature.hpp"

using namespace blowlab;

namespace {

// Oracle: the kernel formula evaluated in extended precision.
long double kernel_oracle(long double r2, long double t, int d) {
    const long double pi_l = 3.14159265358979323846264338327950288L;
    return powl(4.0L * pi_l * t, -0.5L * d) * expl(-r2 / (4.0L * t));
}

// Oracle: Gaussian-Gaussian convolution identity, K(t) * (c e^{-k|x|^2})
// = c (1 + 4kt)^{-d/2} e^{-k|x|^2/(1+4kt)}.
double gaussian_conv_oracle(double c, double k, double t, double r2, int d) {
    const double spread = 1.0 + 4.0 * k * t;
    return c * std::pow(spread, -0.5 * d) * std::exp(-k * r2 / spread);
}

} // namespace

TEST_CASE("heat kernel point values") {
    CHECK(heat_kernel_value({0.0, 0.0, 1.0, 1}) ==
          Catch::Approx(1.0 / std::sqrt(4.0 * kPi)).epsilon(1e-15));
    const double v = heat_kernel_value({2.0, 0.0, 0.5, 1});
    CHECK(v == Catch::Approx(static_cast<double>(kernel_oracle(4.0L, 0.5L, 1))).epsilon(1e-14));
    CHECK(heat_kernel_value({0.3, -0.4, 0.25, 2}) ==
          Catch::Approx(static_cast<double>(kernel_oracle(0.25L, 0.25L, 2))).epsilon(1e-14));
    CHECK(heat_kernel_value({100.0, 0.0, 1.0, 1}) >= 0.0);
}

TEST_CASE("heat kernel rejects bad queries") {
    CHECK_THROWS_AS(heat_kernel_value({0.0, 0.0, 0.0, 1}), std::domain_error);
    CHECK_THROWS_AS(heat_kernel_value({0.0, 0.0, -1.0, 1}), std::domain_error);
    CHECK_THROWS_AS(heat_kernel_value({0.0, 0.0, 1.0, 3}), std::domain_error);
}

TEST_CASE("kernel mass is one in d=1 and d=2") {
    for (double t : {0.1, 1.0, 10.0}) {
        const double radius = 6.0 * std::sqrt(2.0 * t);
        const double mass1 = trapezoid(
            [&](double x) { return heat_kernel_value({x, 0.0, t, 1}); }, -radius, radius, 4001);
        CHECK(std::fabs(mass1 - 1.0) < 1e-6);
        const double mass2 = trapezoid_2d(
            [&](double x, double y) { return heat_kernel_value({x, y, t, 2}); }, -radius, radius,
            -radius, radius, 801);
        CHECK(std::fabs(mass2 - 1.0) < 1e-6);
    }
}

TEST_CASE("kernel semigroup property at sampled points") {
    const double s = 0.4;
    const double t = 0.7;
    for (double x : {0.0, 0.8, -1.5}) {
        const double radius = 6.0 * std::sqrt(2.0 * (s + t)) + std::fabs(x);
        const double composed = trapezoid(
            [&](double y) {
                return heat_kernel_value({x - y, 0.0, s, 1}) * heat_kernel_value({y, 0.0, t, 1});
            },
            -radius, radius, 8001);
        CHECK(composed == Catch::Approx(heat_kernel_value({x, 0.0, s + t, 1})).epsilon(1e-8));
    }
}

TEST_CASE("convolution of constant data returns the constant") {
    const auto u0 = InitialDatum::constant(2.0);
    CHECK(convolve_initial(u0, 1.0, {0.0, 0.0, 1.0, 1}) == Catch::Approx(2.0).epsilon(1e-8));
    CHECK(convolve_initial(u0, 0.3, {1.0, -0.5, 0.3, 2}, {501, 0.0}) ==
          Catch::Approx(2.0).epsilon(1e-6));
}

TEST_CASE("convolution of a gaussian bump matches the closed form") {
    const auto u0 = InitialDatum::gaussian_bump(1.0, 1.0);
    CHECK(convolve_initial(u0, 1.0, {0.0, 0.0, 1.0, 1}) ==
          Catch::Approx(1.0 / std::sqrt(5.0)).epsilon(1e-12));
    for (double x : {0.0, 0.7, 2.0}) {
        for (double t : {0.2, 1.0}) {
            CHECK(convolve_initial(u0, t, {x, 0.0, t, 1}) ==
                  Catch::Approx(gaussian_conv_oracle(1.0, 1.0, t, x * x, 1)).epsilon(1e-10));
        }
    }
    const auto wide = InitialDatum::gaussian_bump(3.0, 0.25);
    CHECK(convolve_initial(wide, 0.5, {0.4, -0.3, 0.5, 2}, {801, 0.0}) ==
          Catch::Approx(gaussian_conv_oracle(3.0, 0.25, 0.5, 0.25, 2)).epsilon(1e-8));
}

TEST_CASE("convolution of zero data is zero") {
    const auto u0 = InitialDatum::constant(0.0);
    CHECK(convolve_initial(u0, 1.0, {0.3, 0.0, 1.0, 1}) == 0.0);
}

TEST_CASE("convolution is monotone in the initial datum") {
    const auto big = InitialDatum::gaussian_bump(2.0, 1.0);
    const auto small = InitialDatum::gaussian_bump(1.0, 2.0);  // dominated pointwise
    for (double x : {0.0, 1.0, 3.0}) {
        for (double t : {0.1, 1.0}) {
            CHECK(convolve_initial(big, t, {x, 0.0, t, 1}) >=
                  convolve_initial(small, t, {x, 0.0, t, 1}));
        }
    }
}

TEST_CASE("offset_A is exactly the negated convolution") {
    const auto u0 = InitialDatum::gaussian_bump(1.3, 0.8);
    for (double x : {0.0, -0.4, 1.1}) {
        const KernelQuery q{x, 0.0, 0.7, 1};
        CHECK(offset_A(u0, 0.7, q) == -convolve_initial(u0, 0.7, q));
    }
    CHECK(offset_A(InitialDatum::constant(0.0), 1.0, {0.0, 0.0, 1.0, 1}) == 0.0);
    CHECK(offset_A(InitialDatum::constant(2.0), 1.0, {0.0, 0.0, 1.0, 1}) ==
          Catch::Approx(-2.0).epsilon(1e-8));
}

TEST_CASE("indicator ball convolution stays within bounds") {
    const auto u0 = InitialDatum::indicator_ball(1.5, 1.0);
    const double v = convolve_initial(u0, 0.5, {0.0, 0.0, 0.5, 1});
    CHECK(v > 0.0);
    CHECK(v <= 1.5 + 1e-12);
    // oracle: c * (Phi-type mass of the kernel over the ball)
    const double expected =
        1.5 * 0.5 * (std::erf(1.0 / (2.0 * std::sqrt(0.5))) - std::erf(-1.0 / (2.0 * std::sqrt(0.5))));
    CHECK(v == Catch::Approx(expected).epsilon(1e-6));
}

TEST_CASE("tabulated data interpolates linearly and respects truncation") {
    const auto u0 = InitialDatum::tabulated({-1.0, 0.0, 1.0}, {0.0, 2.0, 0.0});
    CHECK(u0.eval1d(0.5) == Catch::Approx(1.0));
    CHECK(u0.eval1d(-0.25) == Catch::Approx(1.5));
    CHECK(u0.eval1d(3.0) == 0.0);
    // hat function mass is 2; for large t the convolution at 0 approaches
    // mass * K(0, t)
    const double t = 40.0;
    CHECK(convolve_initial(u0, t, {0.0, 0.0, t, 1}, {20001, 0.0}) ==
          Catch::Approx(2.0 * heat_kernel_value({0.0, 0.0, t, 1})).epsilon(1e-3));
    CHECK_THROWS_AS(convolve_initial(u0, 1e-4, {0.0, 0.0, 1e-4, 1}, {101, 0.5}),
                    std::runtime_error);
}

TEST_CASE("initial datum invariants are enforced") {
    CHECK_THROWS_AS(InitialDatum::gaussian_bump(-1.0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(InitialDatum::gaussian_bump(1.0, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(InitialDatum::indicator_ball(1.0, -2.0), std::invalid_argument);
    CHECK_THROWS_AS(InitialDatum::tabulated({0.0, 1.0}, {1.0}), std::invalid_argument);
    CHECK_THROWS_AS(InitialDatum::tabulated({1.0, 0.0}, {1.0, 1.0}), std::invalid_argument);
    const double nan = std::nan("");
    CHECK_THROWS_AS(InitialDatum::tabulated({0.0, 1.0}, {nan, 1.0}), std::invalid_argument);
}
