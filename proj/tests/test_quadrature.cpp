#include <doctest.h>

#include <array>
#include <cmath>
#include <numbers>

#include "cfmob/quadrature.hpp"

using namespace cfmob;

TEST_CASE("adaptive Simpson integrates smooth functions") {
    const auto r = quad::adaptive_simpson([](double x) { return std::sin(x); }, 0.0, std::numbers::pi, {.abs_tol = 1e-12});
    CHECK(r.converged);
    CHECK(r.value == doctest::Approx(2.0).epsilon(1e-11));

    const auto g = quad::adaptive_simpson([](double x) { return std::exp(-x * x); }, -6.0, 6.0, {.abs_tol = 1e-12});
    CHECK(g.value == doctest::Approx(std::sqrt(std::numbers::pi)).epsilon(1e-11));
}

TEST_CASE("split integration handles a kink on a breakpoint") {
    auto f = [](double x) { return std::abs(x - 0.3); };
    const std::array<double, 1> brk{0.3};
    const auto r = quad::adaptive_simpson_split(f, 0.0, 1.0, brk, {.abs_tol = 1e-12});
    CHECK(r.converged);
    CHECK(r.value == doctest::Approx(0.5 * 0.09 + 0.5 * 0.49).epsilon(1e-13));
}

TEST_CASE("depth exhaustion is reported, not hidden") {
    auto f = [](double x) { return x > 0.0 ? 1.0 / std::sqrt(x) : 0.0; };
    const auto r = quad::adaptive_simpson(f, 0.0, 1.0, {.abs_tol = 1e-14, .max_depth = 4});
    CHECK_FALSE(r.converged);
}

TEST_CASE("zero-width interval") {
    const auto r = quad::adaptive_simpson([](double) { return 1.0; }, 2.0, 2.0);
    CHECK(r.value == 0.0);
}
