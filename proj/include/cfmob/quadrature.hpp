#pragma once

#include <cmath>
#include <functional>
#include <span>

namespace cfmob::quad {

struct Options {
    double abs_tol = 1e-9;
    int max_depth = 48;
};

struct Result {
    double value = 0.0;
    double error = 0.0;  // accumulated |S2 - S1| / 15 estimate
    bool converged = true;
};

// Adaptive Simpson on [a, b]. Never throws; callers decide what a
// non-converged result means.
Result adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                        const Options& opt = {});

// Same, integrating piecewise between sorted breakpoints so kinks of the
// integrand sit on panel edges. Breakpoints outside (a, b) are ignored.
Result adaptive_simpson_split(const std::function<double(double)>& f, double a, double b,
                              std::span<const double> breaks, const Options& opt = {});

}  // namespace cfmob::quad
