#pragma once

// Random-waypoint trajectories: straight moving periods with a fixed speed,
// uniform heading and Rayleigh-distributed length, no pause between periods.

#include <cstdint>
#include <vector>

#include "cfmob/geometry.hpp"

namespace cfmob {

struct Segment {
    Point start;
    double heading = 0.0;  // radians
    double length = 0.0;   // km

    Point end() const;
    Point at(double s) const;  // point at arc length s from start
};

struct Trajectory {
    std::vector<Segment> segments;
    double speed = 0.0;  // m/s

    double total_length() const;  // km
    double total_time() const;    // s; zero when speed is zero
};

// Segments whose end would leave `window` are redrawn. Throws ConfigError if
// fewer than 1% of draws are accepted (window too small for rayleigh_scale).
Trajectory generate_trajectory(double speed, int n_segments, double rayleigh_scale,
                               const Rect& window, std::uint64_t seed);

}  // namespace cfmob
