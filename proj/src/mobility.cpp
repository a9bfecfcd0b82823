#include "cfmob/mobility.hpp"

#include <cmath>
#include <numbers>
#include <random>

#include "cfmob/error.hpp"

namespace cfmob {

Point Segment::end() const { return at(length); }

Point Segment::at(double s) const {
    return {start.x + s * std::cos(heading), start.y + s * std::sin(heading)};
}

double Trajectory::total_length() const {
    double sum = 0.0;
    for (const auto& s : segments) sum += s.length;
    return sum;
}

double Trajectory::total_time() const {
    if (speed <= 0.0) return 0.0;
    return total_length() * 1000.0 / speed;
}

Trajectory generate_trajectory(double speed, int n_segments, double rayleigh_scale,
                               const Rect& window, std::uint64_t seed) {
    if (!(speed > 0.0)) throw ParameterError("speed must be positive");
    if (n_segments < 1) throw ParameterError("need at least one segment");
    if (!(rayleigh_scale > 0.0)) throw ParameterError("rayleigh_scale must be positive");
    if (window.empty()) throw ParameterError("trajectory window is empty");

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::uniform_real_distribution<double> heading(0.0, 2.0 * std::numbers::pi);

    Trajectory traj;
    traj.speed = speed;
    traj.segments.reserve(static_cast<std::size_t>(n_segments));

    Point cur{window.x0 + unit(rng) * window.width(), window.y0 + unit(rng) * window.height()};
    std::int64_t draws = 0, accepted = 0;
    while (static_cast<int>(traj.segments.size()) < n_segments) {
        ++draws;
        const double th = heading(rng);
        const double len = rayleigh_scale * std::sqrt(-2.0 * std::log1p(-unit(rng)));
        const Segment seg{cur, th, len};
        const Point end = seg.end();
        if (window.contains(end)) {
            ++accepted;
            traj.segments.push_back(seg);
            cur = end;
        } else if (draws >= 200 && accepted * 100 < draws) {
            throw ConfigError("trajectory window too small for rayleigh_scale: acceptance " +
                              std::to_string(static_cast<double>(accepted) / draws));
        }
    }
    return traj;
}

}  // namespace cfmob
