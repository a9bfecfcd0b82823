#include "cfmob/geometry.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "cfmob/error.hpp"
#include "cfmob/quadrature.hpp"

namespace cfmob {

std::string_view to_string(Method m) {
    switch (m) {
        case Method::comp_jt: return "comp_jt";
        case Method::pue: return "pue";
        case Method::hybrid: return "hybrid";
    }
    return "unknown";
}

Method parse_method(std::string_view s) {
    if (s == "comp_jt" || s == "comp") return Method::comp_jt;
    if (s == "pue") return Method::pue;
    if (s == "hybrid") return Method::hybrid;
    throw ParameterError("unknown AP-selection method '" + std::string(s) + "'");
}

NetworkParams NetworkParams::make(double lambda_ap, int K, double Q, Rect window, double guard,
                                  double lambda_ue) {
    if (!(lambda_ap > 0.0)) throw ParameterError("lambda_ap must be positive");
    if (!(Q > 0.0)) throw ParameterError("Q must be positive");
    NetworkParams p;
    p.lambda_ap = lambda_ap;
    p.lambda_ue = lambda_ue >= 0.0 ? lambda_ue : lambda_ap / 10.0;
    p.L = std::sqrt(Q / lambda_ap);
    p.Q = lambda_ap * p.L * p.L;
    p.K = K;
    p.window = window;
    p.guard = guard;
    p.validate();
    return p;
}

void NetworkParams::validate() const {
    if (!(lambda_ap > 0.0)) throw ParameterError("lambda_ap must be positive");
    if (!(L > 0.0)) throw ParameterError("cluster side L must be positive");
    if (K < 1) throw ParameterError("K must be at least 1");
    if (std::abs(Q - lambda_ap * L * L) > 1e-9 * Q) throw ParameterError("Q must equal lambda_ap * L^2");
    if (!(guard >= 0.0)) throw ParameterError("guard must be non-negative");
    if (inner_window().empty()) throw ParameterError("window shrunk by guard is empty");
}

std::vector<Point> sample_ppp(double density, const Rect& window, std::uint64_t seed) {
    if (!(density > 0.0)) throw ParameterError("PPP density must be positive");
    if (window.empty()) throw ParameterError("PPP window is empty");

    std::mt19937_64 rng(seed);
    std::poisson_distribution<std::int64_t> count(density * window.area());
    std::uniform_real_distribution<double> ux(window.x0, window.x1);
    std::uniform_real_distribution<double> uy(window.y0, window.y1);

    const auto n = count(rng);
    std::vector<Point> pts;
    pts.reserve(static_cast<std::size_t>(n));
    for (std::int64_t i = 0; i < n; ++i) {
        const double x = ux(rng);
        const double y = uy(rng);
        pts.push_back({x, y});
    }
    return pts;
}

// floor() puts a point lying exactly on a grid line into the higher cell.
ClusterId cluster_of(Point p, Point grid_origin, double L) {
    return {static_cast<std::int64_t>(std::floor((p.x - grid_origin.x) / L)),
            static_cast<std::int64_t>(std::floor((p.y - grid_origin.y) / L))};
}

Rect grid_aligned_window(const Rect& window, double L) {
    if (!(L > 0.0)) throw ParameterError("grid pitch L must be positive");
    return {window.x0, window.y0, window.x0 + std::ceil(window.width() / L - 1e-9) * L,
            window.y0 + std::ceil(window.height() / L - 1e-9) * L};
}

std::vector<ClusterId> assign_clusters(std::span<const Point> points, Point grid_origin, double L) {
    if (!(L > 0.0)) throw ParameterError("grid pitch L must be positive");
    std::vector<ClusterId> ids;
    ids.reserve(points.size());
    for (const auto& p : points) ids.push_back(cluster_of(p, grid_origin, L));
    return ids;
}

// ---------------------------------------------------------------------------
// SpatialIndex

SpatialIndex::SpatialIndex(std::span<const Point> points, const Rect& bounds, double pitch)
    : points_(points), bounds_(bounds), pitch_(pitch) {
    if (!(pitch > 0.0)) throw ParameterError("index pitch must be positive");
    nx_ = std::max<std::int64_t>(1, static_cast<std::int64_t>(std::ceil(bounds.width() / pitch)));
    ny_ = std::max<std::int64_t>(1, static_cast<std::int64_t>(std::ceil(bounds.height() / pitch)));

    auto cell_of = [&](const Point& p) {
        const auto cx = std::clamp<std::int64_t>(
            static_cast<std::int64_t>(std::floor((p.x - bounds_.x0) / pitch_)), 0, nx_ - 1);
        const auto cy = std::clamp<std::int64_t>(
            static_cast<std::int64_t>(std::floor((p.y - bounds_.y0) / pitch_)), 0, ny_ - 1);
        return static_cast<std::size_t>(cy * nx_ + cx);
    };

    cell_start_.assign(static_cast<std::size_t>(nx_ * ny_) + 1, 0);
    for (const auto& p : points_) ++cell_start_[cell_of(p) + 1];
    for (std::size_t i = 1; i < cell_start_.size(); ++i) cell_start_[i] += cell_start_[i - 1];

    cell_items_.resize(points_.size());
    std::vector<std::uint32_t> fill(cell_start_.begin(), cell_start_.end() - 1);
    for (std::size_t i = 0; i < points_.size(); ++i)
        cell_items_[fill[cell_of(points_[i])]++] = static_cast<ApId>(i);
}

std::vector<ApId> SpatialIndex::k_nearest(Point q, int K) const {
    const auto k = static_cast<std::size_t>(K);
    const auto qcx = std::clamp<std::int64_t>(
        static_cast<std::int64_t>(std::floor((q.x - bounds_.x0) / pitch_)), 0, nx_ - 1);
    const auto qcy = std::clamp<std::int64_t>(
        static_cast<std::int64_t>(std::floor((q.y - bounds_.y0) / pitch_)), 0, ny_ - 1);

    std::vector<Candidate> cand;
    cand.reserve(4 * k + 16);
    auto visit = [&](std::int64_t cx, std::int64_t cy) {
        if (cx < 0 || cy < 0 || cx >= nx_ || cy >= ny_) return;
        const auto c = static_cast<std::size_t>(cy * nx_ + cx);
        for (auto i = cell_start_[c]; i < cell_start_[c + 1]; ++i) {
            const ApId id = cell_items_[i];
            const double dx = points_[id].x - q.x;
            const double dy = points_[id].y - q.y;
            cand.push_back({dx * dx + dy * dy, id});
        }
    };

    constexpr double inf = std::numeric_limits<double>::infinity();
    const std::int64_t max_ring = std::max(nx_, ny_);
    for (std::int64_t r = 0; r <= max_ring; ++r) {
        if (r == 0) {
            visit(qcx, qcy);
        } else {
            for (std::int64_t cx = qcx - r; cx <= qcx + r; ++cx) {
                visit(cx, qcy - r);
                visit(cx, qcy + r);
            }
            for (std::int64_t cy = qcy - r + 1; cy <= qcy + r - 1; ++cy) {
                visit(qcx - r, cy);
                visit(qcx + r, cy);
            }
        }

        const bool all_x = qcx - r <= 0 && qcx + r >= nx_ - 1;
        const bool all_y = qcy - r <= 0 && qcy + r >= ny_ - 1;
        if (all_x && all_y) break;
        if (cand.size() < k) continue;

        // Any point outside the visited block is at least this far away.
        double bound = inf;
        if (qcx - r > 0) bound = std::min(bound, q.x - (bounds_.x0 + (qcx - r) * pitch_));
        if (qcx + r < nx_ - 1) bound = std::min(bound, bounds_.x0 + (qcx + r + 1) * pitch_ - q.x);
        if (qcy - r > 0) bound = std::min(bound, q.y - (bounds_.y0 + (qcy - r) * pitch_));
        if (qcy + r < ny_ - 1) bound = std::min(bound, bounds_.y0 + (qcy + r + 1) * pitch_ - q.y);
        if (bound <= 0.0) continue;

        std::nth_element(cand.begin(), cand.begin() + static_cast<std::ptrdiff_t>(k - 1), cand.end());
        if (cand[k - 1].d2 < bound * bound) break;
    }

    const auto kk = std::min(k, cand.size());
    std::partial_sort(cand.begin(), cand.begin() + static_cast<std::ptrdiff_t>(kk), cand.end());
    std::vector<ApId> out(kk);
    for (std::size_t i = 0; i < kk; ++i) out[i] = cand[i].id;
    return out;
}

// ---------------------------------------------------------------------------
// Deployment

Deployment::Deployment(std::vector<Point> ap_positions, Point grid_origin, double L, Rect window)
    : positions_(std::move(ap_positions)), grid_origin_(grid_origin), L_(L), window_(window) {
    if (!(L > 0.0)) throw ParameterError("grid pitch L must be positive");
    if (window.empty()) throw ParameterError("deployment window is empty");
    for (const auto& p : positions_)
        if (!window_.contains(p)) throw ParameterError("AP position outside the deployment window");

    cluster_ids_ = assign_clusters(positions_, grid_origin_, L_);
    for (std::size_t i = 0; i < positions_.size(); ++i)
        clusters_[cluster_ids_[i]].push_back(static_cast<ApId>(i));

    // About one AP per bucket on average.
    const double density = positions_.empty() ? 1.0 : positions_.size() / window_.area();
    const double pitch = std::max(1.0 / std::sqrt(density), 1e-9 * std::max(window_.width(), window_.height()));
    index_ = SpatialIndex(positions_, window_, pitch);
}

std::span<const ApId> Deployment::members(const ClusterId& c) const {
    const auto it = clusters_.find(c);
    if (it == clusters_.end()) return {};
    return it->second;
}

std::vector<ApId> k_closest(Point p, const Deployment& deployment, int K) {
    if (K < 1) throw ParameterError("K must be at least 1");
    if (deployment.size() < static_cast<std::size_t>(K))
        throw InsufficientPointsError("deployment has " + std::to_string(deployment.size()) +
                                      " APs, fewer than K = " + std::to_string(K));
    return deployment.index().k_nearest(p, K);
}

ServingSet serving_set(Method method, Point p, const Deployment& deployment,
                       const NetworkParams& params) {
    ServingSet s;
    s.method = method;
    switch (method) {
        case Method::comp_jt: {
            const auto c = cluster_of(p, deployment.grid_origin(), deployment.L());
            s.clusters.push_back(c);
            const auto m = deployment.members(c);
            s.aps.assign(m.begin(), m.end());
            break;
        }
        case Method::pue:
            s.aps = k_closest(p, deployment, params.K);
            break;
        case Method::hybrid: {
            const auto nearest = k_closest(p, deployment, params.K);
            for (const auto id : nearest) s.clusters.push_back(deployment.cluster_ids()[id]);
            std::sort(s.clusters.begin(), s.clusters.end());
            s.clusters.erase(std::unique(s.clusters.begin(), s.clusters.end()), s.clusters.end());
            for (const auto& c : s.clusters) {
                const auto m = deployment.members(c);
                s.aps.insert(s.aps.end(), m.begin(), m.end());
            }
            std::sort(s.aps.begin(), s.aps.end());
            break;
        }
    }
    return s;
}

double buffon_square_grid_crossing_prob(double L, double r) {
    if (!(L > 0.0)) throw ParameterError("grid pitch L must be positive");
    if (!(r >= 0.0)) throw ParameterError("segment length r must be non-negative");
    if (r == 0.0) return 0.0;
    if (r <= L) return (4.0 * r * L - r * r) / (std::numbers::pi * L * L);
    if (r >= std::numbers::sqrt2 * L) return 1.0;

    // A segment with heading theta stays inside one cell with probability
    // (1 - r|cos|/L)+ (1 - r|sin|/L)+; for L < r < sqrt(2) L that product is
    // non-zero only on (acos(L/r), asin(L/r)), where it is smooth.
    const double lo = std::acos(L / r);
    const double hi = std::asin(L / r);
    if (!(hi > lo)) return 1.0;
    auto stay = [L, r](double th) {
        return std::max(0.0, 1.0 - r * std::cos(th) / L) * std::max(0.0, 1.0 - r * std::sin(th) / L);
    };
    const auto res = quad::adaptive_simpson(stay, lo, hi, {.abs_tol = 1e-9});
    if (!res.converged) throw NumericError("grid crossing probability quadrature", res.error);
    return std::clamp(1.0 - res.value / (std::numbers::pi / 2.0), 0.0, 1.0);
}

}  // namespace cfmob
