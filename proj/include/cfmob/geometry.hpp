#pragma once

// Point-process sampling, square-grid CPU clustering, K-nearest AP queries
// and serving-set formation for the three AP-selection methods.
//
// Units: lengths in km, densities in APs per km².

#include <compare>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace cfmob {

struct Point {
    double x = 0.0;
    double y = 0.0;

    friend bool operator==(const Point&, const Point&) = default;
};

struct Rect {
    double x0 = 0.0, y0 = 0.0, x1 = 0.0, y1 = 0.0;

    double width() const { return x1 - x0; }
    double height() const { return y1 - y0; }
    double area() const { return width() * height(); }
    bool empty() const { return !(x1 > x0 && y1 > y0); }
    bool contains(Point p) const { return p.x >= x0 && p.x <= x1 && p.y >= y0 && p.y <= y1; }
    Rect shrunk(double margin) const { return {x0 + margin, y0 + margin, x1 - margin, y1 - margin}; }

    friend bool operator==(const Rect&, const Rect&) = default;
};

enum class Method { comp_jt, pue, hybrid };

std::string_view to_string(Method m);
Method parse_method(std::string_view s);  // throws ParameterError

using ApId = std::uint32_t;

// Grid cell index (column, row) of a CPU cluster.
struct ClusterId {
    std::int64_t ix = 0;
    std::int64_t iy = 0;

    auto operator<=>(const ClusterId&) const = default;
};

struct ClusterIdHash {
    std::size_t operator()(const ClusterId& c) const noexcept {
        const auto h = static_cast<std::uint64_t>(c.ix) * 0x9E3779B97F4A7C15ull ^
                       (static_cast<std::uint64_t>(c.iy) + 0x632BE59BD9B4E019ull);
        return static_cast<std::size_t>(h ^ (h >> 29));
    }
};

// The (lambda, L, Q, K) tuple plus the simulation window. Q is always derived
// as lambda * L^2; construct through make().
struct NetworkParams {
    double lambda_ap = 0.0;  // APs per km²
    double lambda_ue = 0.0;  // UEs per km²
    double L = 0.0;          // cluster side (km)
    double Q = 0.0;          // mean APs per cluster
    int K = 1;               // closest-AP count
    Rect window;             // AP sampling area (km)
    double guard = 0.0;      // margin between window edge and trajectories (km)

    // L = sqrt(Q / lambda_ap). lambda_ue defaults to lambda_ap / 10.
    static NetworkParams make(double lambda_ap, int K, double Q, Rect window, double guard,
                              double lambda_ue = -1.0);

    void validate() const;  // throws ParameterError
    Rect inner_window() const { return window.shrunk(guard); }
};

// Homogeneous PPP on a rectangle; deterministic for a given seed.
std::vector<Point> sample_ppp(double density, const Rect& window, std::uint64_t seed);

ClusterId cluster_of(Point p, Point grid_origin, double L);

// `window` grown at the top and right to a whole number of L-cells, anchored
// at its lower-left corner.
Rect grid_aligned_window(const Rect& window, double L);
std::vector<ClusterId> assign_clusters(std::span<const Point> points, Point grid_origin, double L);

// Uniform bucket grid over a point set, answering exact K-nearest queries.
class SpatialIndex {
public:
    SpatialIndex() = default;
    SpatialIndex(std::span<const Point> points, const Rect& bounds, double pitch);

    // K nearest ids, ascending by (distance, id). Caller guarantees K <= size.
    std::vector<ApId> k_nearest(Point q, int K) const;

private:
    struct Candidate {
        double d2;
        ApId id;
        auto operator<=>(const Candidate&) const = default;
    };

    std::span<const Point> points_;
    Rect bounds_;
    double pitch_ = 1.0;
    std::int64_t nx_ = 0, ny_ = 0;
    std::vector<std::uint32_t> cell_start_;  // CSR layout, size nx*ny + 1
    std::vector<ApId> cell_items_;
};

// A realized AP deployment with its grid clustering. Immutable.
class Deployment {
public:
    Deployment(std::vector<Point> ap_positions, Point grid_origin, double L, Rect window);

    Deployment(const Deployment&) = delete;
    Deployment& operator=(const Deployment&) = delete;
    // Moving keeps the vector buffers, so the index stays valid.
    Deployment(Deployment&&) = default;
    Deployment& operator=(Deployment&&) = default;

    std::span<const Point> positions() const { return positions_; }
    std::span<const ClusterId> cluster_ids() const { return cluster_ids_; }
    Point grid_origin() const { return grid_origin_; }
    double L() const { return L_; }
    const Rect& window() const { return window_; }
    std::size_t size() const { return positions_.size(); }

    std::span<const ApId> members(const ClusterId& c) const;
    std::size_t cluster_size(const ClusterId& c) const { return members(c).size(); }
    const SpatialIndex& index() const { return index_; }

private:
    std::vector<Point> positions_;
    std::vector<ClusterId> cluster_ids_;
    Point grid_origin_;
    double L_;
    Rect window_;
    std::unordered_map<ClusterId, std::vector<ApId>, ClusterIdHash> clusters_;
    SpatialIndex index_;
};

// K nearest APs by Euclidean distance, ties by AP id. Throws
// InsufficientPointsError when the deployment has fewer than K APs.
std::vector<ApId> k_closest(Point p, const Deployment& deployment, int K);

// comp_jt: clusters = {cell of p}, aps = its members (ascending id).
// pue: clusters empty, aps = K closest in distance order.
// hybrid: clusters = cells of the K closest (sorted), aps = all their members (ascending id).
struct ServingSet {
    Method method = Method::comp_jt;
    std::vector<ClusterId> clusters;
    std::vector<ApId> aps;

    friend bool operator==(const ServingSet&, const ServingSet&) = default;
};

ServingSet serving_set(Method method, Point p, const Deployment& deployment,
                       const NetworkParams& params);

// Probability that a uniformly placed and oriented segment of length r
// crosses at least one line of a square grid of pitch L.
double buffon_square_grid_crossing_prob(double L, double r);

}  // namespace cfmob
