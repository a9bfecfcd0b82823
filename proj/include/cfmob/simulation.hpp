#pragma once

// Monte Carlo handover counting along random-waypoint trajectories.

#include <cstdint>
#include <span>
#include <vector>

#include "cfmob/analytics.hpp"
#include "cfmob/geometry.hpp"
#include "cfmob/mobility.hpp"

namespace cfmob {

// Event counts for one trajectory.
//
// cluster_events counts crossings where the K-th closest AP is replaced by an
// AP of a different cluster (hybrid), or where the containing cell changes
// (comp_jt). Each such event charges the APs of the cluster that comes in to
// ap_established and those of the cluster that goes out to ap_dropped. For
// pue every AP entering the K-set is one established connection.
//
// cluster_entries / cluster_departures track the hybrid serving-cluster set
// itself: a cluster entering or leaving the set, which is the coarser
// convention where only previously non-serving clusters count.
struct HandoverTally {
    std::int64_t cluster_events = 0;
    std::int64_t ap_established = 0;
    std::int64_t ap_dropped = 0;
    std::int64_t ctrl_events = 0;
    std::int64_t cluster_entries = 0;
    std::int64_t cluster_departures = 0;
    double path_length = 0.0;    // km
    double observed_time = 0.0;  // s
};

inline constexpr int kMaxRefineDepth = 12;

// Samples the trajectory every step_km of arc length and compares
// consecutive states. A change is bisected until it is a single cell
// crossing (comp_jt) or, for K-set methods, down to kMaxRefineDepth.
HandoverTally count_handovers(const Deployment& deployment, const Trajectory& trajectory,
                              Method method, const NetworkParams& params, double step_km);

// Pooled rates over runs with 95% CI half-widths from the per-run spread.
// Throws ParameterError on empty input or zero total time.
RateResult estimate_rates(std::span<const HandoverTally> tallies);

struct CampaignConfig {
    NetworkParams params;
    Method method = Method::hybrid;
    double v = 10.0;  // m/s
    int n_runs = 200;
    int n_segments = 8;
    double step_m = 0.0;  // <= 0 selects default_step_m(params)
    std::uint64_t seed = 1;
    double rayleigh_scale = 0.5;  // km
    int threads = 0;              // <= 0: CF_MOBILITY_THREADS or hardware concurrency

    void validate() const;  // throws ConfigError
    double step_km() const;
};

// min(L/50, 1/(4 sqrt(lambda))), in metres.
double default_step_m(const NetworkParams& params);

// 3/sqrt(lambda) + rayleigh_scale, widened if needed to hold three K-th
// neighbour radii.
double default_guard(double lambda_ap, int K, double rayleigh_scale);

// Smallest square window side that leaves a 1 km interior inside
// default_guard. Sparse deployments with large K need more than 4 km.
double min_window_side(double lambda_ap, int K, double rayleigh_scale);

struct RunRecord {
    int run = 0;
    std::size_t n_aps = 0;
    HandoverTally tally;
};

struct CampaignResult {
    RateResult rates;
    std::vector<RunRecord> runs;
    double lambda_ratio = 0.0;  // lambda_ap / lambda_ue
};

// Independent (deployment, trajectory) pairs per run, each from its own seed
// substream; results are identical for any thread count.
CampaignResult run_campaign(const CampaignConfig& config);

// Thread count from CF_MOBILITY_THREADS, else hardware concurrency (>= 1).
int default_thread_count();

}  // namespace cfmob
