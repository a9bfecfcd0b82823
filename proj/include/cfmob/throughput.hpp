#pragma once

// Mobility-aware spectral efficiency on top of a pluggable static-SE source.

#include <cstdint>
#include <filesystem>
#include <memory>
#include <span>
#include <vector>

#include "cfmob/analytics.hpp"
#include "cfmob/geometry.hpp"

namespace cfmob {

struct DelayParams {
    double d1 = 0.0;  // control-plane delay (s)
    double d2 = 0.0;  // intra-cluster delay (s)

    void validate() const;  // throws ParameterError
};

// pue: se (1 - h_ap d1); comp_jt / hybrid: se (1 - h_c d1 - h_ap d2).
// A non-positive availability factor blocks the link and returns exactly 0.
double mobility_aware_se(double se_static, Method method, const RateResult& rates,
                         const DelayParams& delays);

// PROXY static SE model. Not the cell-free massive MIMO downlink SE: received
// power is the plain sum of three-slope log-distance gains over serving APs,
// interference the same sum over every other AP, se = log2(1 + SINR).
struct PathlossParams {
    double slope_near = 2.0;  // exponent below breakpoint_near
    double slope_mid = 3.0;
    double slope_far = 3.5;   // exponent beyond breakpoint_far
    double breakpoint_near_m = 10.0;
    double breakpoint_far_m = 50.0;
    double min_distance_m = 1.0;
    double snr_ref_db = 75.0;  // transmit power over noise at 1 m

    // Linear gain relative to min_distance_m, continuous across breakpoints.
    double gain(double distance_m) const;
};

double proxy_static_se(const Deployment& deployment, Point ue, const ServingSet& serving,
                       const PathlossParams& pathloss = {});

// Linear-interpolated quantiles (levels in percent). "95%-likely" is the 5th
// percentile, the median the 50th. Throws ParameterError on empty samples.
std::vector<double> percentile_stats(std::span<const double> samples, std::span<const double> levels_pct);

struct SESample {
    std::int64_t ue_id = 0;
    Method method = Method::comp_jt;
    int K = 0;
    double Q = 0.0;
    double se_static = 0.0;  // bit/s/Hz
};

class StaticSeProvider {
public:
    virtual ~StaticSeProvider() = default;
    // Static SE samples for one method configuration (K and Q as reported in
    // the output rows; 0 means not applicable).
    virtual std::vector<SESample> samples(Method method, double lambda_ap, int K, double Q) = 0;
    virtual bool is_proxy() const = 0;
};

// Rows of `ue_id,method,K,Q,se_static`; selection ignores lambda.
class CsvSeProvider : public StaticSeProvider {
public:
    explicit CsvSeProvider(const std::filesystem::path& path);
    explicit CsvSeProvider(std::vector<SESample> rows) : rows_(std::move(rows)) {}

    std::vector<SESample> samples(Method method, double lambda_ap, int K, double Q) override;
    bool is_proxy() const override { return false; }
    std::span<const SESample> rows() const { return rows_; }

private:
    std::vector<SESample> rows_;
};

// Drops UEs (density lambda_ap / 10) over fresh deployments and evaluates
// proxy_static_se for each. The window grows to min_window_side if needed.
class ProxySeProvider : public StaticSeProvider {
public:
    struct Options {
        Rect window{0.0, 0.0, 4.0, 4.0};
        int n_runs = 20;
        std::uint64_t seed = 1;
        double lambda_ratio = 10.0;
        PathlossParams pathloss;
    };

    explicit ProxySeProvider(Options opt) : opt_(std::move(opt)) {}

    std::vector<SESample> samples(Method method, double lambda_ap, int K, double Q) override;
    bool is_proxy() const override { return true; }

private:
    Options opt_;
};

// Network parameters for a method row where K or Q may be "not applicable"
// (0): comp_jt ignores K, pue ignores Q.
NetworkParams method_params(Method method, double lambda_ap, int K, double Q, Rect window, double guard);

}  // namespace cfmob
