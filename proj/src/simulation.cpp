#include "cfmob/simulation.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <numbers>
#include <thread>
#include <variant>

#include "cfmob/error.hpp"
#include "cfmob/rng.hpp"

namespace cfmob {

namespace {

// Arc-length parametrisation of a trajectory.
class PathWalker {
public:
    explicit PathWalker(const Trajectory& t) : traj_(t) {
        cum_.reserve(t.segments.size() + 1);
        cum_.push_back(0.0);
        for (const auto& s : t.segments) cum_.push_back(cum_.back() + s.length);
    }

    double length() const { return cum_.back(); }

    Point at(double s) const {
        if (traj_.segments.empty()) return {};
        auto it = std::upper_bound(cum_.begin(), cum_.end(), s);
        auto i = static_cast<std::size_t>(std::max<std::ptrdiff_t>(0, it - cum_.begin() - 1));
        i = std::min(i, traj_.segments.size() - 1);
        return traj_.segments[i].at(s - cum_[i]);
    }

private:
    const Trajectory& traj_;
    std::vector<double> cum_;
};

using KSet = std::vector<ApId>;  // sorted by id
using State = std::variant<ClusterId, KSet>;

class Counter {
public:
    Counter(const Deployment& d, const PathWalker& w, Method m, int K)
        : dep_(d), walk_(w), method_(m), K_(K) {}

    State state_at(double s) const {
        const Point p = walk_.at(s);
        if (method_ == Method::comp_jt) return cluster_of(p, dep_.grid_origin(), dep_.L());
        KSet k = k_closest(p, dep_, K_);
        std::sort(k.begin(), k.end());
        return k;
    }

    void step(double sa, const State& a, double sb, const State& b, int depth) {
        if (a == b) return;
        if (depth >= kMaxRefineDepth || elementary(a, b)) {
            record(a, b);
            return;
        }
        const double sm = 0.5 * (sa + sb);
        const State m = state_at(sm);
        step(sa, a, sm, m, depth + 1);
        step(sm, m, sb, b, depth + 1);
    }

    HandoverTally tally;

private:
    // A Manhattan-1 cell change is a single crossing on a straight path. A
    // one-AP K-set change is not conclusive (a->b->c looks like a->c), so
    // K-set changes are always refined to the depth cap.
    static bool elementary(const State& a, const State& b) {
        if (const auto* ca = std::get_if<ClusterId>(&a)) {
            const auto& cb = std::get<ClusterId>(b);
            return std::abs(ca->ix - cb.ix) + std::abs(ca->iy - cb.iy) == 1;
        }
        return false;
    }

    std::vector<ClusterId> clusters_of(const KSet& k) const {
        std::vector<ClusterId> c;
        c.reserve(k.size());
        for (auto id : k) c.push_back(dep_.cluster_ids()[id]);
        std::sort(c.begin(), c.end());
        c.erase(std::unique(c.begin(), c.end()), c.end());
        return c;
    }

    void record(const State& a, const State& b) {
        if (const auto* ca = std::get_if<ClusterId>(&a)) {
            const auto& cb = std::get<ClusterId>(b);
            const auto crossings = std::abs(ca->ix - cb.ix) + std::abs(ca->iy - cb.iy);
            tally.cluster_events += crossings;
            tally.ctrl_events += crossings;
            tally.ap_established += crossings * static_cast<std::int64_t>(dep_.cluster_size(cb));
            tally.ap_dropped += crossings * static_cast<std::int64_t>(dep_.cluster_size(*ca));
            return;
        }

        const auto& ka = std::get<KSet>(a);
        const auto& kb = std::get<KSet>(b);
        KSet added, removed;
        std::set_difference(kb.begin(), kb.end(), ka.begin(), ka.end(), std::back_inserter(added));
        std::set_difference(ka.begin(), ka.end(), kb.begin(), kb.end(), std::back_inserter(removed));

        if (method_ == Method::pue) {
            tally.ap_established += static_cast<std::int64_t>(added.size());
            tally.ap_dropped += static_cast<std::int64_t>(removed.size());
            tally.ctrl_events += static_cast<std::int64_t>(added.size());
            return;
        }

        // Hybrid. Unresolved multi-swaps (refinement depth exhausted) pair
        // incoming and outgoing APs in id order.
        const auto ids = dep_.cluster_ids();
        for (std::size_t i = 0; i < std::min(added.size(), removed.size()); ++i) {
            const ClusterId in = ids[added[i]];
            const ClusterId out = ids[removed[i]];
            if (in == out) continue;
            ++tally.cluster_events;
            ++tally.ctrl_events;
            tally.ap_established += static_cast<std::int64_t>(dep_.cluster_size(in));
            tally.ap_dropped += static_cast<std::int64_t>(dep_.cluster_size(out));
        }

        const auto ca = clusters_of(ka);
        const auto cb = clusters_of(kb);
        std::vector<ClusterId> diff;
        std::set_difference(cb.begin(), cb.end(), ca.begin(), ca.end(), std::back_inserter(diff));
        tally.cluster_entries += static_cast<std::int64_t>(diff.size());
        diff.clear();
        std::set_difference(ca.begin(), ca.end(), cb.begin(), cb.end(), std::back_inserter(diff));
        tally.cluster_departures += static_cast<std::int64_t>(diff.size());
    }

    const Deployment& dep_;
    const PathWalker& walk_;
    Method method_;
    int K_;
};

double mean(std::span<const double> x) {
    double s = 0.0;
    for (double v : x) s += v;
    return s / static_cast<double>(x.size());
}

double ci95(std::span<const double> x) {
    if (x.size() < 2) return 0.0;
    const double m = mean(x);
    double ss = 0.0;
    for (double v : x) ss += (v - m) * (v - m);
    const double sd = std::sqrt(ss / static_cast<double>(x.size() - 1));
    return 1.96 * sd / std::sqrt(static_cast<double>(x.size()));
}

}  // namespace

HandoverTally count_handovers(const Deployment& deployment, const Trajectory& trajectory,
                              Method method, const NetworkParams& params, double step_km) {
    if (!(step_km > 0.0)) throw ParameterError("sampling step must be positive");
    if (method != Method::comp_jt) {
        if (params.K < 1) throw ParameterError("K must be at least 1");
        if (deployment.size() < static_cast<std::size_t>(params.K))
            throw InsufficientPointsError("deployment smaller than K");
    }

    const PathWalker walk(trajectory);
    Counter counter(deployment, walk, method, params.K);
    const double total = walk.length();

    if (total > 0.0) {
        const auto n = static_cast<std::int64_t>(std::ceil(total / step_km));
        double s_prev = 0.0;
        State prev = counter.state_at(0.0);
        for (std::int64_t i = 1; i <= n; ++i) {
            const double s = std::min(total, static_cast<double>(i) * step_km);
            State cur = counter.state_at(s);
            counter.step(s_prev, prev, s, cur, 0);
            prev = std::move(cur);
            s_prev = s;
        }
    }

    HandoverTally t = counter.tally;
    t.path_length = total;
    t.observed_time = trajectory.total_time();
    return t;
}

RateResult estimate_rates(std::span<const HandoverTally> tallies) {
    if (tallies.empty()) throw ParameterError("no tallies to aggregate");

    double time = 0.0;
    double c = 0.0, ap = 0.0, ctrl = 0.0;
    std::vector<double> rc, rap, rctrl;
    for (const auto& t : tallies) {
        time += t.observed_time;
        c += static_cast<double>(t.cluster_events);
        ap += static_cast<double>(t.ap_established);
        ctrl += static_cast<double>(t.ctrl_events);
        if (t.observed_time > 0.0) {
            rc.push_back(t.cluster_events / t.observed_time);
            rap.push_back(t.ap_established / t.observed_time);
            rctrl.push_back(t.ctrl_events / t.observed_time);
        }
    }
    if (!(time > 0.0)) throw ParameterError("tallies carry no observed time");

    RateResult r;
    r.kind = RateKind::empirical;
    r.h_c = c / time;
    r.h_ap = ap / time;
    r.h_ctrl = ctrl / time;
    r.ci95_c = ci95(rc);
    r.ci95_ap = ci95(rap);
    r.ci95_halfwidth = ci95(rctrl);
    return r;
}

double default_step_m(const NetworkParams& params) {
    return 1000.0 * std::min(params.L / 50.0, 1.0 / (4.0 * std::sqrt(params.lambda_ap)));
}

double default_guard(double lambda_ap, int K, double rayleigh_scale) {
    const double base = 3.0 / std::sqrt(lambda_ap) + rayleigh_scale;
    const double kth = std::sqrt(static_cast<double>(K) / (std::numbers::pi * lambda_ap));
    return std::max(base, 3.0 * kth);
}

double min_window_side(double lambda_ap, int K, double rayleigh_scale) {
    return 2.0 * default_guard(lambda_ap, K, rayleigh_scale) + 1.0;
}

void CampaignConfig::validate() const {
    try {
        params.validate();
    } catch (const ParameterError& e) {
        throw ConfigError(e.what());
    }
    if (n_runs < 1) throw ConfigError("n_runs must be at least 1");
    if (n_segments < 1) throw ConfigError("n_segments must be at least 1");
    if (!(v >= 0.0)) throw ConfigError("speed must be non-negative");
    if (!(rayleigh_scale > 0.0)) throw ConfigError("rayleigh_scale must be positive");
    const double s = step_km();
    if (!(s > 0.0) || s > params.L / 20.0 * (1.0 + 1e-12))
        throw ConfigError("sampling step must be in (0, L/20]");
}

double CampaignConfig::step_km() const {
    return (step_m > 0.0 ? step_m : default_step_m(params)) / 1000.0;
}

int default_thread_count() {
    if (const char* env = std::getenv("CF_MOBILITY_THREADS")) {
        const int n = std::atoi(env);
        if (n >= 1) return n;
    }
    return static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
}

CampaignResult run_campaign(const CampaignConfig& config) {
    config.validate();
    const auto& p = config.params;

    CampaignResult out;
    out.lambda_ratio = p.lambda_ue > 0.0 ? p.lambda_ap / p.lambda_ue : 0.0;
    out.runs.resize(static_cast<std::size_t>(config.n_runs));

    // APs cover whole grid cells so no cluster near the guard is truncated.
    const Point origin{p.window.x0, p.window.y0};
    const Rect ap_window = grid_aligned_window(p.window, p.L);
    const Rect inner = p.inner_window();
    // Trajectory geometry does not depend on speed; v = 0 reuses it with zero time.
    const double gen_speed = config.v > 0.0 ? config.v : 1.0;
    const double step = config.step_km();

    auto do_run = [&](int i) {
        const auto idx = static_cast<std::uint64_t>(i);
        Deployment dep(sample_ppp(p.lambda_ap, ap_window, derive_seed(config.seed, stream::deployment, idx)),
                       origin, p.L, ap_window);
        Trajectory traj = generate_trajectory(gen_speed, config.n_segments, config.rayleigh_scale, inner,
                                              derive_seed(config.seed, stream::trajectory, idx));
        traj.speed = config.v;
        RunRecord rec;
        rec.run = i;
        rec.n_aps = dep.size();
        rec.tally = count_handovers(dep, traj, config.method, p, step);
        out.runs[static_cast<std::size_t>(i)] = rec;
    };

    const int threads = std::min(config.threads > 0 ? config.threads : default_thread_count(), config.n_runs);
    std::atomic<int> next{0};
    std::exception_ptr failure;
    std::mutex failure_mu;
    auto worker = [&] {
        for (int i = next++; i < config.n_runs; i = next++) {
            try {
                do_run(i);
            } catch (...) {
                std::lock_guard lock(failure_mu);
                if (!failure) failure = std::current_exception();
                next = config.n_runs;
            }
        }
    };
    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        pool.reserve(static_cast<std::size_t>(threads));
        for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    }
    if (failure) std::rethrow_exception(failure);

    if (config.v == 0.0) {
        out.rates.kind = RateKind::empirical;
        return out;
    }
    std::vector<HandoverTally> tallies;
    tallies.reserve(out.runs.size());
    for (const auto& r : out.runs) tallies.push_back(r.tally);
    out.rates = estimate_rates(tallies);
    return out;
}

}  // namespace cfmob
