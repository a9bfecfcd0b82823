#include "cfmob/throughput.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string>

#include "cfmob/error.hpp"
#include "cfmob/rng.hpp"
#include "cfmob/simulation.hpp"

namespace cfmob {

void DelayParams::validate() const {
    if (!(d1 >= 0.0) || !(d2 >= 0.0)) throw ParameterError("handover delays must be non-negative");
}

double mobility_aware_se(double se_static, Method method, const RateResult& rates,
                         const DelayParams& delays) {
    if (!(se_static >= 0.0)) throw ParameterError("static SE must be non-negative");
    delays.validate();
    const double factor = method == Method::pue
                              ? 1.0 - rates.h_ap * delays.d1
                              : 1.0 - rates.h_c * delays.d1 - rates.h_ap * delays.d2;
    if (factor <= 0.0) return 0.0;
    return se_static * factor;
}

double PathlossParams::gain(double distance_m) const {
    const double d = std::max(distance_m, min_distance_m);
    const double d0 = min_distance_m;
    const double b1 = std::max(breakpoint_near_m, d0);
    const double b2 = std::max(breakpoint_far_m, b1);
    // log10 of the gain, piecewise linear in log10(d).
    double lg = 0.0;
    if (d <= b1) {
        lg = -slope_near * std::log10(d / d0);
    } else if (d <= b2) {
        lg = -slope_near * std::log10(b1 / d0) - slope_mid * std::log10(d / b1);
    } else {
        lg = -slope_near * std::log10(b1 / d0) - slope_mid * std::log10(b2 / b1) -
             slope_far * std::log10(d / b2);
    }
    return std::pow(10.0, lg);
}

double proxy_static_se(const Deployment& deployment, Point ue, const ServingSet& serving,
                       const PathlossParams& pathloss) {
    if (serving.aps.empty()) return 0.0;
    std::vector<ApId> sorted = serving.aps;
    std::sort(sorted.begin(), sorted.end());

    const double tx = std::pow(10.0, pathloss.snr_ref_db / 10.0);
    double signal = 0.0, interference = 0.0;
    const auto pos = deployment.positions();
    for (std::size_t i = 0; i < pos.size(); ++i) {
        const double d_m = 1000.0 * std::hypot(pos[i].x - ue.x, pos[i].y - ue.y);
        const double g = tx * pathloss.gain(d_m);
        if (std::binary_search(sorted.begin(), sorted.end(), static_cast<ApId>(i)))
            signal += g;
        else
            interference += g;
    }
    return std::log2(1.0 + signal / (interference + 1.0));
}

std::vector<double> percentile_stats(std::span<const double> samples, std::span<const double> levels_pct) {
    if (samples.empty()) throw ParameterError("percentile of an empty sample");
    std::vector<double> s(samples.begin(), samples.end());
    std::sort(s.begin(), s.end());
    std::vector<double> out;
    out.reserve(levels_pct.size());
    const auto n = static_cast<double>(s.size());
    for (double p : levels_pct) {
        if (!(p >= 0.0 && p <= 100.0)) throw ParameterError("percentile level outside [0, 100]");
        const double h = (n - 1.0) * p / 100.0;
        const auto lo = static_cast<std::size_t>(std::floor(h));
        const auto hi = std::min(lo + 1, s.size() - 1);
        out.push_back(s[lo] + (h - static_cast<double>(lo)) * (s[hi] - s[lo]));
    }
    return out;
}

// ---------------------------------------------------------------------------

namespace {

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
        const auto b = cell.find_first_not_of(" \t\r");
        const auto e = cell.find_last_not_of(" \t\r");
        out.push_back(b == std::string::npos ? "" : cell.substr(b, e - b + 1));
    }
    return out;
}

}  // namespace

CsvSeProvider::CsvSeProvider(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open SE file " + path.string());
    std::string line;
    if (!std::getline(in, line)) throw ConfigError("SE file " + path.string() + " is empty");
    if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
    const std::vector<std::string> expected{"ue_id", "method", "K", "Q", "se_static"};
    if (split_csv(line) != expected)
        throw ConfigError("SE file header must be 'ue_id,method,K,Q,se_static'");

    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        const auto cells = split_csv(line);
        if (cells.size() != expected.size())
            throw ConfigError("SE file line " + std::to_string(lineno) + ": expected 5 fields");
        try {
            SESample s;
            s.ue_id = std::stoll(cells[0]);
            s.method = parse_method(cells[1]);
            s.K = std::stoi(cells[2]);
            s.Q = std::stod(cells[3]);
            s.se_static = std::stod(cells[4]);
            if (!(s.se_static >= 0.0)) throw ParameterError("negative se_static");
            rows_.push_back(s);
        } catch (const std::exception& e) {
            throw ConfigError("SE file line " + std::to_string(lineno) + ": " + e.what());
        }
    }
}

std::vector<SESample> CsvSeProvider::samples(Method method, double, int K, double Q) {
    std::vector<SESample> out;
    for (const auto& r : rows_)
        if (r.method == method && r.K == K && std::abs(r.Q - Q) <= 1e-9 * std::max(1.0, std::abs(Q)))
            out.push_back(r);
    return out;
}

NetworkParams method_params(Method method, double lambda_ap, int K, double Q, Rect window, double guard) {
    switch (method) {
        case Method::comp_jt: return NetworkParams::make(lambda_ap, 1, Q, window, guard);
        case Method::pue: return NetworkParams::make(lambda_ap, K, Q > 0.0 ? Q : K, window, guard);
        case Method::hybrid: return NetworkParams::make(lambda_ap, K, Q, window, guard);
    }
    throw ParameterError("unknown method");
}

std::vector<SESample> ProxySeProvider::samples(Method method, double lambda_ap, int K, double Q) {
    const int k_eff = method == Method::comp_jt ? 1 : K;
    const double guard = default_guard(lambda_ap, k_eff, 0.5);
    const double min_side = min_window_side(lambda_ap, k_eff, 0.5);
    Rect window = opt_.window;
    window.x1 = window.x0 + std::max(window.width(), min_side);
    window.y1 = window.y0 + std::max(window.height(), min_side);
    const auto params = method_params(method, lambda_ap, K, Q, window, guard);
    const double lambda_ue = lambda_ap / opt_.lambda_ratio;

    const Point origin{params.window.x0, params.window.y0};
    const Rect ap_window = grid_aligned_window(params.window, params.L);

    std::vector<SESample> out;
    std::int64_t ue_id = 0;
    for (int run = 0; run < opt_.n_runs; ++run) {
        const auto idx = static_cast<std::uint64_t>(run);
        const Deployment dep(sample_ppp(lambda_ap, ap_window, derive_seed(opt_.seed, stream::deployment, idx)),
                             origin, params.L, ap_window);
        const auto ues = sample_ppp(lambda_ue, params.inner_window(), derive_seed(opt_.seed, stream::users, idx));
        for (const auto& ue : ues) {
            const auto serving = serving_set(method, ue, dep, params);
            out.push_back({ue_id++, method, K, Q, proxy_static_se(dep, ue, serving, opt_.pathloss)});
        }
    }
    return out;
}

}  // namespace cfmob
