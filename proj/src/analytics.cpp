#include "cfmob/analytics.hpp"

#include <array>
#include <cmath>
#include <numbers>

#include "cfmob/error.hpp"
#include "cfmob/quadrature.hpp"

namespace cfmob {

namespace {

using std::numbers::pi;

constexpr double kMetersPerKm = 1000.0;

void check_lkv(double L, double lambda_ap, int K, double v) {
    if (!(L > 0.0)) throw ParameterError("L must be positive");
    if (!(lambda_ap > 0.0)) throw ParameterError("lambda_ap must be positive");
    if (K < 1) throw ParameterError("K must be at least 1");
    if (!(v >= 0.0)) throw ParameterError("speed must be non-negative");
}

// 2 lambda (lambda pi)^K r0^{2K} exp(-lambda pi r0^2) / Gamma(K), in log space.
double ring_weight(double r0, double lambda_ap, int K) {
    if (r0 <= 0.0) return 0.0;
    const double a = lambda_ap * pi;
    return std::exp(std::log(2.0 * lambda_ap) + K * std::log(a) - std::lgamma(K) +
                    2.0 * K * std::log(r0) - a * r0 * r0);
}

// (K + 1/2) Gamma(K + 1/2) / Gamma(K)
double closed_form_tail(int K) { return (K + 0.5) * gamma_half_ratio(K); }

}  // namespace

std::string_view to_string(RateKind k) {
    switch (k) {
        case RateKind::closed_form: return "closed_form";
        case RateKind::exact_numeric: return "exact_numeric";
        case RateKind::empirical: return "empirical";
    }
    return "unknown";
}

double gamma_half_ratio(int K) {
    if (K < 1) throw ParameterError("K must be at least 1");
    return std::exp(std::lgamma(K + 0.5) - std::lgamma(static_cast<double>(K)));
}

double f_k_distance_pdf(double r, double lambda_ap, int K) {
    if (!(r >= 0.0)) throw ParameterError("distance must be non-negative");
    if (!(lambda_ap > 0.0)) throw ParameterError("lambda_ap must be positive");
    if (K < 1) throw ParameterError("K must be at least 1");
    if (r == 0.0) return 0.0;
    const double a = lambda_ap * pi * r * r;
    return std::exp(std::log(2.0) + K * std::log(a) - std::log(r) - std::lgamma(K) - a);
}

LengthIntensityTerms length_intensity_terms(double lambda_ap, double L, int K) {
    check_lkv(L, lambda_ap, K, 0.0);
    constexpr double tol = 1e-8;
    const double r_max = std::numbers::sqrt2 * L / 2.0;

    // Integral over theta in [0, pi] of g P(L, r0 g), g = sqrt(2 - 2 cos theta)
    // = 2 sin(theta/2). P has kinks where r0 g crosses L and sqrt(2) L.
    auto inner = [&](double r0) {
        auto f = [&](double th) {
            const double g = 2.0 * std::sin(th / 2.0);
            return g * buffon_square_grid_crossing_prob(L, r0 * g);
        };
        std::array<double, 2> breaks{};
        std::size_t nb = 0;
        for (const double edge : {L, std::numbers::sqrt2 * L}) {
            const double s = edge / (2.0 * r0);
            if (r0 > 0.0 && s < 1.0) breaks[nb++] = 2.0 * std::asin(s);
        }
        const auto res = quad::adaptive_simpson_split(f, 0.0, pi, std::span(breaks.data(), nb),
                                                      {.abs_tol = tol});
        if (!res.converged) throw NumericError("length intensity inner quadrature", res.error);
        return res.value;
    };

    LengthIntensityTerms t;
    const auto weighted = quad::adaptive_simpson(
        [&](double r0) {
            const double w = ring_weight(r0, lambda_ap, K);
            return w > 0.0 ? w * inner(r0) : 0.0;
        },
        0.0, r_max, {.abs_tol = tol});
    if (!weighted.converged) throw NumericError("length intensity outer quadrature", weighted.error);
    t.weighted = weighted.value;

    // Integral over theta of sqrt(2 - 2 cos theta) is exactly 4.
    t.full = 4.0 * std::sqrt(lambda_ap / pi) * gamma_half_ratio(K);

    const auto truncated = quad::adaptive_simpson(
        [&](double r0) { return 4.0 * ring_weight(r0, lambda_ap, K); }, 0.0, r_max, {.abs_tol = tol});
    if (!truncated.converged) throw NumericError("length intensity tail quadrature", truncated.error);
    t.truncated = truncated.value;
    return t;
}

double length_intensity_exact(double lambda_ap, double L, int K) {
    return length_intensity_terms(lambda_ap, L, K).total();
}

double length_intensity_closed(double lambda_ap, double L, int K) {
    check_lkv(L, lambda_ap, K, 0.0);
    return 8.0 * K / (pi * L) -
           32.0 / (3.0 * L * L * pi * pi * std::sqrt(lambda_ap * pi)) * closed_form_tail(K);
}

double h_c_hybrid_closed(int K, double L, double lambda_ap, double v) {
    check_lkv(L, lambda_ap, K, v);
    const double vk = v / kMetersPerKm;
    const double h = 16.0 * K * vk / (pi * pi * L) -
                     64.0 * vk / (3.0 * L * L * pi * pi * pi * std::sqrt(lambda_ap * pi)) *
                         closed_form_tail(K);
    return std::max(h, 0.0);
}

double h_ap_hybrid_closed(int K, double L, double lambda_ap, double v) {
    check_lkv(L, lambda_ap, K, v);
    const double vk = v / kMetersPerKm;
    const double h = 16.0 * K * lambda_ap * L * vk / (pi * pi) -
                     64.0 * vk * std::sqrt(lambda_ap) / (3.0 * pi * pi * pi * std::sqrt(pi)) *
                         closed_form_tail(K);
    return std::max(h, 0.0);
}

bool hybrid_closed_form_clamped(int K, double L, double lambda_ap) {
    return length_intensity_closed(lambda_ap, L, K) < 0.0;
}

double h_c_hybrid_exact(int K, double L, double lambda_ap, double v) {
    check_lkv(L, lambda_ap, K, v);
    return 2.0 / pi * length_intensity_exact(lambda_ap, L, K) * (v / kMetersPerKm);
}

double h_c_comp(double v, double L) {
    if (!(L > 0.0)) throw ParameterError("L must be positive");
    if (!(v >= 0.0)) throw ParameterError("speed must be non-negative");
    return 4.0 / pi * (v / kMetersPerKm) / L;
}

double h_ap_comp(double v, double lambda_ap, double L) {
    check_lkv(L, lambda_ap, 1, v);
    return 4.0 / pi * lambda_ap * L * (v / kMetersPerKm);
}

double h_ap_pue(double v, double lambda_ap, int K) {
    check_lkv(1.0, lambda_ap, K, v);
    return 8.0 * gamma_half_ratio(K) * std::sqrt(lambda_ap) / (pi * std::sqrt(pi)) *
           (v / kMetersPerKm);
}

RateResult analytic_rates(Method method, const NetworkParams& params, double v, RateKind kind) {
    if (kind == RateKind::empirical) throw ParameterError("analytic_rates cannot produce empirical rates");
    RateResult r;
    r.kind = kind;
    switch (method) {
        case Method::comp_jt:
            r.h_c = h_c_comp(v, params.L);
            r.h_ap = h_ap_comp(v, params.lambda_ap, params.L);
            r.h_ctrl = r.h_c;
            break;
        case Method::pue:
            r.h_c = 0.0;
            r.h_ap = h_ap_pue(v, params.lambda_ap, params.K);
            r.h_ctrl = r.h_ap;
            break;
        case Method::hybrid:
            if (kind == RateKind::closed_form) {
                r.h_c = h_c_hybrid_closed(params.K, params.L, params.lambda_ap, v);
                r.h_ap = h_ap_hybrid_closed(params.K, params.L, params.lambda_ap, v);
                r.regime_warning = hybrid_closed_form_clamped(params.K, params.L, params.lambda_ap);
            } else {
                r.h_c = h_c_hybrid_exact(params.K, params.L, params.lambda_ap, v);
                r.h_ap = r.h_c * params.lambda_ap * params.L * params.L;
            }
            r.h_ctrl = r.h_c;
            break;
    }
    return r;
}

}  // namespace cfmob
