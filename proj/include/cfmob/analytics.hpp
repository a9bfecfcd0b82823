#pragma once

// Handover-rate formulas for the hybrid (scalable cell-free), CoMP-JT and
// pure UE-centric AP-selection methods.
//
// Units throughout: lambda in APs/km², lengths in km, speed v in m/s,
// rates in events/s, length intensities in km/km² (= 1/km).

#include <string_view>

#include "cfmob/geometry.hpp"

namespace cfmob {

enum class RateKind { closed_form, exact_numeric, empirical };

std::string_view to_string(RateKind k);

struct RateResult {
    double h_c = 0.0;     // CPU-cluster handovers/s
    double h_ap = 0.0;    // AP handovers/s
    double h_ctrl = 0.0;  // control-plane handovers/s
    RateKind kind = RateKind::closed_form;
    double ci95_halfwidth = 0.0;  // of h_ctrl; empirical only
    double ci95_c = 0.0;
    double ci95_ap = 0.0;
    bool regime_warning = false;  // closed form clamped at 0 (deep Q/K < 2)
};

// Gamma(K + 1/2) / Gamma(K).
double gamma_half_ratio(int K);

// Density of the distance from the origin to its K-th nearest point of a PPP.
double f_k_distance_pdf(double r, double lambda_ap, int K);

// The three pieces of the length intensity of the hybrid handover boundary:
// mu1 = weighted + full - truncated.
//   weighted:  r0 in [0, sqrt(2) L / 2], weighted by the probability that the
//              two equidistant K-th APs sit in different clusters
//   full:      4 sqrt(lambda/pi) Gamma(K+1/2)/Gamma(K), every pair counted
//   truncated: the "full" integrand restricted to the same r0 range
struct LengthIntensityTerms {
    double weighted = 0.0;
    double full = 0.0;
    double truncated = 0.0;

    double total() const { return weighted + full - truncated; }
};

// Nested adaptive Simpson, abs tol 1e-8 per dimension. Throws NumericError
// on non-convergence.
LengthIntensityTerms length_intensity_terms(double lambda_ap, double L, int K);
double length_intensity_exact(double lambda_ap, double L, int K);
// Large-Q approximation. May be negative for small Q/K.
double length_intensity_closed(double lambda_ap, double L, int K);

// Hybrid method. Closed forms clamp a negative value to 0; use
// hybrid_closed_form_clamped() to detect that regime.
double h_c_hybrid_closed(int K, double L, double lambda_ap, double v);
double h_ap_hybrid_closed(int K, double L, double lambda_ap, double v);
bool hybrid_closed_form_clamped(int K, double L, double lambda_ap);
double h_c_hybrid_exact(int K, double L, double lambda_ap, double v);

double h_c_comp(double v, double L);
double h_ap_comp(double v, double lambda_ap, double L);
double h_ap_pue(double v, double lambda_ap, int K);

// Rates for one method. For comp_jt and pue the closed forms are exact, so
// both kinds give the same numbers. pue reports h_c = 0 (no clusters).
RateResult analytic_rates(Method method, const NetworkParams& params, double v, RateKind kind);

}  // namespace cfmob
