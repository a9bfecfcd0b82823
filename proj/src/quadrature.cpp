#include "cfmob/quadrature.hpp"

#include <algorithm>
#include <vector>

namespace cfmob::quad {

namespace {

struct Panel {
    double a, fa, m, fm, b, fb, whole;
};

double simpson(double a, double fa, double fm, double b, double fb) {
    return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

void recurse(const std::function<double(double)>& f, const Panel& p, double tol, int depth,
             Result& out) {
    const double lm = 0.5 * (p.a + p.m);
    const double rm = 0.5 * (p.m + p.b);
    const double flm = f(lm);
    const double frm = f(rm);
    const double left = simpson(p.a, p.fa, flm, p.m, p.fm);
    const double right = simpson(p.m, p.fm, frm, p.b, p.fb);
    const double delta = left + right - p.whole;

    if (depth <= 0 || std::abs(delta) <= 15.0 * tol) {
        if (depth <= 0 && std::abs(delta) > 15.0 * tol) out.converged = false;
        out.value += left + right + delta / 15.0;
        out.error += std::abs(delta) / 15.0;
        return;
    }
    recurse(f, {p.a, p.fa, lm, flm, p.m, p.fm, left}, 0.5 * tol, depth - 1, out);
    recurse(f, {p.m, p.fm, rm, frm, p.b, p.fb, right}, 0.5 * tol, depth - 1, out);
}

}  // namespace

Result adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                        const Options& opt) {
    Result out;
    if (a == b) return out;
    const double m = 0.5 * (a + b);
    const double fa = f(a), fm = f(m), fb = f(b);
    const Panel top{a, fa, m, fm, b, fb, simpson(a, fa, fm, b, fb)};

    // Seed with a few bisections so a lucky initial Simpson estimate on a
    // peaked integrand cannot terminate the recursion immediately.
    constexpr int kSeedLevels = 3;
    std::vector<Panel> panels{top};
    for (int level = 0; level < kSeedLevels; ++level) {
        std::vector<Panel> next;
        next.reserve(panels.size() * 2);
        for (const auto& p : panels) {
            const double lm = 0.5 * (p.a + p.m), rm = 0.5 * (p.m + p.b);
            const double flm = f(lm), frm = f(rm);
            next.push_back({p.a, p.fa, lm, flm, p.m, p.fm, simpson(p.a, p.fa, flm, p.m, p.fm)});
            next.push_back({p.m, p.fm, rm, frm, p.b, p.fb, simpson(p.m, p.fm, frm, p.b, p.fb)});
        }
        panels = std::move(next);
    }
    const double panel_tol = opt.abs_tol / static_cast<double>(panels.size());
    for (const auto& p : panels) recurse(f, p, panel_tol, opt.max_depth, out);
    return out;
}

Result adaptive_simpson_split(const std::function<double(double)>& f, double a, double b,
                              std::span<const double> breaks, const Options& opt) {
    std::vector<double> knots{a};
    for (double x : breaks)
        if (x > a && x < b) knots.push_back(x);
    knots.push_back(b);
    std::sort(knots.begin(), knots.end());
    knots.erase(std::unique(knots.begin(), knots.end()), knots.end());

    Result out;
    const double span = b - a;
    if (span == 0.0) return out;
    for (std::size_t i = 0; i + 1 < knots.size(); ++i) {
        Options piece = opt;
        piece.abs_tol = opt.abs_tol * (knots[i + 1] - knots[i]) / span;
        const auto r = adaptive_simpson(f, knots[i], knots[i + 1], piece);
        out.value += r.value;
        out.error += r.error;
        out.converged = out.converged && r.converged;
    }
    return out;
}

}  // namespace cfmob::quad
