#pragma once

#include <functional>
#include <utility>

#include "common.hpp"

namespace tubepw {

// Gauss-Legendre nodes/weights on [-1,1] by Newton iteration on P_n.
// Computed fresh per call; orders stay small (<= 64) so this is cheap
// compared to any integrand we feed it.
struct GaussRule {
    rvec nodes;
    rvec weights;
};

inline GaussRule gauss_legendre(int n) {
    require(n >= 1, errc::bad_parameters, "quadrature order must be >= 1");
    GaussRule r;
    r.nodes.resize(n);
    r.weights.resize(n);
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double x = std::cos(pi * (i + 0.75) / (n + 0.5));
        double pp = 0.0;
        for (int it = 0; it < 64; ++it) {
            double p0 = 1.0, p1 = 0.0;
            for (int j = 0; j < n; ++j) {
                double p2 = p1;
                p1 = p0;
                p0 = ((2.0 * j + 1.0) * x * p1 - j * p2) / (j + 1);
            }
            pp = n * (x * p0 - p1) / (x * x - 1.0);
            double dx = p0 / pp;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        r.nodes[i] = -x;
        r.nodes[n - 1 - i] = x;
        r.weights[i] = 2.0 / ((1.0 - x * x) * pp * pp);
        r.weights[n - 1 - i] = r.weights[i];
    }
    return r;
}

// Composite Gauss-Legendre over [a,b] with `panels` equal panels.
template <typename F>
auto integrate_gl(F&& f, double a, double b, int panels, int order = 16)
    -> decltype(f(0.0)) {
    using R = decltype(f(0.0));
    GaussRule g = gauss_legendre(order);
    std::vector<R> vals;
    vals.reserve(static_cast<std::size_t>(panels) * order);
    double h = (b - a) / panels;
    for (int p = 0; p < panels; ++p) {
        double lo = a + p * h;
        double mid = lo + 0.5 * h;
        for (int k = 0; k < order; ++k)
            vals.push_back(f(mid + 0.5 * h * g.nodes[k]) * (0.5 * h * g.weights[k]));
    }
    return pairwise_sum(std::span<const R>(vals));
}

// Same, in u = log(rho): integrates f over (rho_lo, rho_hi) against d(rho),
// suited to power-law-times-exponential radial integrands on cones.
template <typename F>
auto integrate_log(F&& f, double rho_lo, double rho_hi, int panels, int order = 16)
    -> decltype(f(0.0)) {
    require(rho_lo > 0 && rho_hi > rho_lo, errc::bad_parameters, "log rule needs 0 < lo < hi");
    return integrate_gl(
        [&](double u) {
            double rho = std::exp(u);
            return f(rho) * rho;
        },
        std::log(rho_lo), std::log(rho_hi), panels, order);
}

// Tail integral of g over [X, +inf) via the substitution x = X/u, u in (0,1].
// Only safe for non-oscillatory integrands decaying at least like 1/x^2.
template <typename F>
auto integrate_tail_inverse(F&& g, double X, int panels = 16, int order = 16)
    -> decltype(g(0.0)) {
    return integrate_gl(
        [&](double u) {
            double x = X / u;
            return g(x) * x * x / X;
        },
        1e-12, 1.0, panels, order);
}

}  // namespace tubepw
