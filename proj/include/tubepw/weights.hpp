#pragma once

#include <map>

#include "cone.hpp"

namespace tubepw {

// Weight family psi in C(B); the space weight is e^{-2 pi psi(y)}.
// Families with closed-form asymptotic slope R_psi are first-class; tabulated
// weights carry an estimated slope that downstream containment checks widen.
struct WeightFn {
    enum class Kind { zero, log_power, linear, tabulated };
    Kind kind = Kind::zero;
    double alpha = 0.0;  // log_power: psi(y) = -(alpha / 4 pi) log|y|
    double rate = 0.0;   // linear:    psi(y) = rate * |y|
    // tabulated: regular grid on a box with multilinear interpolation
    std::vector<rvec> grid_axes;  // per-axis sorted coordinates
    rvec values;                  // row-major
    BaseRegion domain;

    static WeightFn zero(BaseRegion dom) {
        WeightFn w;
        w.kind = Kind::zero;
        w.domain = std::move(dom);
        return w;
    }
    static WeightFn log_power(double a, BaseRegion dom) {
        WeightFn w;
        w.kind = Kind::log_power;
        w.alpha = a;
        w.domain = std::move(dom);
        return w;
    }
    static WeightFn linear(double r, BaseRegion dom) {
        require(r >= 0, errc::bad_parameters, "linear weight rate must be nonnegative");
        WeightFn w;
        w.kind = Kind::linear;
        w.rate = r;
        w.domain = std::move(dom);
        return w;
    }
    static WeightFn tabulated(std::vector<rvec> axes, rvec vals, BaseRegion dom) {
        WeightFn w;
        w.kind = Kind::tabulated;
        w.grid_axes = std::move(axes);
        w.values = std::move(vals);
        w.domain = std::move(dom);
        std::size_t total = 1;
        for (const rvec& ax : w.grid_axes) {
            require(ax.size() >= 2 && std::is_sorted(ax.begin(), ax.end()),
                    errc::bad_parameters, "tabulated axes must be sorted, length >= 2");
            total *= ax.size();
        }
        require(total == w.values.size(), errc::bad_parameters, "tabulated value count mismatch");
        return w;
    }
};

namespace detail {

inline double interp_multilinear(const WeightFn& w, std::span<const double> y) {
    const int n = static_cast<int>(w.grid_axes.size());
    std::vector<int> i0(n);
    rvec frac(n);
    for (int d = 0; d < n; ++d) {
        const rvec& ax = w.grid_axes[d];
        require(y[d] >= ax.front() - 1e-12 && y[d] <= ax.back() + 1e-12, errc::out_of_domain,
                "point outside tabulated grid");
        auto it = std::upper_bound(ax.begin(), ax.end(), y[d]);
        int hi = std::clamp<int>(static_cast<int>(it - ax.begin()), 1,
                                 static_cast<int>(ax.size()) - 1);
        i0[d] = hi - 1;
        frac[d] = (y[d] - ax[hi - 1]) / (ax[hi] - ax[hi - 1]);
    }
    double out = 0.0;
    for (int corner = 0; corner < (1 << n); ++corner) {
        double wgt = 1.0;
        std::size_t idx = 0;
        for (int d = 0; d < n; ++d) {
            int bit = (corner >> d) & 1;
            wgt *= bit ? frac[d] : 1.0 - frac[d];
            idx = idx * w.grid_axes[d].size() + (i0[d] + bit);
        }
        out += wgt * w.values[idx];
    }
    return out;
}

}  // namespace detail

inline double eval(const WeightFn& w, std::span<const double> y) {
    switch (w.kind) {
        case WeightFn::Kind::zero:
            return 0.0;
        case WeightFn::Kind::log_power: {
            double r = norm2(y);
            require(r > 0, errc::out_of_domain, "log-power weight undefined at 0");
            return -(w.alpha / (4.0 * pi)) * std::log(r);
        }
        case WeightFn::Kind::linear:
            return w.rate * norm2(y);
        case WeightFn::Kind::tabulated:
            return detail::interp_multilinear(w, y);
    }
    return 0.0;
}

struct SlopeEstimate {
    double value = 0.0;
    bool estimated = false;  // true for tabulated weights (sampled, not analytic)
};

// R_psi = limsup psi(y)/|y| along the base. Analytic per family; tabulated
// weights are scanned on their outermost radial shell.
inline SlopeEstimate slope(const WeightFn& w) {
    switch (w.kind) {
        case WeightFn::Kind::zero:
        case WeightFn::Kind::log_power:
            return {0.0, false};
        case WeightFn::Kind::linear:
            return {w.rate, false};
        case WeightFn::Kind::tabulated: {
            // max psi/|y| over the top-decile radius grid nodes
            std::vector<std::size_t> sizes;
            for (const rvec& ax : w.grid_axes) sizes.push_back(ax.size());
            double rmax = 0.0;
            std::vector<std::pair<double, double>> shell;  // (radius, psi)
            std::size_t total = w.values.size();
            for (std::size_t flat = 0; flat < total; ++flat) {
                std::size_t rem = flat;
                rvec y(sizes.size());
                for (int d = static_cast<int>(sizes.size()) - 1; d >= 0; --d) {
                    y[d] = w.grid_axes[d][rem % sizes[d]];
                    rem /= sizes[d];
                }
                double r = norm2(y);
                rmax = std::max(rmax, r);
                shell.emplace_back(r, w.values[flat]);
            }
            double best = 0.0;
            for (auto& [r, v] : shell)
                if (r >= 0.9 * rmax && r > 0) best = std::max(best, v / r);
            return {best, true};
        }
    }
    return {0.0, false};
}

// psi_delta(y0) = max psi over the closed ball of radius delta, exact for the
// radial families (endpoint logic), grid max with one refinement otherwise.
inline double ball_max(const WeightFn& w, std::span<const double> y0, double delta) {
    require(delta > 0, errc::bad_parameters, "delta must be positive");
    require(w.domain.contains_ball(y0, delta), errc::ball_not_in_domain,
            "closed ball leaves the weight domain");
    double r0 = norm2(y0);
    switch (w.kind) {
        case WeightFn::Kind::zero:
            return 0.0;
        case WeightFn::Kind::linear:
            return w.rate * (r0 + delta);
        case WeightFn::Kind::log_power: {
            // psi = -(alpha/4pi) log r is radially monotone
            double r = w.alpha > 0 ? r0 - delta : r0 + delta;
            require(r > 0, errc::ball_not_in_domain, "log-power ball touches the origin");
            return -(w.alpha / (4.0 * pi)) * std::log(r);
        }
        case WeightFn::Kind::tabulated: {
            const int n = w.domain.dim;
            double best = -std::numeric_limits<double>::infinity();
            rvec best_at(y0.begin(), y0.end());
            const int side = 9;
            rvec probe(n);
            auto sweep = [&](const rvec& c, double h) {
                std::vector<int> ix(n, 0);
                while (true) {
                    double d2 = 0.0;
                    for (int d = 0; d < n; ++d) {
                        probe[d] = c[d] + h * (2.0 * ix[d] / (side - 1) - 1.0);
                        d2 += (probe[d] - y0[d]) * (probe[d] - y0[d]);
                    }
                    if (d2 <= delta * delta) {
                        double v = eval(w, probe);
                        if (v > best) {
                            best = v;
                            best_at = probe;
                        }
                    }
                    int d = 0;
                    while (d < n && ++ix[d] == side) ix[d++] = 0;
                    if (d == n) break;
                }
            };
            sweep(rvec(y0.begin(), y0.end()), delta);
            sweep(best_at, delta / (side - 1));  // one refinement around the coarse argmax
            return best;
        }
    }
    return 0.0;
}

// e^{-2 pi psi(y)} with overflow clamp at exp(700); callers can surface the flag.
struct WeightFactor {
    double value = 1.0;
    bool saturated = false;
};

inline WeightFactor weight_factor(const WeightFn& w, std::span<const double> y) {
    double e = -two_pi * eval(w, y);
    if (e > 700.0) return {std::exp(700.0), true};
    return {std::exp(e), false};
}

}  // namespace tubepw
