#pragma once

#include "slice_analysis.hpp"
#include "weights.hpp"

namespace tubepw {

// (p, s) exponent pair with the regime tag of the three displayed norms.
struct NormParams {
    double p = 2.0;
    double s = 1.0;  // use infinity() for the sup regimes

    enum class Regime { finite_finite, p_finite_s_inf, both_inf };

    Regime regime() const {
        bool pi = std::isinf(p), si = std::isinf(s);
        require(p > 0 && s > 0, errc::bad_parameters, "p, s must lie in (0, inf]");
        require(!(pi && !si), errc::bad_parameters, "p = inf requires s = inf");
        if (pi && si) return Regime::both_inf;
        if (si) return Regime::p_finite_s_inf;
        return Regime::finite_finite;
    }
    // 1/p + 1/q = 1 for 1 < p < inf
    double conjugate() const {
        require(p > 1.0 && !std::isinf(p), errc::bad_parameters,
                "conjugate exponent needs 1 < p < inf");
        return p / (p - 1.0);
    }
};

// ---- base-region quadrature nodes ----

struct BaseNodes {
    std::vector<rvec> y;
    rvec w;
};

namespace detail {

inline void cone_angular_nodes(const ConeSpec& cone, int count, std::vector<rvec>& dirs,
                               rvec& wts) {
    if (cone.dim == 1) {
        dirs.push_back(normalized(cone.generators[0]));
        wts.push_back(1.0);
        return;
    }
    if (cone.dim == 2) {
        rvec u0 = normalized(cone.generators[0]);
        double th_lo = std::atan2(u0[1], u0[0]);
        double span = 0.0;
        for (const rvec& g : cone.generators) {
            rvec u = normalized(g);
            double rel = std::atan2(u[1], u[0]) - th_lo;
            while (rel < 0) rel += two_pi;
            if (rel <= pi + 1e-12) span = std::max(span, rel);
        }
        GaussRule g = gauss_legendre(std::max(4, count));
        for (int k = 0; k < static_cast<int>(g.nodes.size()); ++k) {
            double th = th_lo + span * 0.5 * (1.0 + g.nodes[k]);
            dirs.push_back({std::cos(th), std::sin(th)});
            wts.push_back(0.5 * span * g.weights[k]);
        }
        return;
    }
    require(cone.simplicial && cone.dim == 3, errc::unsupported_non_simplicial,
            "angular quadrature needs a simplicial cone for n = 3");
    // Duffy map of the unit square onto the generator simplex; solid-angle
    // Jacobian via the projector identity de = (I - ee^T) dm / |m|
    GaussRule g = gauss_legendre(std::max(4, count / 2));
    const std::vector<rvec>& gen = cone.generators;
    for (int iu = 0; iu < static_cast<int>(g.nodes.size()); ++iu)
        for (int iv = 0; iv < static_cast<int>(g.nodes.size()); ++iv) {
            double u = 0.5 * (1.0 + g.nodes[iu]);
            double v = 0.5 * (1.0 + g.nodes[iv]);
            double wq = 0.25 * g.weights[iu] * g.weights[iv] * u;  // Duffy factor
            double l1 = 1.0 - u, l2 = u * (1.0 - v), l3 = u * v;
            rvec m(3, 0.0), ma(3, 0.0), mb(3, 0.0);
            for (int d = 0; d < 3; ++d) {
                m[d] = l1 * gen[0][d] + l2 * gen[1][d] + l3 * gen[2][d];
                // d/du with v fixed, d/dv with u fixed (before Duffy weight)
                ma[d] = -gen[0][d] + (1.0 - v) * gen[1][d] + v * gen[2][d];
                mb[d] = u * (-gen[1][d] + gen[2][d]);
            }
            double mn = norm2(m);
            rvec e = scaled(m, 1.0 / mn);
            auto proj = [&](const rvec& dm) {
                rvec p(3);
                double ed = dot(e, dm);
                for (int d = 0; d < 3; ++d) p[d] = (dm[d] - ed * e[d]) / mn;
                return p;
            };
            rvec ta = proj(ma), tb = proj(mb);
            rvec cr = {ta[1] * tb[2] - ta[2] * tb[1], ta[2] * tb[0] - ta[0] * tb[2],
                       ta[0] * tb[1] - ta[1] * tb[0]};
            double jac = norm2(cr) / u;  // Duffy u already in wq
            dirs.push_back(e);
            wts.push_back(wq * jac);
        }
}

}  // namespace detail

// Quadrature nodes over a base region. Cone bases use radial (log-spaced
// Gauss-Legendre) times angular factorization.
inline BaseNodes base_quadrature(const BaseRegion& base, int points_per_axis) {
    BaseNodes out;
    const int n = base.dim;
    switch (base.kind) {
        case BaseRegion::Kind::box: {
            GaussRule g = gauss_legendre(points_per_axis);
            std::vector<int> ix(n, 0);
            while (true) {
                rvec y(n);
                double w = 1.0;
                for (int d = 0; d < n; ++d) {
                    double half = 0.5 * (base.hi[d] - base.lo[d]);
                    y[d] = base.lo[d] + half * (1.0 + g.nodes[ix[d]]);
                    w *= half * g.weights[ix[d]];
                }
                out.y.push_back(std::move(y));
                out.w.push_back(w);
                int d = 0;
                while (d < n && ++ix[d] == points_per_axis) ix[d++] = 0;
                if (d == n) break;
            }
            return out;
        }
        case BaseRegion::Kind::ball: {
            // tensor grid over the bounding box, indicator-masked
            GaussRule g = gauss_legendre(points_per_axis);
            std::vector<int> ix(n, 0);
            while (true) {
                rvec y(n);
                double w = 1.0;
                for (int d = 0; d < n; ++d) {
                    y[d] = base.center[d] + base.radius * g.nodes[ix[d]];
                    w *= base.radius * g.weights[ix[d]];
                }
                if (dist2(y, base.center) < base.radius) {
                    out.y.push_back(std::move(y));
                    out.w.push_back(w);
                }
                int d = 0;
                while (d < n && ++ix[d] == points_per_axis) ix[d++] = 0;
                if (d == n) break;
            }
            return out;
        }
        case BaseRegion::Kind::truncated_cone: {
            std::vector<rvec> dirs;
            rvec awts;
            detail::cone_angular_nodes(base.cone, points_per_axis, dirs, awts);
            // composite log-radial rule; wide truncations span many decades
            GaussRule g = gauss_legendre(16);
            int panels = std::max(2, points_per_axis / 8);
            double ulo = std::log(base.rho_min), uhi = std::log(base.rho_max);
            double h = (uhi - ulo) / panels;
            for (std::size_t a = 0; a < dirs.size(); ++a)
                for (int pnl = 0; pnl < panels; ++pnl)
                    for (int k = 0; k < 16; ++k) {
                        double u = ulo + h * pnl + 0.5 * h * (1.0 + g.nodes[k]);
                        double rho = std::exp(u);
                        double w = awts[a] * 0.5 * h * g.weights[k] *
                                   std::pow(rho, n);  // rho^{n-1} area element, rho du
                        out.y.push_back(scaled(dirs[a], rho));
                        out.w.push_back(w);
                    }
            return out;
        }
    }
    return out;
}

// ---- slice and mixed norms ----

struct SliceNormResult {
    double value = 0.0;          // (int |F_y|^p dx)^{1/p}, or the grid sup for p = inf
    double p_integral = 0.0;     // int |F_y|^p dx (finite p)
    double tail_added = 0.0;     // analytic tail beyond the grid, when applicable
    double edge_ratio = 0.0;
};

inline SliceNormResult slice_norm_detailed(const TubeFunction& F, const rvec& y, double p,
                                           const QuadSpec& q) {
    require(p > 0, errc::bad_parameters, "p must be positive");
    require(F.base.contains(y), errc::not_in_base, "height not strictly inside the base");
    const double L = q.slice_halfwidth;
    const int M = q.slice_points;
    const double dx = 2.0 * L / M;
    const int n = F.dim;
    SliceNormResult out;
    if (n == 1) {
        rvec amag(M);
        double mx = 0.0;
        for (int m = 0; m < M; ++m) {
            amag[m] = std::abs(F.eval({cplx(-L + m * dx, y[0])}));
            mx = std::max(mx, amag[m]);
        }
        double edge = 0.0, mid = 0.0;
        for (int m = 0; m < 8; ++m) edge = std::max({edge, amag[m], amag[M - 1 - m]});
        for (int m = 0; m < 8; ++m)
            mid = std::max({mid, amag[M / 4 + m], amag[3 * M / 4 - m]});
        out.edge_ratio = mx > 0 ? edge / mx : 0.0;
        if (std::isinf(p)) {
            out.value = mx;
            return out;
        }
        // for p <= 1 the tail map below does not apply; reject slices that show
        // no decay between mid-grid and the edge (truncated values would lie)
        require(p > 1.0 || edge <= 0.995 * mid || out.edge_ratio < 1e-13,
                errc::slice_tail_too_large,
                "slice does not decay toward the grid edge (p <= 1 integral untrusted)");
        rvec terms(M);
        for (int m = 0; m < M; ++m) terms[m] = std::pow(amag[m], p) * dx;
        out.p_integral = psum(terms);
        if (p > 1.0 && out.edge_ratio > 1e-13) {
            // positive non-oscillatory tails via x = L/u^2, which keeps the
            // transformed integrand bounded down to p = 3/2
            out.tail_added = integrate_gl(
                [&](double u) {
                    double x = L / (u * u);
                    double g = std::pow(std::abs(F.eval({cplx(x, y[0])})), p) +
                               std::pow(std::abs(F.eval({cplx(-x, y[0])})), p);
                    return g * 2.0 * L / (u * u * u);
                },
                1e-9, 1.0, 32);
            out.p_integral += out.tail_added;
        }
        out.value = std::pow(out.p_integral, 1.0 / p);
        return out;
    }
    // n >= 2 tensor grid
    std::vector<int> ix(n, 0);
    cvec z(n);
    double mx = 0.0, edge = 0.0;
    rvec terms;
    terms.reserve(static_cast<std::size_t>(std::pow(M, n)));
    bool sup = std::isinf(p);
    while (true) {
        bool on_edge = false;
        for (int d = 0; d < n; ++d) {
            z[d] = cplx(-L + ix[d] * dx, y[d]);
            if (ix[d] == 0 || ix[d] == M - 1) on_edge = true;
        }
        double v = std::abs(F.eval(z));
        mx = std::max(mx, v);
        if (on_edge) edge = std::max(edge, v);
        if (!sup) terms.push_back(std::pow(v, p) * std::pow(dx, n));
        int d = n - 1;
        while (d >= 0 && ++ix[d] == M) ix[d--] = 0;
        if (d < 0) break;
    }
    out.edge_ratio = mx > 0 ? edge / mx : 0.0;
    if (sup) {
        out.value = mx;
    } else {
        require(out.edge_ratio <= q.slice_edge_tol, errc::slice_tail_too_large,
                "slice does not decay at the grid edge (no n >= 2 tail handling)");
        out.p_integral = psum(terms);
        out.value = std::pow(out.p_integral, 1.0 / p);
    }
    return out;
}

inline double slice_norm(const TubeFunction& F, const rvec& y, double p, const QuadSpec& q) {
    return slice_norm_detailed(F, y, p, q).value;
}

struct NormReport {
    double value = 0.0;
    NormParams::Regime regime = NormParams::Regime::finite_finite;
    bool overflow = false;       // weight clamp engaged somewhere
    double max_slice_edge = 0.0;
    int y_nodes = 0;
};

// ||F||_{A^{p,s}(B,psi)} by regime-correct quadrature over the base sampler.
inline NormReport mixed_norm_detailed(const TubeFunction& F, const BaseRegion& base,
                                      const WeightFn& w, const NormParams& np,
                                      const QuadSpec& q) {
    NormReport rep;
    rep.regime = np.regime();
    BaseNodes nodes = base_quadrature(base, q.y_points);
    rep.y_nodes = static_cast<int>(nodes.y.size());
    switch (rep.regime) {
        case NormParams::Regime::finite_finite: {
            rvec terms(nodes.y.size());
            for (std::size_t i = 0; i < nodes.y.size(); ++i) {
                SliceNormResult s = slice_norm_detailed(F, nodes.y[i], np.p, q);
                rep.max_slice_edge = std::max(rep.max_slice_edge, s.edge_ratio);
                WeightFactor wf = weight_factor(w, nodes.y[i]);
                rep.overflow = rep.overflow || wf.saturated;
                terms[i] =
                    nodes.w[i] * std::pow(std::pow(wf.value, np.p) * s.p_integral, np.s);
            }
            rep.value = std::pow(psum(terms), 1.0 / (np.s * np.p));
            return rep;
        }
        case NormParams::Regime::p_finite_s_inf: {
            double best = 0.0;
            for (std::size_t i = 0; i < nodes.y.size(); ++i) {
                SliceNormResult s = slice_norm_detailed(F, nodes.y[i], np.p, q);
                rep.max_slice_edge = std::max(rep.max_slice_edge, s.edge_ratio);
                WeightFactor wf = weight_factor(w, nodes.y[i]);
                rep.overflow = rep.overflow || wf.saturated;
                best = std::max(best, wf.value * s.value);
            }
            rep.value = best;
            return rep;
        }
        case NormParams::Regime::both_inf: {
            double best = 0.0;
            for (std::size_t i = 0; i < nodes.y.size(); ++i) {
                SliceNormResult s = slice_norm_detailed(
                    F, nodes.y[i], std::numeric_limits<double>::infinity(), q);
                WeightFactor wf = weight_factor(w, nodes.y[i]);
                rep.overflow = rep.overflow || wf.saturated;
                best = std::max(best, wf.value * s.value);
            }
            rep.value = best;
            return rep;
        }
    }
    return rep;
}

inline double mixed_norm(const TubeFunction& F, const BaseRegion& base, const WeightFn& w,
                         const NormParams& np, const QuadSpec& q) {
    return mixed_norm_detailed(F, base, w, np, q).value;
}

// ---- dual-side weighted norm (Corollary 2) ----

// K_alpha(t) = int_Gamma e^{-4 pi y.t} |y|^alpha dy. The radial integral is a
// Gamma function; only the angular factor is numeric for n >= 2.
inline double dual_kernel(const ConeSpec& cone, std::span<const double> t, double alpha,
                          int angular_points = 32) {
    const int n = cone.dim;
    std::vector<rvec> dirs;
    rvec awts;
    detail::cone_angular_nodes(cone, angular_points, dirs, awts);
    double gam = std::tgamma(alpha + n);
    rvec terms(dirs.size());
    for (std::size_t a = 0; a < dirs.size(); ++a) {
        double et = dot(dirs[a], t);
        require(et > 0, errc::kernel_divergence,
                "dual kernel diverges: t is not interior to the dual cone");
        terms[a] = awts[a] * gam / std::pow(4.0 * pi * et, alpha + n);
    }
    return psum(terms);
}

struct DualNormOptions {
    double t_hi = 1e6;
    int radial_points = 256;
    int angular_points = 32;
};

namespace detail {

// int_0^hi g(r) r^{-beta} dr with g smooth, 0 < beta < 1, via the graded map
// r = v^m that regularizes the endpoint exactly
template <typename G>
double graded_radial_integral(G&& g, double beta, double hi, int panels) {
    int m = std::max(2, static_cast<int>(std::ceil(4.0 / (1.0 - beta))));
    double vhi = std::pow(hi, 1.0 / m);
    return integrate_gl(
        [&](double v) {
            double r = std::pow(v, m);
            return g(r) * m * std::pow(v, m * (1.0 - beta) - 1.0);
        },
        0.0, vhi, panels);
}

}  // namespace detail

// ||f||_{L^2_{alpha+1}(Gamma*)} = ( int_{Gamma*} |f(t)|^2 K_alpha(t) dt )^{1/2};
// the radial kernel power is t^{-(alpha+1)} along each dual ray.
inline double dual_weighted_norm(const SpectralDensity& f, double alpha, const ConeSpec& cone,
                                 const QuadSpec& q, const DualNormOptions& opt = {}) {
    require(alpha > -1.0, errc::alpha_out_of_range, "alpha must exceed -1");
    const int n = cone.dim;
    ConeSpec dual_cone = dual(cone);
    (void)q;
    const double beta = alpha + 1.0;
    if (beta >= 1.0) {
        // t^{-beta} is not integrable at the vertex unless f vanishes there
        rvec probe(n, 0.0);
        rvec inward(n, 0.0);
        for (const rvec& g : dual_cone.generators) {
            rvec u = normalized(g);
            for (int d = 0; d < n; ++d) inward[d] += u[d];
        }
        for (int d = 0; d < n; ++d) probe[d] = 1e-7 * inward[d];
        require(std::abs(eval_density(f, probe)) < 1e-12, errc::divergent_norm,
                "dual-side norm diverges at the cone vertex for alpha >= 0");
    }
    if (n == 1) {
        double sgn = dual_cone.generators[0][0] > 0 ? 1.0 : -1.0;
        double gam = std::tgamma(alpha + 1.0);
        auto g = [&](double r) {
            double fv = eval_density(f, rvec{sgn * r});
            return fv * fv * gam / std::pow(4.0 * pi, beta);
        };
        double v = beta < 1.0
                       ? detail::graded_radial_integral(g, beta, opt.t_hi, opt.radial_points / 4)
                       : integrate_log([&](double r) { return g(r) * std::pow(r, -beta); },
                                       1e-18, opt.t_hi, opt.radial_points / 8, 16);
        return std::sqrt(v);
    }
    std::vector<rvec> dirs;
    rvec awts;
    detail::cone_angular_nodes(dual_cone, opt.angular_points, dirs, awts);
    rvec terms;
    for (std::size_t a = 0; a < dirs.size(); ++a) {
        // kernel K_alpha(r e) = r^{-(alpha+n)} K_alpha(e); with the r^{n-1}
        // area element the radial power is again r^{-beta}
        double ker_dir = dual_kernel(cone, dirs[a], alpha, opt.angular_points);
        auto g = [&](double r) {
            rvec t = scaled(dirs[a], r);
            double fv = eval_density(f, t);
            return fv * fv * ker_dir;
        };
        double v = beta < 1.0
                       ? detail::graded_radial_integral(g, beta, opt.t_hi, opt.radial_points / 4)
                       : integrate_log([&](double r) { return g(r) * std::pow(r, -beta); },
                                       1e-18, opt.t_hi, opt.radial_points / 8, 16);
        terms.push_back(awts[a] * v);
    }
    return std::sqrt(psum(terms));
}

// sampled-density overload (n = 1 recovery grids): product integration of
// the singular kernel over grid cells, |f|^2 held at the midpoint sample
inline double dual_weighted_norm(const RecoveredDensity& f, double alpha,
                                 const ConeSpec& cone) {
    require(alpha > -1.0, errc::alpha_out_of_range, "alpha must exceed -1");
    require(!f.t.empty(), errc::bad_parameters, "sampled dual norm needs a 1-D grid");
    double sgn = dual(cone).generators[0][0] > 0 ? 1.0 : -1.0;
    const double beta = alpha + 1.0;
    require(beta < 1.0, errc::divergent_norm,
            "sampled dual norm implemented for alpha < 0 (integrable vertex)");
    double c = std::tgamma(beta) / std::pow(4.0 * pi, beta) / (1.0 - beta);
    rvec terms;
    bool first = true;
    for (std::size_t i = 0; i < f.t.size(); ++i) {
        double r = sgn * f.t[i];
        if (r < 0.4 * f.dt) continue;
        double fv = std::abs(f.values[i]);
        // keep rows whose noise is small absolutely or relative to the value
        if (!f.noise.empty() && f.noise[i] > std::max(1e-9, 0.01 * fv)) continue;
        double lo = std::max(0.0, r - 0.5 * f.dt), hi = r + 0.5 * f.dt;
        if (first) lo = 0.0;  // extend the first cell to the vertex
        first = false;
        double cell = c * (std::pow(hi, 1.0 - beta) - std::pow(lo, 1.0 - beta));
        terms.push_back(fv * fv * cell);
    }
    return std::sqrt(psum(terms));
}

// ---- support sets U_alpha(B, psi) ----

struct SupportSetQuery {
    rvec t;
    double alpha = 1.0;
    enum class Verdict { converges, diverges, inconclusive } verdict = Verdict::inconclusive;
    double min_ray_exponent = 0.0;  // certificate: min over sampled rays of t.e + slope
    double margin = 1e-6;
    double integral_value = -1.0;  // direct integral for bounded bases
    bool slope_widened = false;    // estimated (tabulated) slope honored with 5% band
};

inline SupportSetQuery support_membership(const rvec& t, double alpha, const BaseRegion& base,
                                          const WeightFn& w, const QuadSpec& q,
                                          double margin = 1e-6) {
    require(alpha > 0, errc::bad_parameters, "alpha must be positive (or infinity)");
    SupportSetQuery out;
    out.t = t;
    out.alpha = alpha;
    out.margin = margin;

    if (base.kind != BaseRegion::Kind::truncated_cone) {
        // bounded base: the integral is finite for every t; compute it
        out.verdict = SupportSetQuery::Verdict::converges;
        if (!std::isinf(alpha)) {
            BaseNodes nodes = base_quadrature(base, q.y_points);
            rvec terms(nodes.y.size());
            for (std::size_t i = 0; i < nodes.y.size(); ++i) {
                double e = -two_pi * alpha * (dot(t, nodes.y[i]) + eval(w, nodes.y[i]));
                terms[i] = nodes.w[i] * std::exp(std::min(e, 700.0));
            }
            out.integral_value = psum(terms);
        }
        return out;
    }

    SlopeEstimate sl = slope(w);
    double s_lo = sl.value, s_hi = sl.value;
    if (sl.estimated) {
        out.slope_widened = true;
        s_lo = sl.value * 0.95;
        s_hi = sl.value * 1.05;
    }
    double lam_lo = std::numeric_limits<double>::infinity();
    double lam_hi = std::numeric_limits<double>::infinity();
    for (const rvec& e : cone_directions(base.cone, 64)) {
        lam_lo = std::min(lam_lo, dot(t, e) + s_lo);
        lam_hi = std::min(lam_hi, dot(t, e) + s_hi);
    }
    out.min_ray_exponent = lam_lo;
    if (lam_lo > margin)
        out.verdict = SupportSetQuery::Verdict::converges;
    else if (lam_hi < -margin)
        out.verdict = SupportSetQuery::Verdict::diverges;
    else
        out.verdict = SupportSetQuery::Verdict::inconclusive;
    return out;
}

}  // namespace tubepw
