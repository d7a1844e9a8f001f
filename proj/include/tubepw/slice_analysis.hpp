#pragma once

// Slice transforms: fhat(t) = int F(x+iy) e^{-2 pi i x t} dx on the uniform
// slice grid, and density recovery f(t) = e^{2 pi y.t} fhat(t).
//
// The FFT handles [-L, L); for slices with algebraic tails (half-plane
// kernels decay like 1/x) the missing lattice tails are added analytically:
//   * moderate |t|: Poisson summation of the tail lattice reduces to the
//     boundary-term series  sum_k G^(k)(edge) sigma_{k+1}(t)/(2 pi i)^{k+1},
//     where sigma_m(t) = sum_{l in Z} (t + l/dx)^{-m} has closed cotangent
//     forms, plus the half-sample jump average at the cut;
//   * small |t| (series edge would exceed L): those few fhat values are
//     recomputed by panelled quadrature out to X ~ K/(pi |t|) with an
//     integration-by-parts remainder at +-X.
// Edge derivatives come from Cauchy circles inside the holomorphy margin of
// the tube function; all series use optimal (smallest-term) truncation.

#include "transforms.hpp"

namespace tubepw {

namespace detail {

struct DerivPack {
    cvec deriv;   // g^(k)(z0), k = 0..K-1
    rvec noise;   // absolute accuracy floor per order
};

template <typename Fn>
DerivPack cauchy_derivatives(Fn&& g, cplx z0, int K, double max_radius, double ref_mag) {
    double r = std::min(max_radius, 2.0);
    const int NP = 64;
    cvec vals(NP);
    double mx = 0.0;
    for (int attempt = 0; attempt < 8; ++attempt) {
        mx = 0.0;
        for (int m = 0; m < NP; ++m) {
            double th = two_pi * m / NP;
            vals[m] = g(z0 + r * cplx(std::cos(th), std::sin(th)));
            mx = std::max(mx, std::abs(vals[m]));
        }
        if (mx <= 100.0 * (ref_mag + 1e-300) || r < 1e-3) break;
        r *= 0.5;  // entire functions can grow fast on large circles
    }
    DerivPack p;
    p.deriv.resize(K);
    p.noise.resize(K);
    double fact = 1.0;
    for (int k = 0; k < K; ++k) {
        if (k > 0) fact *= k;
        cplx s = 0.0;
        for (int m = 0; m < NP; ++m) {
            double th = -two_pi * k * m / NP;
            s += vals[m] * cplx(std::cos(th), std::sin(th));
        }
        p.deriv[k] = s * fact / (NP * std::pow(r, k));
        p.noise[k] = 40.0 * std::numeric_limits<double>::epsilon() * mx * fact / std::pow(r, k);
    }
    return p;
}

// asymptotic series sum with optimal truncation; returns value and the
// magnitude of the first neglected term as a residual estimate
inline std::pair<cplx, double> truncated_series(const DerivPack& p, const cvec& weights) {
    cplx tot = 0.0;
    double prev = std::numeric_limits<double>::infinity();
    double resid = 0.0;
    for (std::size_t k = 0; k < weights.size() && k < p.deriv.size(); ++k) {
        cplx term = p.deriv[k] * weights[k];
        double mag = std::abs(term);
        if (std::abs(p.deriv[k]) < p.noise[k] || mag > prev) {
            resid = std::min(mag, prev);
            return {tot, resid};
        }
        tot += term;
        prev = mag;
        resid = mag;
    }
    return {tot, resid};
}

// sigma_m(t) = sum_{l in Z} (t + l nu)^{-m} via derivatives of pi cot(pi t/nu)/nu;
// P_1(c) = c, P_{m+1} = P_m'(c) (1 + c^2) / m, sigma_m = (pi/nu)^m P_m(c).
struct SigmaTable {
    std::vector<rvec> polys;
    double nu;
    SigmaTable(int K, double nu_) : nu(nu_) {
        polys.push_back({0.0, 1.0});
        for (int m = 1; m < K; ++m) {
            const rvec& P = polys.back();
            rvec dP(P.size() > 1 ? P.size() - 1 : 1, 0.0);
            for (std::size_t i = 1; i < P.size(); ++i) dP[i - 1] = P[i] * static_cast<double>(i);
            rvec next(dP.size() + 2, 0.0);
            for (std::size_t i = 0; i < dP.size(); ++i) {
                next[i] += dP[i] / m;
                next[i + 2] += dP[i] / m;
            }
            polys.push_back(std::move(next));
        }
    }
    rvec values(double t) const {
        double c = 1.0 / std::tan(pi * t / nu);
        rvec out(polys.size());
        for (std::size_t m = 0; m < polys.size(); ++m) {
            double v = 0.0;
            for (std::size_t i = polys[m].size(); i-- > 0;) v = v * c + polys[m][i];
            out[m] = v * std::pow(pi / nu, static_cast<double>(m + 1));
        }
        return out;
    }
};

// composite GL node set over [-X, X]: inner panels resolve the integrand
// scale, outer panels grow geometrically (capped by the oscillation length)
struct NodeSet {
    rvec x, w;
};

inline NodeSet slab_nodes(double L, double X, double inner_scale, double max_wave) {
    NodeSet ns;
    GaussRule g = gauss_legendre(16);
    auto add_panel = [&](double lo, double hi) {
        double mid = 0.5 * (lo + hi), half = 0.5 * (hi - lo);
        for (int k = 0; k < 16; ++k) {
            ns.x.push_back(mid + half * g.nodes[k]);
            ns.w.push_back(half * g.weights[k]);
        }
    };
    double pin = std::clamp(std::min(inner_scale, max_wave / 6.0), 1e-3, 2.0);
    int n_in = std::max(8, static_cast<int>(std::ceil(2.0 * L / pin)));
    for (int i = 0; i < n_in; ++i)
        add_panel(-L + 2.0 * L * i / n_in, -L + 2.0 * L * (i + 1) / n_in);
    for (double sgn : {+1.0, -1.0}) {
        double lo = L;
        while (lo < X - 1e-12) {
            double hi = std::min({X, lo * 1.3, lo + max_wave / 6.0});
            if (hi <= lo) hi = X;
            add_panel(sgn > 0 ? lo : -hi, sgn > 0 ? hi : -lo);
            lo = hi;
        }
    }
    return ns;
}

}  // namespace detail

struct SliceAnalysis {
    rvec t;     // ascending frequency grid, spacing 1/(2L)
    cvec fhat;  // corrected slice transform values
    rvec noise;  // per-row absolute accuracy floor of fhat
    double dt = 0.0;
    double noise_floor = 0.0;  // max of noise (summary)
    double edge_ratio = 0.0;   // |F| at the grid edge relative to max|F|
    double max_abs = 0.0;      // max |F| on the slice grid
};

// n = 1 analysis of a slice callable g : complex x -> F(x + i y).
template <typename Fn>
SliceAnalysis analyze_slice_fn(Fn&& g, const QuadSpec& q, double holo_margin,
                               double inner_scale) {
    q.validate();
    const double L = q.slice_halfwidth;
    const int M = q.slice_points;
    const double dx = 2.0 * L / M;
    const double nu = 1.0 / dx;
    const double dt = 1.0 / (2.0 * L);
    const int K = std::max(0, q.tail_order);

    cvec G(M);
    double maxG = 0.0;
    for (int m = 0; m < M; ++m) {
        G[m] = g(cplx(-L + m * dx, 0.0));
        maxG = std::max(maxG, std::abs(G[m]));
    }
    double edge = 0.0;
    for (int m = 0; m < 8 && m < M; ++m)
        edge = std::max({edge, std::abs(G[m]), std::abs(G[M - 1 - m])});

    cvec work = G;
    fft_radix2(work);
    SliceAnalysis out;
    out.t.resize(M);
    out.fhat.resize(M);
    out.dt = dt;
    out.max_abs = maxG;
    out.edge_ratio = maxG > 0 ? edge / maxG : 0.0;
    for (int j = 0; j < M; ++j) {
        int js = j < M / 2 ? j : j - M;                  // signed frequency index
        int pos = js + M / 2;                            // ascending position
        double sign = (js % 2 == 0) ? 1.0 : -1.0;
        out.t[pos] = js * dt;
        out.fhat[pos] = dx * sign * work[j];
    }

    double eps_floor =
        8.0 * std::numeric_limits<double>::epsilon() * std::log2(double(M)) * maxG;
    out.noise.assign(M, eps_floor);

    const bool correct = K > 0 && edge > 1e-13 * (maxG + 1e-300);
    if (correct) {
        // derivative packs at the two lattice cut points
        double ref = edge + 1e-300;
        auto packR = detail::cauchy_derivatives(g, cplx(L, 0.0), K,
                                                std::max(1e-3, 0.8 * holo_margin), ref);
        auto packL = detail::cauchy_derivatives(g, cplx(-(L + dx), 0.0), K,
                                                std::max(1e-3, 0.8 * holo_margin), ref);
        detail::SigmaTable sig(K, nu);
        const double t_switch = K / (pi * L);

        for (int pos = 0; pos < M; ++pos) {
            double tj = out.t[pos];
            if (std::abs(tj) < t_switch) continue;  // handled by quadrature below
            rvec s = sig.values(tj);
            cvec wR(K), wL(K);
            for (int k = 0; k < K; ++k) {
                cplx ipow = std::pow(cplx(0.0, two_pi), k + 1);
                wR[k] = s[k] / ipow;
                wL[k] = -s[k] / ipow;
            }
            auto [vR, rR] = detail::truncated_series(packR, wR);
            auto [vL, rL] = detail::truncated_series(packL, wL);
            cplx phR = std::exp(cplx(0.0, -two_pi * L * tj));
            cplx phL = std::exp(cplx(0.0, two_pi * (L + dx) * tj));
            out.fhat[pos] += (vR + 0.5 * dx * packR.deriv[0]) * phR;
            out.fhat[pos] += (vL + 0.5 * dx * packL.deriv[0]) * phL;
            out.noise[pos] += rR + rL;
        }

        // small-|t| rows: panelled quadrature out to X with IBP remainders
        const double X = std::max(L, K / (pi * dt));
        detail::NodeSet ns = detail::slab_nodes(L, X, inner_scale, 1.0 / dt);
        cvec gn(ns.x.size());
        for (std::size_t i = 0; i < ns.x.size(); ++i) gn[i] = g(cplx(ns.x[i], 0.0));
        auto packXR = detail::cauchy_derivatives(g, cplx(X, 0.0), K,
                                                 std::max(1e-3, 0.8 * holo_margin), ref);
        auto packXL = detail::cauchy_derivatives(g, cplx(-X, 0.0), K,
                                                 std::max(1e-3, 0.8 * holo_margin), ref);
        for (int pos = 0; pos < M; ++pos) {
            double tj = out.t[pos];
            if (std::abs(tj) >= t_switch) continue;
            cvec terms(ns.x.size());
            for (std::size_t i = 0; i < ns.x.size(); ++i) {
                double ph = -two_pi * ns.x[i] * tj;
                terms[i] = gn[i] * ns.w[i] * cplx(std::cos(ph), std::sin(ph));
            }
            cplx core = pairwise_sum(std::span<const cplx>(terms));
            if (tj == 0.0) {
                // paired far tail, non-oscillatory after symmetrization
                cplx tail = integrate_tail_inverse(
                    [&](double x) { return g(cplx(x, 0.0)) + g(cplx(-x, 0.0)); }, X);
                out.fhat[pos] = core + tail;
                continue;
            }
            cvec w(K);
            for (int k = 0; k < K; ++k) w[k] = 1.0 / std::pow(cplx(0.0, two_pi * tj), k + 1);
            auto [vR, rR] = detail::truncated_series(packXR, w);
            auto [vL, rL] = detail::truncated_series(packXL, w);
            out.fhat[pos] = core + vR * std::exp(cplx(0.0, -two_pi * X * tj)) -
                            vL * std::exp(cplx(0.0, two_pi * X * tj));
            out.noise[pos] += rR + rL;
        }
    } else if (!correct) {
        // no corrections: leading truncated-tail estimate applies everywhere
        for (int pos = 0; pos < M; ++pos) out.noise[pos] += edge / pi;
    }
    out.noise_floor = *std::max_element(out.noise.begin(), out.noise.end());
    return out;
}

inline SliceAnalysis analyze_slice(const TubeFunction& F, const rvec& y, const QuadSpec& q) {
    require(F.dim == 1, errc::bad_parameters, "1-D analysis path");
    QuadSpec qq = q;
    if (F.source == TubeFunction::Source::external)
        qq.tail_order = 0;  // sampled sources cannot be evaluated off the grid
    double holo = F.holo_margin(y);
    double inner = std::isfinite(holo) ? 0.5 * (y[0] == 0 ? 1.0 : std::abs(y[0]) + holo) : 1.0;
    if (!std::isfinite(holo)) holo = 8.0;
    return analyze_slice_fn(
        [&](cplx x) { return F.eval({x + cplx(0.0, y[0])}); }, qq, holo,
        std::clamp(inner, 0.05, 2.0));
}

// ---- density recovery ----

struct RecoveredDensity {
    // n = 1
    rvec t;
    cvec values;
    rvec noise;                    // amplified per-point accuracy floor
    std::vector<char> trust_mask;  // per-point: amplified noise <= tol_abs
    double dt = 0.0;
    double trusted_lo = 0.0, trusted_hi = 0.0;  // contiguous trusted run around t = 0
    double noise_floor = 0.0;

    // n >= 2: row-major values over tensor axes
    std::vector<rvec> axes;
    std::vector<std::size_t> dims;

    std::size_t index_of(double tq) const {
        require(!t.empty(), errc::bad_parameters, "1-D recovery required");
        double pos = (tq - t.front()) / dt;
        auto i = static_cast<std::size_t>(std::llround(pos));
        require(i < t.size() && std::abs(t[i] - tq) < 1e-9, errc::bad_parameters,
                "query point off the recovery grid");
        return i;
    }
    cplx value_at(double tq) const { return values[index_of(tq)]; }
    bool trusted(double tq) const {
        if (trust_mask.empty()) return tq >= trusted_lo && tq <= trusted_hi;
        return trust_mask[index_of(tq)] != 0;
    }
};

namespace detail {

inline void apply_height_factor(RecoveredDensity& r, const SliceAnalysis& a, double y,
                                const QuadSpec& q) {
    r.t = a.t;
    r.dt = a.dt;
    r.noise_floor = a.noise_floor;
    r.values.resize(a.fhat.size());
    r.noise.resize(a.fhat.size());
    r.trust_mask.assign(a.fhat.size(), 0);
    for (std::size_t i = 0; i < a.fhat.size(); ++i) {
        double e = std::min(two_pi * y * a.t[i], 700.0);
        double amp = std::exp(e);
        r.values[i] = a.fhat[i] * amp;
        r.noise[i] = a.noise[i] * amp;
        r.trust_mask[i] = r.noise[i] <= q.tol_abs ? 1 : 0;
    }
    // contiguous trusted interval around t = 0 for reporting
    std::size_t zero = a.t.size() / 2;
    std::size_t lo = zero, hi = zero;
    if (r.trust_mask[zero]) {
        while (lo > 0 && r.trust_mask[lo - 1]) --lo;
        while (hi + 1 < r.trust_mask.size() && r.trust_mask[hi + 1]) ++hi;
        r.trusted_lo = a.t[lo];
        r.trusted_hi = a.t[hi];
    } else {
        r.trusted_lo = 0.0;
        r.trusted_hi = 0.0;
    }
}

}  // namespace detail

inline RecoveredDensity recover_density(const TubeFunction& F, const rvec& y,
                                        const QuadSpec& q) {
    require(static_cast<int>(y.size()) == F.dim, errc::dimension_mismatch, "recover_density");
    require(F.base.contains(y), errc::not_in_base, "height not strictly inside the base");
    if (F.dim == 1) {
        SliceAnalysis a = analyze_slice(F, y, q);
        require(a.edge_ratio <= q.slice_edge_tol, errc::slice_tail_too_large,
                "slice does not decay at the grid edge");
        RecoveredDensity r;
        detail::apply_height_factor(r, a, y[0], q);
        return r;
    }
    // tensor grid, plain FFT (fast-decaying slices only at n >= 2)
    const double L = q.slice_halfwidth;
    const int M = q.slice_points;
    const double dx = 2.0 * L / M;
    const int n = F.dim;
    std::vector<std::size_t> dims(n, static_cast<std::size_t>(M));
    std::size_t total = 1;
    for (auto d : dims) total *= d;
    cvec vals(total);
    double maxG = 0.0, edge = 0.0;
    std::vector<int> ix(n, 0);
    cvec z(n);
    for (std::size_t flat = 0;; ++flat) {
        bool on_edge = false;
        for (int d = 0; d < n; ++d) {
            z[d] = cplx(-L + ix[d] * dx, y[d]);
            if (ix[d] == 0 || ix[d] == M - 1) on_edge = true;
        }
        cplx v = F.eval(z);
        vals[flat] = v;
        maxG = std::max(maxG, std::abs(v));
        if (on_edge) edge = std::max(edge, std::abs(v));
        int d = n - 1;
        while (d >= 0 && ++ix[d] == M) ix[d--] = 0;
        if (d < 0) break;
    }
    require(maxG == 0.0 || edge / maxG <= q.slice_edge_tol, errc::slice_tail_too_large,
            "slice does not decay at the grid edge");
    fft_nd(vals, dims);
    RecoveredDensity r;
    r.dims = dims;
    double dtv = 1.0 / (2.0 * L);
    r.axes.assign(n, rvec(M));
    for (int d = 0; d < n; ++d)
        for (int j = 0; j < M; ++j) r.axes[d][j] = (j - M / 2) * dtv;
    // reorder to ascending per axis; apply alternating phases and e^{2 pi y.t}
    std::vector<std::size_t> stride(n, 1);
    for (int d = n - 2; d >= 0; --d) stride[d] = stride[d + 1] * dims[d + 1];
    r.values.resize(total);
    for (std::size_t flat = 0; flat < total; ++flat) {
        std::size_t rem = flat, src = 0;
        int sgn = 1;
        double yt = 0.0;
        for (int d = 0; d < n; ++d) {
            int id = static_cast<int>(rem / stride[d]);
            rem %= stride[d];
            int js = id - M / 2;
            if (js % 2 != 0) sgn = -sgn;
            yt += y[d] * js * dtv;
            src = src * M + static_cast<std::size_t>(js < 0 ? js + M : js);
        }
        double e = std::min(two_pi * yt, 700.0);
        r.values[flat] = vals[src] * (sgn * std::pow(dx, n) * std::exp(e));
    }
    r.dt = dtv;
    r.noise_floor = 8.0 * std::numeric_limits<double>::epsilon() * maxG * total + edge;
    r.trusted_lo = -L;
    r.trusted_hi = L;
    return r;
}

inline double y_independence_residual(const TubeFunction& F, const rvec& y1, const rvec& y2,
                                      const QuadSpec& q) {
    RecoveredDensity a = recover_density(F, y1, q);
    RecoveredDensity b = recover_density(F, y2, q);
    require(!a.t.empty() && a.t.size() == b.t.size(), errc::bad_parameters,
            "residual needs matching 1-D grids");
    double res = 0.0;
    for (std::size_t i = 0; i < a.t.size(); ++i)
        if (a.trust_mask[i] && b.trust_mask[i])
            res = std::max(res, std::abs(a.values[i] - b.values[i]));
    return res;
}

// ---- mollifiers ----

enum class MollifierForm { sum_squares, product_linear };

inline cplx mollifier_eval(const cvec& z, double eps, int N,
                           const std::vector<rvec>& basis, MollifierForm form) {
    require(eps > 0 && N >= 1, errc::bad_parameters, "mollifier needs eps > 0, N >= 1");
    const int n = static_cast<int>(z.size());
    if (form == MollifierForm::sum_squares) {
        cplx s = 0.0;
        for (const cplx& zj : z) s += zj * zj;
        cplx base = 1.0 + eps * s;
        cplx out = 1.0;
        for (int k = 0; k < N; ++k) out *= base;
        return out;
    }
    require(static_cast<int>(basis.size()) == n, errc::bad_basis,
            "product mollifier needs n basis vectors");
    {
        std::vector<rvec> cols(n, rvec(n));
        for (int i = 0; i < n; ++i)
            for (int d = 0; d < n; ++d) cols[i][d] = basis[i][d];
        require(detail::invert(cols, n).has_value(), errc::bad_basis,
                "mollifier basis is linearly dependent");
    }
    cplx prod = 1.0;
    for (const rvec& e : basis) {
        cplx ez = 0.0;
        for (int d = 0; d < n; ++d) ez += e[d] * z[d];
        prod *= 1.0 - cplx(0.0, eps) * ez;
    }
    cplx out = 1.0;
    for (int k = 0; k < 2 * N; ++k) out *= prod;
    return out;
}

// |l_eps(z)| >= (1/2 + eps |x|^2)^N for eps <= 1/(2 R0^2), |y| <= R0
inline double mollifier_lower_bound_sum_squares(double eps, int N, std::span<const double> x,
                                                double R0) {
    require(eps <= 1.0 / (2.0 * R0 * R0) + 1e-15, errc::bad_parameters,
            "bound needs eps <= 1/(2 R0^2)");
    return std::pow(0.5 + eps * dot(x, x), N);
}

// smallest eigenvalue of sum_j e_j e_j^T by cyclic Jacobi (n <= 3)
inline double mollifier_gram_lower(const std::vector<rvec>& basis) {
    int n = static_cast<int>(basis[0].size());
    rvec A(n * n, 0.0);
    for (const rvec& e : basis)
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) A[i * n + j] += e[i] * e[j];
    for (int sweep = 0; sweep < 32; ++sweep)
        for (int p = 0; p < n; ++p)
            for (int qq = p + 1; qq < n; ++qq) {
                double apq = A[p * n + qq];
                if (std::abs(apq) < 1e-15) continue;
                double theta = 0.5 * std::atan2(2 * apq, A[qq * n + qq] - A[p * n + p]);
                double c = std::cos(theta), s = std::sin(theta);
                for (int k = 0; k < n; ++k) {
                    double akp = A[k * n + p], akq = A[k * n + qq];
                    A[k * n + p] = c * akp - s * akq;
                    A[k * n + qq] = s * akp + c * akq;
                }
                for (int k = 0; k < n; ++k) {
                    double apk = A[p * n + k], aqk = A[qq * n + k];
                    A[p * n + k] = c * apk - s * aqk;
                    A[qq * n + k] = s * apk + c * aqk;
                }
            }
    double mn = A[0];
    for (int i = 1; i < n; ++i) mn = std::min(mn, A[i * n + i]);
    return std::max(mn, 0.0);
}

// |l_eps(z)| >= (1 + eps^2 B |x|^2)^N over y with e_j.y >= 0
inline double mollifier_lower_bound_product(double eps, int N, std::span<const double> x,
                                            const std::vector<rvec>& basis) {
    double B = mollifier_gram_lower(basis);
    return std::pow(1.0 + eps * eps * B * dot(x, x), N);
}

// ---- mollified recovery with Richardson extrapolation on eps^2 ----

struct MollifiedDiagnostics {
    rvec epsilons;
    rvec successive_diffs;  // sup-norm over the trusted window
    bool converged = false;
    std::string status;  // "ok" or "NoConvergence: ..."
};

struct MollifiedRecovery {
    RecoveredDensity density;
    MollifiedDiagnostics diag;
};

inline MollifiedRecovery recover_density_mollified(const TubeFunction& F, const rvec& y,
                                                   const QuadSpec& q, int N,
                                                   const std::vector<rvec>& basis,
                                                   MollifierForm form =
                                                       MollifierForm::product_linear) {
    require(F.dim == 1, errc::bad_parameters, "mollified recovery implemented for n = 1");
    require(F.base.contains(y), errc::not_in_base, "height not strictly inside the base");
    require(!q.epsilon_schedule.empty(), errc::bad_parameters, "empty epsilon schedule");

    std::vector<RecoveredDensity> stages;
    for (double eps : q.epsilon_schedule) {
        double pole_dist;
        if (form == MollifierForm::product_linear) {
            pole_dist = std::numeric_limits<double>::infinity();
            for (const rvec& e : basis)
                pole_dist = std::min(pole_dist, (1.0 / eps + dot(e, y)) / norm2(e));
        } else {
            pole_dist = std::abs(1.0 / std::sqrt(eps) - norm2(y));
        }
        double holo = std::min(F.holo_margin(y), pole_dist);
        SliceAnalysis a = analyze_slice_fn(
            [&](cplx x) {
                cvec z = {x + cplx(0.0, y[0])};
                return F.eval(z) / mollifier_eval(z, eps, N, basis, form);
            },
            q, std::isfinite(holo) ? holo : 8.0, 0.5);
        RecoveredDensity r;
        detail::apply_height_factor(r, a, y[0], q);
        stages.push_back(std::move(r));
    }

    MollifiedRecovery out;
    out.diag.epsilons = q.epsilon_schedule;
    double lo = stages.front().trusted_lo, hi = stages.front().trusted_hi;
    for (const auto& s : stages) {
        lo = std::max(lo, s.trusted_lo);
        hi = std::min(hi, s.trusted_hi);
    }
    for (std::size_t k = 0; k + 1 < stages.size(); ++k) {
        // L1-averaged difference over commonly trusted rows; a sup norm would
        // be dominated by the thin mollifier layer at support edges
        double d = 0.0;
        std::size_t cnt = 0;
        for (std::size_t i = 0; i < stages[k].t.size(); ++i)
            if (stages[k].trust_mask[i] && stages[k + 1].trust_mask[i]) {
                d += std::abs(stages[k + 1].values[i] - stages[k].values[i]);
                ++cnt;
            }
        out.diag.successive_diffs.push_back(cnt ? d / static_cast<double>(cnt) : 0.0);
    }
    bool decreasing = true;
    for (std::size_t k = 0; k + 1 < out.diag.successive_diffs.size(); ++k)
        if (out.diag.successive_diffs[k + 1] > 0.98 * out.diag.successive_diffs[k])
            decreasing = false;

    if (stages.size() < 3) {
        out.density = stages.back();
        out.diag.converged = false;
        out.diag.status = "NoConvergence: extrapolation needs at least 3 epsilon stages";
        return out;
    }
    // Richardson (Neville to eps = 0) over the last three stages. The mollifier
    // perturbs the recovery at first order in eps -- l_eps^{-1} = 1 - 2 N i eps e.z
    // + O(eps^2) -- so the extrapolation runs in eps, not eps^2.
    std::size_t n0 = stages.size() - 3;
    double h0 = q.epsilon_schedule[n0];
    double h1 = q.epsilon_schedule[n0 + 1];
    double h2 = q.epsilon_schedule[n0 + 2];
    RecoveredDensity r = stages.back();
    for (std::size_t i = 0; i < r.values.size(); ++i) {
        cplx f0 = stages[n0].values[i], f1 = stages[n0 + 1].values[i],
             f2 = stages[n0 + 2].values[i];
        cplx p01 = (h0 * f1 - h1 * f0) / (h0 - h1);
        cplx p12 = (h1 * f2 - h2 * f1) / (h1 - h2);
        r.values[i] = (h0 * p12 - h2 * p01) / (h0 - h2);
        r.trust_mask[i] = stages[n0].trust_mask[i] && stages[n0 + 1].trust_mask[i] &&
                          stages[n0 + 2].trust_mask[i];
    }
    r.trusted_lo = lo;
    r.trusted_hi = hi;
    out.density = std::move(r);
    out.diag.converged = decreasing;
    out.diag.status = decreasing ? "ok" : "NoConvergence: successive differences not decreasing";
    return out;
}

// deterministic interior basis for the product mollifier: dual extreme rays
// nudged toward the dual interior direction
inline std::vector<rvec> default_mollifier_basis(const ConeSpec& cone) {
    ConeSpec d = dual(cone);
    rvec inner(d.dim, 0.0);
    for (const rvec& g : d.generators) {
        rvec u = normalized(g);
        for (int i = 0; i < d.dim; ++i) inner[i] += u[i];
    }
    inner = normalized(inner);
    std::vector<rvec> basis;
    for (int j = 0; j < d.dim; ++j) {
        rvec u = normalized(d.generators[j % d.generators.size()]);
        rvec e(d.dim);
        for (int i = 0; i < d.dim; ++i) e[i] = 0.8 * u[i] + 0.2 * inner[i];
        basis.push_back(normalized(e));
    }
    return basis;
}

}  // namespace tubepw
