#pragma once

#include "cone.hpp"
#include "quadrature.hpp"

namespace tubepw {

// Declared support of a density; closed membership with an optional margin.
struct SupportDesc {
    enum class Kind { all_space, box, ball, dual_cone, dual_cone_plus_ball };
    Kind kind = Kind::all_space;
    rvec lo, hi;      // box
    rvec center;      // ball
    double radius = 0;
    ConeSpec cone;    // dual taken of this cone
    double ball_pad = 0;

    bool contains(std::span<const double> t, double margin = 0.0) const {
        switch (kind) {
            case Kind::all_space:
                return true;
            case Kind::box:
                for (std::size_t i = 0; i < lo.size(); ++i)
                    if (t[i] < lo[i] - margin || t[i] > hi[i] + margin) return false;
                return true;
            case Kind::ball:
                return dist2(t, center) <= radius + margin;
            case Kind::dual_cone:
                return project_onto_dual(cone, t).distance <= margin;
            case Kind::dual_cone_plus_ball:
                return project_onto_dual(cone, t).distance <= ball_pad + margin;
        }
        return true;
    }
};

// Parametric spectral density f(t) with declared support; test input for
// synthesis and ground truth for recovery.
struct SpectralDensity {
    enum class Kind { trunc_exp, gaussian, triangle, bump };
    Kind kind = Kind::trunc_exp;
    int dim = 1;

    // trunc_exp: f(t) = e^{-2 pi w.t} on the dual cone of `cone`
    ConeSpec cone;
    ConeSpec cone_dual;
    rvec w;
    double decay = 0.0;  // certificate: w.u >= decay > 0 for unit u in the dual

    // gaussian: f(t) = e^{-pi |t-c|^2 / sigma^2}
    rvec center;
    double sigma = 1.0;

    // bump: f(t) = (1 - |t-c|^2/r^2)^k on the closed ball, C^{k-1} smooth
    int bump_order = 3;

    SupportDesc support;

    static SpectralDensity truncated_exponential(ConeSpec gamma, rvec w_) {
        SpectralDensity f;
        f.kind = Kind::trunc_exp;
        f.dim = gamma.dim;
        require(static_cast<int>(w_.size()) == gamma.dim, errc::dimension_mismatch,
                "w dimension mismatch");
        require(contains(gamma, w_, true), errc::bad_parameters,
                "w must lie strictly inside the cone");
        f.cone_dual = dual(gamma);
        double c = std::numeric_limits<double>::infinity();
        for (const rvec& u : f.cone_dual.generators) c = std::min(c, dot(w_, normalized(u)));
        require(c > 0, errc::bad_parameters,
                "w admits no decay certificate on the dual cone (not interior)");
        f.decay = c;
        f.cone = std::move(gamma);
        f.w = std::move(w_);
        f.support.kind = SupportDesc::Kind::dual_cone;
        f.support.cone = f.cone;
        return f;
    }

    static SpectralDensity gaussian(rvec center_, double sigma_) {
        require(sigma_ > 0, errc::bad_parameters, "gaussian width must be positive");
        SpectralDensity f;
        f.kind = Kind::gaussian;
        f.dim = static_cast<int>(center_.size());
        f.center = std::move(center_);
        f.sigma = sigma_;
        f.support.kind = SupportDesc::Kind::all_space;
        return f;
    }

    static SpectralDensity triangle() {
        SpectralDensity f;
        f.kind = Kind::triangle;
        f.dim = 1;
        f.support.kind = SupportDesc::Kind::box;
        f.support.lo = {-1.0};
        f.support.hi = {1.0};
        return f;
    }

    static SpectralDensity bump(rvec center_, double radius_, int order = 3) {
        require(radius_ > 0 && order >= 1, errc::bad_parameters, "bump needs radius>0, order>=1");
        SpectralDensity f;
        f.kind = Kind::bump;
        f.dim = static_cast<int>(center_.size());
        f.center = std::move(center_);
        f.sigma = radius_;
        f.bump_order = order;
        f.support.kind = SupportDesc::Kind::ball;
        f.support.center = f.center;
        f.support.radius = radius_;
        return f;
    }
};

inline double eval_density(const SpectralDensity& f, std::span<const double> t) {
    require(static_cast<int>(t.size()) == f.dim, errc::dimension_mismatch, "eval_density");
    switch (f.kind) {
        case SpectralDensity::Kind::trunc_exp:
            if (!contains(f.cone_dual, t, true)) return 0.0;
            return std::exp(-two_pi * dot(f.w, t));
        case SpectralDensity::Kind::gaussian: {
            double d = dist2(t, f.center);
            return std::exp(-pi * d * d / (f.sigma * f.sigma));
        }
        case SpectralDensity::Kind::triangle: {
            double a = 1.0 - std::abs(t[0]);
            return a > 0 ? a : 0.0;
        }
        case SpectralDensity::Kind::bump: {
            double u = dist2(t, f.center) / f.sigma;
            if (u >= 1.0) return 0.0;
            return std::pow(1.0 - u * u, f.bump_order);
        }
    }
    return 0.0;
}

// Slice integrability certificate: f(t) e^{-2 pi y.t} must decay along the
// support. Returns the exponential rate (+inf means compact support).
struct DecayInfo {
    bool integrable = false;
    double rate = 0.0;
};

inline DecayInfo decay_at_height(const SpectralDensity& f, std::span<const double> y) {
    switch (f.kind) {
        case SpectralDensity::Kind::trunc_exp: {
            // need (w + y) . u > 0 on every dual extreme ray
            double c = std::numeric_limits<double>::infinity();
            rvec wy = vadd(f.w, y);
            for (const rvec& u : f.cone_dual.generators) c = std::min(c, dot(wy, normalized(u)));
            return {c > 0, c};
        }
        case SpectralDensity::Kind::gaussian:
            return {true, std::numeric_limits<double>::infinity()};
        case SpectralDensity::Kind::triangle:
        case SpectralDensity::Kind::bump:
            return {true, std::numeric_limits<double>::infinity()};
    }
    return {};
}

// Radius beyond which the density vanishes, or nullopt for unbounded support.
inline std::optional<double> support_radius(const SpectralDensity& f) {
    switch (f.kind) {
        case SpectralDensity::Kind::triangle:
            return 1.0;
        case SpectralDensity::Kind::bump:
            return norm2(f.center) + f.sigma;
        default:
            return std::nullopt;
    }
}

// Upper bound on the synthesis truncation tail int_{|t|>T} |f(t) e^{-2 pi y.t}| dt.
inline double synthesis_tail_bound(const SpectralDensity& f, std::span<const double> y,
                                   double T) {
    if (auto r = support_radius(f)) return T >= *r ? 0.0 : 1e300;
    const int n = f.dim;
    double sphere = 2.0 * std::pow(pi, 0.5 * n) / std::tgamma(0.5 * n);
    switch (f.kind) {
        case SpectralDensity::Kind::trunc_exp: {
            DecayInfo d = decay_at_height(f, y);
            if (!d.integrable) return 1e300;
            double a = two_pi * d.rate;
            double s = 0.0, fact = 1.0;
            for (int k = 0; k < n; ++k) {
                fact = 1.0;
                for (int j = n - 1; j > n - 1 - k; --j) fact *= j;
                s += fact * std::pow(T, n - 1 - k) / std::pow(a, k + 1);
            }
            return sphere * std::exp(-a * T) * s;
        }
        case SpectralDensity::Kind::gaussian: {
            double yn = norm2(y), cn = norm2(f.center), s2 = f.sigma * f.sigma;
            auto env = [&](double r) {
                double d = (r - cn) > 0 ? r - cn : 0.0;
                return std::pow(r, n - 1) * std::exp(two_pi * yn * r - pi * d * d / s2);
            };
            double hi = std::max(T, cn + f.sigma * (2.0 + yn * f.sigma)) + 10.0 * f.sigma;
            return sphere * integrate_gl(env, T, hi, 32);
        }
        default:
            return 0.0;
    }
}

}  // namespace tubepw
