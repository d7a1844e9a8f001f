#pragma once

#include <functional>
#include <memory>

#include "density.hpp"
#include "fft.hpp"
#include "quadrature.hpp"

namespace tubepw {

// All discretization policy lives here: slice grid, synthesis truncation,
// base sampler resolution, tolerances, mollifier schedule.
struct QuadSpec {
    double slice_halfwidth = 50.0;  // L; slice grid spans [-L, L)
    int slice_points = 4096;        // M per axis, power of two
    double t_truncation = 8.0;      // synthesis support truncation radius
    int y_points = 64;              // base-region sampler resolution per axis
    double tol_rel = 1e-6;
    double tol_abs = 1e-9;
    rvec epsilon_schedule = {0.2, 0.1, 0.05};
    bool use_closed_form = false;  // synthesize may shortcut through a closed form
    int tail_order = 10;           // K terms in the slice edge-correction series (0 = off)
    double slice_edge_tol = 0.1;   // SliceTailTooLarge gate: |F(edge)| / max|F|

    void validate() const {
        require(slice_halfwidth > 0, errc::bad_parameters, "slice half-width must be positive");
        require(slice_points >= 16 && is_pow2(static_cast<std::size_t>(slice_points)),
                errc::bad_parameters, "slice point count must be a power of two >= 16");
        require(tol_rel > 0 && tol_abs > 0, errc::bad_parameters, "tolerances must be positive");
        require(t_truncation > 0, errc::bad_parameters, "t truncation must be positive");
        for (std::size_t i = 0; i + 1 < epsilon_schedule.size(); ++i)
            require(epsilon_schedule[i] > epsilon_schedule[i + 1], errc::bad_parameters,
                    "epsilon schedule must be strictly decreasing");
        require(epsilon_schedule.empty() || epsilon_schedule.back() > 0, errc::bad_parameters,
                "epsilon schedule must stay positive");
    }

    QuadSpec scaled_grid(double factor) const {
        QuadSpec q = *this;
        int m = slice_points;
        while (factor < 0.75 && m > 16) {
            m /= 2;
            factor *= 2.0;
        }
        while (factor > 1.5 && m < (1 << 22)) {
            m *= 2;
            factor *= 0.5;
        }
        q.slice_points = m;
        return q;
    }
};

// ---- synthesis: F(z) = int f(t) e^{2 pi i t.z} dt over the truncated support ----

struct SynthesisResult {
    cplx value{};
    double tail_estimate = 0.0;
};

namespace detail {

// 1-D oscillatory-decaying factor integral over [lo,hi]:
//   int e^{-2 pi a s} e^{2 pi i s zeta} ds, zeta complex
// by composite GL with panels resolving both the oscillation Re(zeta) and a.
inline cplx axis_integral(double lo, double hi, double a, cplx zeta, int min_panels = 16) {
    double freq = std::abs(zeta.real()) + std::abs(a) + std::abs(zeta.imag()) + 1.0;
    int panels = std::clamp(static_cast<int>(std::ceil((hi - lo) * freq)), min_panels, 6000);
    return integrate_gl(
        [&](double s) { return std::exp((-two_pi * a + two_pi * cplx(0, 1) * zeta) * s); }, lo,
        hi, panels);
}

template <typename G>
cplx axis_integral_fn(G&& g, double lo, double hi, double freq, int min_panels = 16) {
    int panels =
        std::clamp(static_cast<int>(std::ceil((hi - lo) * (freq + 1.0))), min_panels, 6000);
    return integrate_gl(std::forward<G>(g), lo, hi, panels);
}

inline std::vector<rvec> generator_matrix_inverse(const ConeSpec& c) {
    require(c.simplicial, errc::unsupported_non_simplicial,
            "operation needs a simplicial cone");
    auto inv = detail::invert(c.generators, c.dim);
    require(inv.has_value(), errc::unsupported_non_simplicial, "degenerate generators");
    return *inv;
}

inline double det_from_inverse_rows(const std::vector<rvec>& rows) {
    // |det G| = 1/|det G^{ -1}|, small n closed forms
    int n = static_cast<int>(rows.size());
    double d = 0;
    if (n == 1)
        d = rows[0][0];
    else if (n == 2)
        d = rows[0][0] * rows[1][1] - rows[0][1] * rows[1][0];
    else {
        d = rows[0][0] * (rows[1][1] * rows[2][2] - rows[1][2] * rows[2][1]) -
            rows[0][1] * (rows[1][0] * rows[2][2] - rows[1][2] * rows[2][0]) +
            rows[0][2] * (rows[1][0] * rows[2][1] - rows[1][1] * rows[2][0]);
    }
    require(std::abs(d) > 1e-300, errc::unsupported_non_simplicial, "singular generator matrix");
    return 1.0 / std::abs(d);
}

}  // namespace detail

inline SynthesisResult synthesize_detailed(const SpectralDensity& f, const cvec& z,
                                           const QuadSpec& q) {
    require(static_cast<int>(z.size()) == f.dim, errc::dimension_mismatch, "synthesize");
    rvec y(f.dim);
    for (int i = 0; i < f.dim; ++i) y[i] = z[i].imag();
    DecayInfo dec = decay_at_height(f, y);
    require(dec.integrable, errc::divergent_slice,
            "f(t) e^{-2 pi y.t} is not integrable at this height");
    const double T = q.t_truncation;
    SynthesisResult out;
    out.tail_estimate = synthesis_tail_bound(f, y, T);
    double fscale = std::max(1.0, std::exp(-two_pi * dot(f.w.empty() ? rvec(f.dim, 0.0) : f.w,
                                                         rvec(f.dim, 0.0))));
    require(out.tail_estimate < std::max(q.tol_abs, q.tol_rel) * 1e3 * fscale,
            errc::truncation_too_small, "synthesis truncation tail above tolerance budget");

    switch (f.kind) {
        case SpectralDensity::Kind::trunc_exp: {
            // exact substitution sigma = G^T t turns the dual-cone integral into
            // a product of decaying half-line factors
            auto rows = detail::generator_matrix_inverse(f.cone);
            double jac = detail::det_from_inverse_rows(rows);
            cplx prod = jac;
            for (int j = 0; j < f.dim; ++j) {
                cplx zeta = 0.0;
                double aj = 0.0;
                for (int d = 0; d < f.dim; ++d) {
                    zeta += rows[j][d] * z[d];
                    aj += rows[j][d] * f.w[d];
                }
                // sigma_j decay rate a_j; truncate where the factor is negligible
                double rate = two_pi * (aj + zeta.imag());
                require(rate > 0, errc::divergent_slice, "axis factor diverges");
                double hi = std::min(T * (1.0 + norm2(f.w)) * 4.0, 46.0 / rate + T);
                prod *= detail::axis_integral(0.0, hi, aj, zeta);
            }
            out.value = prod;
            return out;
        }
        case SpectralDensity::Kind::gaussian: {
            cplx prod = 1.0;
            for (int j = 0; j < f.dim; ++j) {
                double cj = f.center[j], s2 = f.sigma * f.sigma;
                double half = f.sigma * (4.0 + two_pi * std::abs(z[j].imag()) * f.sigma);
                cplx zj = z[j];
                prod *= detail::axis_integral_fn(
                    [&](double t) {
                        return std::exp(-pi * (t - cj) * (t - cj) / s2 +
                                        two_pi * cplx(0, 1) * t * zj);
                    },
                    cj - half, cj + half, std::abs(zj.real()) + std::abs(zj.imag()));
            }
            out.value = prod;
            return out;
        }
        case SpectralDensity::Kind::triangle: {
            cplx zj = z[0];
            out.value = detail::axis_integral_fn(
                [&](double t) {
                    return (1.0 - std::abs(t)) * std::exp(two_pi * cplx(0, 1) * t * zj);
                },
                -1.0, 1.0, std::abs(zj.real()) + std::abs(zj.imag()));
            return out;
        }
        case SpectralDensity::Kind::bump: {
            if (f.dim == 1) {
                cplx zj = z[0];
                double c = f.center[0], r = f.sigma;
                int k = f.bump_order;
                out.value = detail::axis_integral_fn(
                    [&](double t) {
                        double u = (t - c) / r;
                        return std::pow(1.0 - u * u, k) * std::exp(two_pi * cplx(0, 1) * t * zj);
                       },
                    c - r, c + r, std::abs(zj.real()) + std::abs(zj.imag()));
                return out;
            }
            // tensor grid over the bounding box; zero outside the ball
            double r = f.sigma;
            double freq = 1.0;
            for (const cplx& zz : z) freq += std::abs(zz.real()) + std::abs(zz.imag());
            int panels = std::clamp(static_cast<int>(std::ceil(2 * r * freq)), 12, 256);
            GaussRule g = gauss_legendre(12);
            cvec terms;
            double h = 2 * r / panels;
            std::vector<int> ip(f.dim, 0);
            rvec t(f.dim);
            while (true) {
                std::vector<int> in(f.dim, 0);
                // panel tensor of GL nodes
                std::function<cplx(int)> rec = [&](int d) -> cplx {
                    cplx s = 0.0;
                    for (int k2 = 0; k2 < 12; ++k2) {
                        double lo = f.center[d] - r + ip[d] * h;
                        t[d] = lo + 0.5 * h * (1.0 + g.nodes[k2]);
                        cplx inner;
                        if (d + 1 < f.dim)
                            inner = rec(d + 1);
                        else {
                            double v = eval_density(f, t);
                            cplx ph = 0.0;
                            for (int dd = 0; dd < f.dim; ++dd) ph += t[dd] * z[dd];
                            inner = v * std::exp(two_pi * cplx(0, 1) * ph);
                        }
                        s += 0.5 * h * g.weights[k2] * inner;
                    }
                    return s;
                };
                terms.push_back(rec(0));
                int d = 0;
                while (d < f.dim && ++ip[d] == panels) ip[d++] = 0;
                if (d == f.dim) break;
            }
            out.value = pairwise_sum(std::span<const cplx>(terms));
            return out;
        }
    }
    return out;
}

// ---- evaluable holomorphic functions on tubes ----

struct ExternalSlices {
    double halfwidth = 0;
    rvec heights;                // sorted y values (n = 1)
    std::vector<cvec> samples;   // per height, uniform grid on [-L, L)
};

struct TubeFunction {
    enum class Source { closed_form, synthesized, external };
    enum class Formula { halfplane_product, gaussian_fourier, sinc_squared, constant };

    Source source = Source::closed_form;
    Formula formula = Formula::constant;
    int dim = 1;
    BaseRegion base;

    // halfplane_product: F(z) = jac * prod_j 1 / (2 pi (a_j - i zeta_j)), zeta = Ginv z
    std::vector<rvec> ginv_rows;
    rvec a_coeffs;
    double jacobian = 1.0;

    rvec center;        // gaussian_fourier
    double sigma = 1.0;

    cplx amplitude = 1.0;
    rvec xshift;  // evaluate F(z + xshift), real shift

    std::shared_ptr<const SpectralDensity> density;  // synthesized
    QuadSpec quad;

    std::shared_ptr<const ExternalSlices> slices;  // external

    cplx eval(const cvec& z_in) const {
        require(static_cast<int>(z_in.size()) == dim, errc::dimension_mismatch, "eval");
        cvec z = z_in;
        if (!xshift.empty())
            for (int i = 0; i < dim; ++i) z[i] += xshift[i];
        switch (source) {
            case Source::closed_form:
                return amplitude * eval_closed(z);
            case Source::synthesized:
                return amplitude * synthesize_detailed(*density, z, quad).value;
            case Source::external:
                return amplitude * eval_external(z);
        }
        return 0.0;
    }

    // Radius of the disk around height y on which eval stays holomorphic;
    // the slice-edge correction differentiates inside this margin.
    double holo_margin(std::span<const double> y) const {
        switch (source) {
            case Source::closed_form:
                if (formula == Formula::halfplane_product) {
                    double m = std::numeric_limits<double>::infinity();
                    for (std::size_t j = 0; j < ginv_rows.size(); ++j)
                        m = std::min(m, (dot(ginv_rows[j], y) + a_coeffs[j]) /
                                            norm2(ginv_rows[j]));
                    return std::max(0.0, m);
                }
                return std::numeric_limits<double>::infinity();  // entire families
            case Source::synthesized: {
                DecayInfo d = decay_at_height(*density, y);
                if (support_radius(*density)) return std::numeric_limits<double>::infinity();
                return d.integrable ? d.rate : 0.0;
            }
            case Source::external:
                return 0.0;
        }
        return 0.0;
    }

  private:
    cplx eval_closed(const cvec& z) const {
        switch (formula) {
            case Formula::halfplane_product: {
                cplx prod = jacobian;
                for (std::size_t j = 0; j < ginv_rows.size(); ++j) {
                    cplx zeta = 0.0;
                    for (int d = 0; d < dim; ++d) zeta += ginv_rows[j][d] * z[d];
                    prod /= two_pi * (a_coeffs[j] - cplx(0, 1) * zeta);
                }
                return prod;
            }
            case Formula::gaussian_fourier: {
                cplx zz = 0.0, cz = 0.0;
                for (int d = 0; d < dim; ++d) {
                    zz += z[d] * z[d];
                    cz += center[d] * z[d];
                }
                return std::pow(sigma, dim) *
                       std::exp(two_pi * cplx(0, 1) * cz - pi * sigma * sigma * zz);
            }
            case Formula::sinc_squared: {
                cplx pz = pi * z[0];
                cplx s;
                if (std::abs(pz) < 1e-4)
                    s = 1.0 - pz * pz / 6.0;
                else
                    s = std::sin(pz) / pz;
                return s * s;
            }
            case Formula::constant:
                return 1.0;
        }
        return 0.0;
    }

    cplx eval_external(const cvec& z) const {
        require(dim == 1 && slices, errc::bad_parameters, "external slices are 1-D");
        double y = z[0].imag(), x = z[0].real();
        const ExternalSlices& s = *slices;
        for (std::size_t k = 0; k < s.heights.size(); ++k) {
            if (std::abs(s.heights[k] - y) < 1e-9) {
                const cvec& v = s.samples[k];
                double dx = 2 * s.halfwidth / static_cast<double>(v.size());
                double pos = (x + s.halfwidth) / dx;
                require(pos >= 0 && pos <= static_cast<double>(v.size() - 1),
                        errc::out_of_domain, "external slice: x outside sampled range");
                auto i = static_cast<std::size_t>(pos);
                double fr = pos - static_cast<double>(i);
                if (i + 1 >= v.size()) return v[i];
                return v[i] * (1.0 - fr) + v[i + 1] * fr;
            }
        }
        fail(errc::not_in_base, "external source has no slice at this height");
    }
};

inline std::optional<TubeFunction> closed_form_transform(const SpectralDensity& f) {
    TubeFunction F;
    F.dim = f.dim;
    F.source = TubeFunction::Source::closed_form;
    switch (f.kind) {
        case SpectralDensity::Kind::trunc_exp: {
            if (!f.cone.simplicial) return std::nullopt;
            F.formula = TubeFunction::Formula::halfplane_product;
            F.ginv_rows = detail::generator_matrix_inverse(f.cone);
            F.jacobian = detail::det_from_inverse_rows(F.ginv_rows);
            F.a_coeffs.resize(f.dim);
            for (int j = 0; j < f.dim; ++j) F.a_coeffs[j] = dot(F.ginv_rows[j], f.w);
            F.base = BaseRegion::truncated_cone(f.cone, 1e-8, 1e8);
            return F;
        }
        case SpectralDensity::Kind::gaussian:
            F.formula = TubeFunction::Formula::gaussian_fourier;
            F.center = f.center;
            F.sigma = f.sigma;
            F.base = BaseRegion::box(rvec(f.dim, -1e8), rvec(f.dim, 1e8));
            return F;
        case SpectralDensity::Kind::triangle:
            F.formula = TubeFunction::Formula::sinc_squared;
            F.base = BaseRegion::box({-1e8}, {1e8});
            return F;
        case SpectralDensity::Kind::bump:
            return std::nullopt;  // quadrature only
    }
    return std::nullopt;
}

inline cplx synthesize(const SpectralDensity& f, const cvec& z, const QuadSpec& q) {
    if (q.use_closed_form) {
        if (auto F = closed_form_transform(f)) return F->eval(z);
    }
    return synthesize_detailed(f, z, q).value;
}

inline TubeFunction synthesized_function(SpectralDensity f, BaseRegion base, QuadSpec q) {
    TubeFunction F;
    F.source = TubeFunction::Source::synthesized;
    F.dim = f.dim;
    F.base = std::move(base);
    F.density = std::make_shared<SpectralDensity>(std::move(f));
    F.quad = std::move(q);
    return F;
}

}  // namespace tubepw

#include "slice_analysis.hpp"
