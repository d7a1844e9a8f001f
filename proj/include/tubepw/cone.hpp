#pragma once

#include <algorithm>
#include <optional>

#include "common.hpp"

namespace tubepw {

// Open convex polyhedral cone in generator form with derived halfspace data.
// Halfspace vectors h describe the closure: cl(cone) = { y : h.y >= 0 for all h }.
// For n >= 3 only simplicial cones are accepted, so duals stay exact.
struct ConeSpec {
    int dim = 0;
    std::vector<rvec> generators;
    std::vector<rvec> halfspaces;
    bool simplicial = false;
};

namespace detail {

// Gaussian elimination with partial pivoting; A is row-major n x n.
inline std::optional<rvec> solve_dense(rvec A, rvec b, int n) {
    for (int col = 0; col < n; ++col) {
        int piv = col;
        for (int r = col + 1; r < n; ++r)
            if (std::abs(A[r * n + col]) > std::abs(A[piv * n + col])) piv = r;
        if (std::abs(A[piv * n + col]) < 1e-13) return std::nullopt;
        if (piv != col) {
            for (int c = 0; c < n; ++c) std::swap(A[col * n + c], A[piv * n + c]);
            std::swap(b[col], b[piv]);
        }
        for (int r = col + 1; r < n; ++r) {
            double f = A[r * n + col] / A[col * n + col];
            for (int c = col; c < n; ++c) A[r * n + c] -= f * A[col * n + c];
            b[r] -= f * b[col];
        }
    }
    rvec x(n);
    for (int r = n - 1; r >= 0; --r) {
        double s = b[r];
        for (int c = r + 1; c < n; ++c) s -= A[r * n + c] * x[c];
        x[r] = s / A[r * n + r];
    }
    return x;
}

inline std::optional<std::vector<rvec>> invert(const std::vector<rvec>& cols, int n) {
    // columns of the matrix are the generators; returns rows of the inverse.
    std::vector<rvec> rows(n, rvec(n));
    for (int k = 0; k < n; ++k) {
        rvec A(n * n);
        for (int r = 0; r < n; ++r)
            for (int c = 0; c < n; ++c) A[r * n + c] = cols[c][r];
        rvec e(n, 0.0);
        e[k] = 1.0;
        auto x = solve_dense(std::move(A), std::move(e), n);
        if (!x) return std::nullopt;
        for (int r = 0; r < n; ++r) rows[r][k] = (*x)[r];
    }
    return rows;
}

inline rvec perp_ccw(const rvec& u) { return {-u[1], u[0]}; }

}  // namespace detail

inline ConeSpec make_cone(const std::vector<rvec>& generators) {
    require(!generators.empty(), errc::bad_parameters, "cone needs at least one generator");
    const int n = static_cast<int>(generators[0].size());
    require(n >= 1, errc::bad_parameters, "dimension must be >= 1");
    for (const rvec& g : generators) {
        require(static_cast<int>(g.size()) == n, errc::dimension_mismatch,
                "generators must share one dimension");
        require(norm2(g) > 0.0, errc::zero_generator, "zero generator (cone must exclude 0)");
    }
    ConeSpec c;
    c.dim = n;
    c.generators = generators;
    const int m = static_cast<int>(generators.size());

    if (n == 1) {
        double s = generators[0][0] > 0 ? 1.0 : -1.0;
        for (const rvec& g : generators)
            require(g[0] * s > 0, errc::cone_not_salient, "generators of mixed sign contain 0");
        c.halfspaces = {{s}};
        c.simplicial = (m == 1);
        return c;
    }

    if (n == 2) {
        // Angular treatment: sort directions, classify by the largest cyclic gap.
        std::vector<double> ang(m);
        for (int i = 0; i < m; ++i) ang[i] = std::atan2(generators[i][1], generators[i][0]);
        std::sort(ang.begin(), ang.end());
        double gap = two_pi - (ang[m - 1] - ang[0]);
        int after = 0;  // index of the direction that follows the largest gap
        for (int i = 0; i + 1 < m; ++i)
            if (ang[i + 1] - ang[i] > gap) {
                gap = ang[i + 1] - ang[i];
                after = i + 1;
            }
        const double tol_ang = 1e-12;
        require(gap >= pi - tol_ang, errc::cone_not_salient,
                "generators positively span the plane, cone would contain 0");
        double th_lo = ang[after];
        double th_hi = ang[(after + m - 1) % m];
        double span = th_hi - th_lo;
        if (span < 0) span += two_pi;
        rvec u = {std::cos(th_lo), std::sin(th_lo)};
        rvec v = {std::cos(th_hi), std::sin(th_hi)};
        if (span <= tol_ang) {
            // single ray; closure needs the equality pair plus the direction itself
            rvec p = detail::perp_ccw(u);
            c.halfspaces = {u, p, scaled(p, -1.0)};
        } else if (std::abs(gap - pi) <= tol_ang) {
            // half-plane: span is exactly pi, one supporting halfspace
            c.halfspaces = {detail::perp_ccw(u)};
        } else {
            c.halfspaces = {detail::perp_ccw(u), scaled(detail::perp_ccw(v), -1.0)};
        }
        c.simplicial = (m == 2 && span > tol_ang && std::abs(span - pi) > tol_ang);
        return c;
    }

    // n >= 3: simplicial only
    require(m == n, errc::unsupported_non_simplicial,
            "n >= 3 requires exactly n generators (simplicial cone)");
    auto inv = detail::invert(generators, n);
    require(inv.has_value(), errc::unsupported_non_simplicial,
            "generators are linearly dependent");
    for (rvec& h : *inv) h = normalized(h);
    c.halfspaces = std::move(*inv);
    c.simplicial = true;
    return c;
}

// Dual cone in generator form: generators of the dual are the halfspace
// vectors of the primal (always closed convex; membership uses >=).
inline ConeSpec dual(const ConeSpec& c) { return make_cone(c.halfspaces); }

inline bool contains(const ConeSpec& c, std::span<const double> x, bool closed) {
    require(static_cast<int>(x.size()) == c.dim, errc::dimension_mismatch, "contains: bad point");
    double scale = 1.0 + norm2(x);
    for (const rvec& h : c.halfspaces) {
        double v = dot(h, x);
        if (closed ? (v < -1e-12 * scale) : (v <= 1e-12 * scale)) return false;
    }
    return true;
}

// Lower bound on the distance from an interior point to the cone boundary;
// exact for halfspace intersections with unit normals.
inline double boundary_margin(const ConeSpec& c, std::span<const double> y) {
    double d = std::numeric_limits<double>::infinity();
    for (const rvec& h : c.halfspaces) d = std::min(d, dot(h, y) / norm2(h));
    return d;
}

namespace detail {

// Least squares min ||A_P lambda - t|| restricted to the passive index set,
// solved via normal equations (problem sizes <= 8).
inline rvec ls_subset(const std::vector<rvec>& V, const rvec& t, const std::vector<int>& P) {
    int k = static_cast<int>(P.size());
    rvec A(k * k), b(k);
    for (int i = 0; i < k; ++i) {
        b[i] = dot(V[P[i]], t);
        for (int j = 0; j < k; ++j) A[i * k + j] = dot(V[P[i]], V[P[j]]);
    }
    auto x = solve_dense(std::move(A), std::move(b), k);
    require(x.has_value(), errc::non_convergence, "NNLS normal equations singular");
    return *x;
}

}  // namespace detail

struct Projection {
    rvec point;
    double distance = 0.0;
};

// Euclidean projection onto the dual cone by Lawson-Hanson NNLS over the dual
// generators. Deterministic: ties in the active-set selection break by index.
inline Projection project_onto_dual(const ConeSpec& c, std::span<const double> t) {
    require(static_cast<int>(t.size()) == c.dim, errc::dimension_mismatch, "project: bad point");
    const std::vector<rvec>& V = c.halfspaces;  // generators of the dual
    const int m = static_cast<int>(V.size());
    const double tol = 1e-12 * (1.0 + norm2(t));
    std::vector<int> P;
    rvec lambda(m, 0.0);
    rvec resid(t.begin(), t.end());
    const int cap = 10 * m * c.dim + 32;
    int iters = 0;
    while (true) {
        int best = -1;
        double bestw = tol;
        for (int i = 0; i < m; ++i) {
            if (std::find(P.begin(), P.end(), i) != P.end()) continue;
            double w = dot(V[i], resid);
            if (w > bestw) {
                bestw = w;
                best = i;
            }
        }
        if (best < 0) break;
        P.push_back(best);
        rvec lp = detail::ls_subset(V, rvec(t.begin(), t.end()), P);
        while (*std::min_element(lp.begin(), lp.end()) <= 0.0) {
            if (++iters > cap) fail(errc::non_convergence, "NNLS iteration cap exceeded");
            double alpha = 1.0;
            for (std::size_t i = 0; i < P.size(); ++i)
                if (lp[i] <= 0.0) {
                    double li = lambda[P[i]];
                    if (li - lp[i] > 0) alpha = std::min(alpha, li / (li - lp[i]));
                }
            for (std::size_t i = 0; i < P.size(); ++i)
                lambda[P[i]] += alpha * (lp[i] - lambda[P[i]]);
            std::vector<int> keep;
            for (int i : P)
                if (lambda[i] > tol) keep.push_back(i);
            if (keep.size() == P.size()) keep.pop_back();  // force progress
            P = std::move(keep);
            if (P.empty()) {
                lp.clear();
                break;
            }
            lp = detail::ls_subset(V, rvec(t.begin(), t.end()), P);
        }
        for (int i = 0; i < m; ++i) lambda[i] = 0.0;
        for (std::size_t i = 0; i < P.size(); ++i) lambda[P[i]] = lp[i];
        rvec proj(c.dim, 0.0);
        for (int i = 0; i < m; ++i)
            for (int d = 0; d < c.dim; ++d) proj[d] += lambda[i] * V[i][d];
        for (int d = 0; d < c.dim; ++d) resid[d] = t[d] - proj[d];
        if (++iters > cap) fail(errc::non_convergence, "NNLS iteration cap exceeded");
    }
    Projection out;
    out.point. resize(c.dim);
    for (int i = 0; i < m; ++i)
        for (int d = 0; d < c.dim; ++d) out.point[d] += lambda[i] * V[i][d];
    out.distance = dist2(t, out.point);
    return out;
}

inline bool in_dual_plus_ball(const ConeSpec& c, std::span<const double> t, double R,
                              double tol = 1e-9) {
    require(R >= 0.0, errc::bad_parameters, "ball radius must be nonnegative");
    return project_onto_dual(c, t).distance <= R + tol;
}

namespace detail {

// Minimum-norm point of conv{v_i} by Caratheodory subset enumeration
// (m small at desk scale). Returns the point and its norm.
inline std::pair<rvec, double> min_norm_point(const std::vector<rvec>& vs, int n) {
    const int m = static_cast<int>(vs.size());
    rvec best;
    double bestn = std::numeric_limits<double>::infinity();
    std::vector<int> idx;
    auto consider = [&](const std::vector<int>& S) {
        int k = static_cast<int>(S.size());
        // minimize ||sum lambda_i v_i||^2 with sum lambda = 1 (KKT system)
        int dim = k + 1;
        rvec A(dim * dim, 0.0), b(dim, 0.0);
        for (int i = 0; i < k; ++i) {
            for (int j = 0; j < k; ++j) A[i * dim + j] = 2.0 * dot(vs[S[i]], vs[S[j]]);
            A[i * dim + k] = 1.0;
            A[k * dim + i] = 1.0;
        }
        b[k] = 1.0;
        auto sol = solve_dense(std::move(A), std::move(b), dim);
        if (!sol) return;
        for (int i = 0; i < k; ++i)
            if ((*sol)[i] < -1e-10) return;
        rvec p(n, 0.0);
        for (int i = 0; i < k; ++i)
            for (int d = 0; d < n; ++d) p[d] += (*sol)[i] * vs[S[i]][d];
        double nn = norm2(p);
        if (nn < bestn) {
            bestn = nn;
            best = std::move(p);
        }
    };
    std::vector<int> S;
    auto rec = [&](auto&& self, int start, int left) -> void {
        if (!S.empty()) consider(S);
        if (left == 0) return;
        for (int i = start; i < m; ++i) {
            S.push_back(i);
            self(self, i + 1, left - 1);
            S.pop_back();
        }
    };
    rec(rec, 0, std::min(m, n + 1));
    return {best, bestn};
}

}  // namespace detail

struct RegularityWitness {
    bool regular = false;
    rvec witness;  // satisfies witness . g_i >= 1 for all generators when regular
};

// A cone is regular iff int(dual) is nonempty, i.e. 0 is separated from the
// convex hull of the normalized generators.
inline RegularityWitness regularity(const ConeSpec& c) {
    std::vector<rvec> dirs;
    dirs.reserve(c.generators.size());
    for (const rvec& g : c.generators) dirs.push_back(normalized(g));
    auto [p, nn] = detail::min_norm_point(dirs, c.dim);
    RegularityWitness rw;
    if (nn < 1e-9) return rw;
    rvec y = scaled(p, 1.0 / (nn * nn));
    double wmin = std::numeric_limits<double>::infinity();
    for (const rvec& g : c.generators) wmin = std::min(wmin, dot(y, g));
    if (wmin <= 0) return rw;
    rw.regular = true;
    rw.witness = scaled(y, 1.0 / wmin);
    return rw;
}

inline bool is_regular(const ConeSpec& c) { return regularity(c).regular; }

inline double unit_ball_volume(int k) {
    require(k >= 1, errc::bad_parameters, "dimension must be >= 1");
    return std::pow(pi, 0.5 * k) / std::tgamma(0.5 * k + 1.0);
}

// Deterministic spread of unit directions covering the cone, extreme rays first.
inline std::vector<rvec> cone_directions(const ConeSpec& c, int count = 16) {
    std::vector<rvec> dirs;
    for (const rvec& g : c.generators) dirs.push_back(normalized(g));
    if (c.dim == 1 || count <= static_cast<int>(dirs.size())) return dirs;
    if (c.dim == 2) {
        double th_lo = std::atan2(dirs[0][1], dirs[0][0]);
        double th_hi = th_lo;
        for (const rvec& d : dirs) {
            double a = std::atan2(d[1], d[0]);
            double rel = a - th_lo;
            while (rel < 0) rel += two_pi;
            if (rel <= pi + 1e-12) th_hi = std::max(th_hi, th_lo + rel);
        }
        for (int i = 1; i < count; ++i) {
            double th = th_lo + (th_hi - th_lo) * i / count;
            dirs.push_back({std::cos(th), std::sin(th)});
        }
        return dirs;
    }
    // n = 3 simplicial: barycentric sweep of the generator simplex
    int per = std::max(2, count / 4);
    for (int i = 0; i <= per; ++i)
        for (int j = 0; j <= per - i; ++j) {
            double l1 = static_cast<double>(i) / per;
            double l2 = static_cast<double>(j) / per;
            double l3 = 1.0 - l1 - l2;
            rvec v(c.dim, 0.0);
            for (int d = 0; d < c.dim; ++d)
                v[d] = l1 * dirs[0][d] + l2 * dirs[1][d] + l3 * dirs[2][d];
            if (norm2(v) > 1e-12) dirs.push_back(normalized(v));
        }
    return dirs;
}

// ---- base regions (the y-domain B of a tube) ----

struct BaseRegion {
    enum class Kind { box, ball, truncated_cone };
    Kind kind = Kind::box;
    int dim = 0;
    rvec lo, hi;        // box
    rvec center;        // ball
    double radius = 0;  // ball
    ConeSpec cone;      // truncated cone
    double rho_min = 0, rho_max = 0;

    static BaseRegion box(rvec lo_, rvec hi_) {
        require(lo_.size() == hi_.size() && !lo_.empty(), errc::bad_parameters, "box bounds");
        for (std::size_t i = 0; i < lo_.size(); ++i)
            require(lo_[i] < hi_[i], errc::bad_parameters, "box must be nonempty and open");
        BaseRegion b;
        b.kind = Kind::box;
        b.dim = static_cast<int>(lo_.size());
        b.lo = std::move(lo_);
        b.hi = std::move(hi_);
        return b;
    }
    static BaseRegion ball(rvec center_, double radius_) {
        require(radius_ > 0, errc::bad_parameters, "ball radius must be positive");
        BaseRegion b;
        b.kind = Kind::ball;
        b.dim = static_cast<int>(center_.size());
        b.center = std::move(center_);
        b.radius = radius_;
        return b;
    }
    static BaseRegion truncated_cone(ConeSpec cone_, double rho_min_, double rho_max_) {
        require(rho_min_ > 0 && rho_min_ < rho_max_, errc::bad_parameters,
                "truncated cone needs 0 < rho_min < rho_max");
        BaseRegion b;
        b.kind = Kind::truncated_cone;
        b.dim = cone_.dim;
        b.cone = std::move(cone_);
        b.rho_min = rho_min_;
        b.rho_max = rho_max_;
        return b;
    }

    bool contains(std::span<const double> y) const {
        if (static_cast<int>(y.size()) != dim) return false;
        switch (kind) {
            case Kind::box:
                for (int i = 0; i < dim; ++i)
                    if (y[i] <= lo[i] || y[i] >= hi[i]) return false;
                return true;
            case Kind::ball:
                return dist2(y, center) < radius;
            case Kind::truncated_cone: {
                double r = norm2(y);
                return r > rho_min && r < rho_max && tubepw::contains(cone, y, false);
            }
        }
        return false;
    }

    // closed ball D(y0, delta) inside the region
    bool contains_ball(std::span<const double> y0, double delta) const {
        if (static_cast<int>(y0.size()) != dim || delta < 0) return false;
        switch (kind) {
            case Kind::box:
                for (int i = 0; i < dim; ++i)
                    if (y0[i] - delta <= lo[i] || y0[i] + delta >= hi[i]) return false;
                return true;
            case Kind::ball:
                return dist2(y0, center) + delta < radius;
            case Kind::truncated_cone: {
                double r = norm2(y0);
                if (r - delta <= rho_min || r + delta >= rho_max) return false;
                return boundary_margin(cone, y0) > delta;
            }
        }
        return false;
    }
};

}  // namespace tubepw
