#include <catch2/catch_amalgamated.hpp>

#include "tubepw/checks.hpp"

using namespace tubepw;

namespace {

ConeSpec halfline() { return make_cone({{1.0}}); }

SpectralDensity texp(double a) {
    return SpectralDensity::truncated_exponential(halfline(), {a});
}

TubeFunction halfplane_closed(double a) {
    auto F = closed_form_transform(texp(a));
    REQUIRE(F.has_value());
    return *F;
}

QuadSpec desk_spec() {
    QuadSpec q;
    q.slice_halfwidth = 50.0;
    q.slice_points = 2048;
    q.y_points = 64;
    return q;
}

}  // namespace

TEST_CASE("Eq. (4): p = 1 bound holds with positive margin") {
    TubeFunction F = halfplane_closed(1.0);
    BaseRegion base = BaseRegion::truncated_cone(halfline(), 1e-3, 50.0);
    F.base = base;
    WeightFn w = WeightFn::zero(base);
    QuadSpec q = desk_spec();
    SpectralDensity f = texp(1.0);
    CheckResult res = check_thm1_p1(F, density_fn(f), base, w, 1.0, q,
                                    {{0.5}, {1.0}, {2.0}}, "halfplane a=1");
    CHECK(res.passed);
    CHECK(res.min_margin > 0.0);

    // far outside the dual cone the density vanishes, so the bound is trivial
    CheckResult far = check_thm1_p1(F, density_fn(f), base, w, 1.0, q, {{-5.0}});
    CHECK(far.passed);
    CHECK(far.lhs[0] == 0.0);

    // zero function: margins equal the nonnegative rhs
    TubeFunction Z = F;
    Z.amplitude = 0.0;
    CheckResult zero = check_thm1_p1(Z, [](const rvec&) { return 0.0; }, base, w, 1.0, q,
                                     {{0.5}, {1.0}});
    CHECK(zero.passed);
    CHECK(zero.min_margin >= 0.0);
}

TEST_CASE("Eq. (5)/(10): Hausdorff-Young per slice and integrated, p = 1.5") {
    TubeFunction F = halfplane_closed(1.0);
    BaseRegion base = BaseRegion::truncated_cone(halfline(), 1e-3, 50.0);
    F.base = base;
    WeightFn w = WeightFn::zero(base);
    QuadSpec q = desk_spec();
    Thm1pResult r = check_thm1_p(F, texp(1.0), base, w, 1.5, 1.0, q, {0.5, 1.0, 2.0});
    CHECK(r.hausdorff_young.passed);
    CHECK(r.hausdorff_young.min_margin > 0.0);
    CHECK(r.integrated.passed);
}

TEST_CASE("Eq. (10) at p = 2 is the Plancherel equality (sharpness probe)") {
    TubeFunction F = halfplane_closed(1.0);
    BaseRegion base = BaseRegion::truncated_cone(halfline(), 1e-3, 50.0);
    F.base = base;
    WeightFn w = WeightFn::zero(base);
    QuadSpec q = desk_spec();
    Thm1pResult r = check_thm1_p(F, texp(1.0), base, w, 2.0, 1.0, q, {0.5, 1.0, 2.0});
    CHECK(r.hausdorff_young.passed);
    // margins collapse to quadrature error at the equality case
    for (std::size_t i = 0; i < r.hausdorff_young.lhs.size(); ++i)
        CHECK_THAT(r.hausdorff_young.rhs[i] - r.hausdorff_young.lhs[i],
                   Catch::Matchers::WithinAbs(0.0, 1e-7));
}

TEST_CASE("support containment: recovered half-plane density vs the gaussian control") {
    QuadSpec q = desk_spec();
    TubeFunction F = halfplane_closed(1.0);
    RecoveredDensity r = recover_density(F, {0.5}, q);
    CheckResult pos = check_support_containment(r, halfline(), 0.0, 1e-3);
    CHECK(pos.passed);

    auto G = closed_form_transform(SpectralDensity::gaussian({0.0}, 1.0));
    REQUIRE(G.has_value());
    RecoveredDensity rg = recover_density(*G, {0.5}, q);
    CheckResult neg = check_support_containment(rg, halfline(), 0.0, 1e-3);
    CHECK_FALSE(neg.passed);

    RecoveredDensity zero = r;
    for (auto& v : zero.values) v = 0.0;
    CheckResult z = check_support_containment(zero, halfline(), 0.0, 1e-3);
    CHECK(z.passed);
}

TEST_CASE("j_optimum: closed form, brute-force oracle, monotone rho*") {
    // n=1, p=1/2, s=1, R=0, |t|=1: rho* = 1/pi
    JOptimum jo = j_optimum(1.0, 1, 0.5, 1.0, 0.0, 0.5);
    CHECK_THAT(jo.rho_star, Catch::Matchers::WithinRel(1.0 / pi, 1e-14));

    auto J = [&](double rho, double tn) {
        double A = 1.0 * (1.0 - 0.5) * (1.0 + 1.0) / (1.0 * 0.5);
        return -A * std::log(0.5 * rho) + two_pi * 0.0 * (1.0 + rho) + two_pi * rho * tn;
    };
    double best = std::numeric_limits<double>::infinity();
    for (int i = 1; i <= 10000; ++i) best = std::min(best, J(10.0 * i / 10000.0, 1.0));
    CHECK(jo.j_value <= best + 1e-12);      // the brute grid never beats the optimum
    CHECK_THAT(jo.j_value, Catch::Matchers::WithinAbs(best, 1e-4));

    double prev = std::numeric_limits<double>::infinity();
    for (double tn : {1.0, 2.0, 5.0, 20.0, 100.0}) {
        JOptimum j2 = j_optimum(tn, 1, 0.5, 1.0, 0.0, 0.5);
        CHECK(j2.rho_star < prev);
        prev = j2.rho_star;
    }
    CHECK_THROWS_AS(j_optimum(1.0, 1, 1.5, 1.0, 0.0, 0.5), Error);
}

TEST_CASE("Corollary 1 growth fit on the triangle density") {
    QuadSpec q = desk_spec();
    SpectralDensity tri = SpectralDensity::triangle();
    rvec ladder;
    for (double r = 0.02; r < 0.95; r *= 1.5) ladder.push_back(r);
    CheckResult res = check_cor1_growth(density_fn(tri), halfline(), 0.0, 0.5, 1.0, q,
                                        ladder, {1.0}, "triangle density");
    CHECK(res.passed);
    CHECK(res.diagnostics["target_exponent"] == 2.0);
    CHECK(res.diagnostics["fitted_exponent"] <= 2.25);

    // zero density: degenerate fit flagged, still a pass
    CheckResult z = check_cor1_growth([](const rvec&) { return 0.0; }, halfline(), 0.0, 0.5,
                                      1.0, q, ladder, {1.0});
    CHECK(z.passed);
    CHECK(z.diagnostics["degenerate_fit"] == 1.0);

    rvec tiny = {0.1, 0.2};
    CHECK_THROWS_AS(
        check_cor1_growth(density_fn(tri), halfline(), 0.0, 0.5, 1.0, q, tiny, {1.0}),
        Error);
}

TEST_CASE("Lemma 1 bound: bundled instance, delta shrink, scaling invariance") {
    TubeFunction F = halfplane_closed(1.0);
    BaseRegion base = BaseRegion::truncated_cone(halfline(), 1e-3, 50.0);
    F.base = base;
    WeightFn w = WeightFn::zero(base);
    QuadSpec q = desk_spec();
    CheckResult a = check_lemma1_bound(F, {1.0}, 0.4, 2.0, 1.0, 2, base, w, q);
    CHECK(a.passed);
    CheckResult b = check_lemma1_bound(F, {1.0}, 0.1, 2.0, 1.0, 2, base, w, q);
    CHECK(b.passed);
    CHECK(b.rhs[0] > a.rhs[0]);  // rhs grows like delta^{-1}

    TubeFunction S = F;
    S.amplitude = 10.0;
    CheckResult c = check_lemma1_bound(S, {1.0}, 0.4, 2.0, 1.0, 2, base, w, q);
    CHECK(c.passed == a.passed);
    CHECK_THAT(c.lhs[0], Catch::Matchers::WithinRel(10.0 * a.lhs[0], 1e-10));
    CHECK_THAT(c.rhs[0], Catch::Matchers::WithinRel(10.0 * a.rhs[0], 1e-10));

    CHECK_THROWS_AS(check_lemma1_bound(F, {0.2}, 0.4, 2.0, 1.0, 2, base, w, q), Error);
    CHECK_THROWS_AS(check_lemma1_bound(F, {1.0}, 0.4, 2.0, 1.0, 1, base, w, q), Error);
}

TEST_CASE("Corollary 2 isometry at alpha = -1/2") {
    QuadSpec q = desk_spec();
    q.y_points = 96;
    BaseRegion base = BaseRegion::truncated_cone(halfline(), 1e-6, 1e6);
    CheckResult a1 = check_cor2_isometry(texp(1.0), -0.5, halfline(), base, q, 1e-3);
    CHECK(a1.passed);
    CHECK_THAT(a1.diagnostics["bergman"], Catch::Matchers::WithinRel(0.5, 1e-3));
    CHECK_THAT(a1.diagnostics["dual"], Catch::Matchers::WithinRel(0.5, 1e-3));

    CheckResult a4 = check_cor2_isometry(texp(4.0), -0.5, halfline(), base, q, 1e-3);
    CHECK(a4.passed);
    CHECK_THAT(a4.diagnostics["dual"], Catch::Matchers::WithinRel(0.35355339, 1e-3));

    // alpha = 1/2: the Bergman-side integral diverges; the detector must fire
    CHECK_THROWS_AS(check_cor2_isometry(texp(1.0), 0.5, halfline(), base, q, 1e-3), Error);
}

TEST_CASE("edge of the wedge: triangle instance") {
    QuadSpec q = desk_spec();
    BaseRegion dom = BaseRegion::truncated_cone(halfline(), 1e-6, 1e6);
    WeightFn w1 = WeightFn::linear(1.0, dom);
    EdgeOfWedgeResult r = check_edge_of_wedge(SpectralDensity::triangle(), halfline(), w1, w1,
                                              2.0, 1.0, q, 1e-6, 1e-3, "triangle");
    CHECK(r.mismatch.passed);
    CHECK(r.mismatch.diagnostics["ladder_decreasing"] == 1.0);
    CHECK(r.mismatch.lhs.back() < 1e-6);
    CHECK(r.densities.passed);
}

TEST_CASE("edge of the wedge: bump instance and the support guard") {
    QuadSpec q = desk_spec();
    BaseRegion dom = BaseRegion::truncated_cone(halfline(), 1e-6, 1e6);
    WeightFn w1 = WeightFn::linear(1.0, dom);
    EdgeOfWedgeResult r = check_edge_of_wedge(SpectralDensity::bump({0.0}, 0.5, 3), halfline(),
                                              w1, w1, 2.0, 1.0, q, 1e-6, 1e-3, "bump");
    CHECK(r.mismatch.passed);
    CHECK(r.densities.passed);

    // support [0, 2] is not inside K = [-1, 1]: the guard must fire
    CHECK_THROWS_AS(check_edge_of_wedge(SpectralDensity::bump({1.0}, 1.0, 3), halfline(), w1,
                                        w1, 2.0, 1.0, q),
                    Error);
}

TEST_CASE("Theorem 3: mollified recovery with the Hardy-Littlewood gate") {
    QuadSpec q = desk_spec();
    TubeFunction F = halfplane_closed(1.0);
    BaseRegion base = BaseRegion::truncated_cone(halfline(), 1e-8, 1e8);
    F.base = base;
    WeightFn w = WeightFn::zero(base);
    CheckResult res = check_thm3_recovery(F, halfline(), w, 3.0, 1.0, q, 1, {{1.0}});
    CHECK(res.passed);
    CHECK(res.note.empty());
    CHECK(res.diagnostics["y_independence_residual"] < 1e-3);

    // non-decaying slice: abort with the Hardy-Littlewood note
    TubeFunction C;
    C.source = TubeFunction::Source::closed_form;
    C.formula = TubeFunction::Formula::constant;
    C.dim = 1;
    C.base = BaseRegion::box({0.0}, {1.0});
    CheckResult bad = check_thm3_recovery(C, halfline(), w, 3.0, 1.0, q, 1, {{1.0}});
    CHECK_FALSE(bad.passed);
    CHECK(bad.note.find("HardyLittlewoodUnbounded") != std::string::npos);
}

TEST_CASE("checks are reproducible bit for bit") {
    QuadSpec q = desk_spec();
    TubeFunction F = halfplane_closed(1.0);
    BaseRegion base = BaseRegion::truncated_cone(halfline(), 1e-3, 50.0);
    F.base = base;
    WeightFn w = WeightFn::zero(base);
    SpectralDensity f = texp(1.0);
    CheckResult a = check_thm1_p1(F, density_fn(f), base, w, 1.0, q, {{0.5}, {1.0}});
    CheckResult b = check_thm1_p1(F, density_fn(f), base, w, 1.0, q, {{0.5}, {1.0}});
    REQUIRE(a.lhs.size() == b.lhs.size());
    for (std::size_t i = 0; i < a.lhs.size(); ++i) CHECK(a.lhs[i] == b.lhs[i]);
    CHECK(a.rhs[0] == b.rhs[0]);
    CHECK(a.min_margin == b.min_margin);
}
