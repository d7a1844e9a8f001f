// Acceptance suite: the contract-level properties of the laboratory, one
// criterion per line, each at its stated tolerance. Exit 0 iff all pass.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "tubepw/suite.hpp"

using namespace tubepw;

namespace {

int failures = 0;

void report(int idx, const char* title, bool ok, const std::string& detail) {
    std::printf("[%s] criterion %2d: %s  (%s)\n", ok ? "PASS" : "FAIL", idx, title,
                detail.c_str());
    if (!ok) ++failures;
}

QuadSpec desk() {
    QuadSpec q;
    q.slice_halfwidth = 50.0;
    q.slice_points = 2048;
    q.y_points = 96;
    return q;
}

ConeSpec halfline() { return make_cone({{1.0}}); }

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(double v) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.3e", v);
    return buf;
}

// max relative error of a recovery against the analytic density on |t| <= tmax,
// over rows with |f| > floor, excluding the support-edge row at t = 0
double roundtrip_rel_error(const TubeFunction& F, const SpectralDensity& f, const rvec& y,
                           const QuadSpec& q, double tmax, double floor_) {
    RecoveredDensity r = recover_density(F, y, q);
    double worst = 0.0;
    for (std::size_t i = 0; i < r.t.size(); ++i) {
        if (std::abs(r.t[i]) > tmax || std::abs(r.t[i]) < 0.75 * r.dt) continue;
        double want = eval_density(f, rvec{r.t[i]});
        if (std::abs(want) <= floor_) continue;
        worst = std::max(worst, std::abs(r.values[i] - want) / std::abs(want));
    }
    return worst;
}

void criterion1_roundtrip() {
    QuadSpec q = desk();
    bool ok = true;
    std::string detail;

    auto t0 = std::chrono::steady_clock::now();
    SpectralDensity fe = SpectralDensity::truncated_exponential(halfline(), {1.0});
    TubeFunction Fe =
        synthesized_function(fe, BaseRegion::truncated_cone(halfline(), 1e-8, 1e8), q);
    double worst_e = 0.0;
    for (double y : {0.25, 0.5})
        worst_e = std::max(worst_e, roundtrip_rel_error(Fe, fe, {y}, q, 3.0, 1e-6));
    double te = seconds_since(t0);
    ok = ok && worst_e <= 1e-3 && te < 10.0;

    t0 = std::chrono::steady_clock::now();
    SpectralDensity fg = SpectralDensity::gaussian({0.0}, 1.0);
    TubeFunction Fg = synthesized_function(fg, BaseRegion::box({-1e8}, {1e8}), q);
    double worst_g = 0.0;
    for (double y : {0.3, 0.7})
        worst_g = std::max(worst_g, roundtrip_rel_error(Fg, fg, {y}, q, 3.0, 1e-6));
    double tg = seconds_since(t0);
    ok = ok && worst_g <= 1e-3 && tg < 10.0;

    detail = "trunc-exp rel " + fmt(worst_e) + " in " + fmt(te) + " s; gaussian rel " +
             fmt(worst_g) + " in " + fmt(tg) + " s; tol 1e-3, budget 10 s each";
    report(1, "round-trip identity, synthesize then recover", ok, detail);
}

void criterion2_y_independence() {
    QuadSpec q = desk();
    auto F = closed_form_transform(SpectralDensity::truncated_exponential(halfline(), {1.0}));
    double res = y_independence_residual(*F, {0.5}, {2.0}, q);
    report(2, "y-independence of the recovered density", res <= 1e-4,
           "residual " + fmt(res) + " at y = 0.5 vs 2.0; tol 1e-4");
}

void criterion3_plancherel() {
    QuadSpec q = desk();
    bool ok = true;
    std::string detail;

    // gaussian pair, slices from quadrature synthesis
    {
        SpectralDensity f = SpectralDensity::gaussian({0.0}, 1.0);
        TubeFunction F = synthesized_function(f, BaseRegion::box({-1e8}, {1e8}), q);
        double y = 0.3;
        const double L = q.slice_halfwidth;
        const int M = q.slice_points;
        const double dx = 2 * L / M, dt = 1.0 / (2 * L);
        rvec ex(M), et(M);
        for (int m = 0; m < M; ++m)
            ex[m] = std::norm(F.eval({cplx(-L + m * dx, y)})) * dx;
        for (int j = 0; j < M; ++j) {
            double t = (j - M / 2) * dt;
            double fv = eval_density(f, rvec{t});
            et[j] = fv * fv * std::exp(-4.0 * pi * y * t) * dt;
        }
        double lhs = psum(ex), rhs = psum(et);
        double rel = std::abs(lhs - rhs) / rhs;
        ok = ok && rel <= 1e-5;
        detail += "gaussian rel " + fmt(rel);
    }
    // triangle pair, fine frequency grid for the kinked density
    {
        SpectralDensity f = SpectralDensity::triangle();
        auto F = closed_form_transform(f);
        QuadSpec qt;
        qt.slice_halfwidth = 200.0;
        qt.slice_points = 8192;
        double y = 0.2;
        const double L = qt.slice_halfwidth;
        const int M = qt.slice_points;
        const double dx = 2 * L / M, dt = 1.0 / (2 * L);
        rvec ex(M), et(M);
        for (int m = 0; m < M; ++m)
            ex[m] = std::norm(F->eval({cplx(-L + m * dx, y)})) * dx;
        for (int j = 0; j < M; ++j) {
            double t = (j - M / 2) * dt;
            double fv = eval_density(f, rvec{t});
            et[j] = fv * fv * std::exp(-4.0 * pi * y * t) * dt;
        }
        double lhs = psum(ex), rhs = psum(et);
        double rel = std::abs(lhs - rhs) / rhs;
        ok = ok && rel <= 1e-5;
        detail += ", triangle rel " + fmt(rel);
    }
    report(3, "Plancherel slice identity", ok, detail + "; tol 1e-5");
}

void criterion4_cor2() {
    auto t0 = std::chrono::steady_clock::now();
    QuadSpec q = desk();
    BaseRegion base = BaseRegion::truncated_cone(halfline(), 1e-6, 1e6);
    bool ok = true;
    std::string detail;
    struct Case {
        double a, want;
    } cases[] = {{1.0, 0.5}, {4.0, std::sqrt(1.0 / 8.0)}};
    for (const Case& c : cases) {
        CheckResult r = check_cor2_isometry(
            SpectralDensity::truncated_exponential(halfline(), {c.a}), -0.5, halfline(), base,
            q, 1e-3);
        double b = r.diagnostics.at("bergman"), d = r.diagnostics.at("dual");
        bool this_ok = r.passed && std::abs(b - c.want) <= 1e-3 * c.want &&
                       std::abs(d - c.want) <= 1e-3 * c.want;
        ok = ok && this_ok;
        detail += "a=" + std::to_string(static_cast<int>(c.a)) + ": bergman " + fmt(b) +
                  ", dual " + fmt(d) + " vs " + fmt(c.want) + "; ";
    }
    double el = seconds_since(t0);
    ok = ok && el < 30.0;
    report(4, "Corollary 2 isometry against the Beta-integral oracle", ok,
           detail + fmt(el) + " s < 30 s");
}

void criterion5_inequalities() {
    QuadSpec q = desk();
    BaseRegion base = BaseRegion::truncated_cone(halfline(), 1e-3, 50.0);
    WeightFn w = WeightFn::zero(base);
    SpectralDensity f = SpectralDensity::truncated_exponential(halfline(), {1.0});
    auto F = closed_form_transform(f);
    F->base = base;
    bool ok = true;
    std::string detail;

    CheckResult e4 =
        check_thm1_p1(*F, density_fn(f), base, w, 1.0, q, {{0.5}, {1.0}, {2.0}});
    ok = ok && e4.passed && e4.min_margin >= 0.0;
    detail += "Eq4 margin " + fmt(e4.min_margin);

    Thm1pResult p15 = check_thm1_p(*F, f, base, w, 1.5, 1.0, q, {0.5, 1.0, 2.0});
    ok = ok && p15.hausdorff_young.passed && p15.hausdorff_young.min_margin >= 0.0 &&
         p15.integrated.passed && p15.integrated.min_margin >= 0.0;
    detail += ", Eq5(p=1.5) margins " + fmt(p15.hausdorff_young.min_margin) + "/" +
              fmt(p15.integrated.min_margin);

    Thm1pResult p2 = check_thm1_p(*F, f, base, w, 2.0, 1.0, q, {0.5, 1.0, 2.0});
    double est = p2.hausdorff_young.diagnostics.at("quad_error_estimate");
    bool sharp = std::abs(p2.hausdorff_young.min_margin) <= 10.0 * std::max(est, 1e-12);
    ok = ok && p2.hausdorff_young.passed && p2.integrated.passed && sharp;
    detail += ", Eq10(p=2) |margin| " + fmt(std::abs(p2.hausdorff_young.min_margin)) +
              " <= 10 x est " + fmt(est);
    report(5, "Eq. (4)/(5) inequality suites with the p = 2 sharpness probe", ok, detail);
}

void criterion6_support() {
    QuadSpec q = desk();
    auto Fe = closed_form_transform(SpectralDensity::truncated_exponential(halfline(), {1.0}));
    RecoveredDensity re = recover_density(*Fe, {0.5}, q);
    CheckResult pos = check_support_containment(re, halfline(), 0.0, 1e-3);

    auto Fg = closed_form_transform(SpectralDensity::gaussian({0.0}, 1.0));
    RecoveredDensity rg = recover_density(*Fg, {0.5}, q);
    CheckResult neg = check_support_containment(rg, halfline(), 0.0, 1e-3);

    bool ok = pos.passed && !neg.passed;
    report(6, "support containment plus the gaussian negative control", ok,
           "outside mass " + fmt(pos.lhs[0]) + " <= " + fmt(pos.rhs[0]) +
               "; control outside mass " + fmt(neg.lhs[0]) + " correctly fails");
}

void criterion7_cor1() {
    QuadSpec q = desk();
    JOptimum jo = j_optimum(1.0, 1, 0.5, 1.0, 0.0, 0.5);
    double best = std::numeric_limits<double>::infinity();
    for (int i = 1; i <= 10000; ++i) {
        double rho = 10.0 * i / 10000.0;
        double A = 2.0;
        best = std::min(best, -A * std::log(0.5 * rho) + two_pi * rho);
    }
    bool j_ok = jo.j_value <= best + 1e-12 && best - jo.j_value <= 1e-4;

    rvec ladder;
    for (double r = 0.02; r < 0.95; r *= 1.5) ladder.push_back(r);
    CheckResult g = check_cor1_growth(density_fn(SpectralDensity::triangle()), halfline(), 0.0,
                                      0.5, 1.0, q, ladder, {1.0});
    bool ok = j_ok && g.passed && g.diagnostics.at("target_exponent") == 2.0;
    report(7, "Corollary 1: J(t) optimum and the growth exponent fit", ok,
           "brute-force gap " + fmt(best - jo.j_value) + " <= 1e-4; fitted exponent " +
               fmt(g.diagnostics.at("fitted_exponent")) + " <= 2.25");
}

void criterion8_lemma1() {
    QuadSpec q = desk();
    BaseRegion base = BaseRegion::truncated_cone(halfline(), 1e-3, 50.0);
    WeightFn w = WeightFn::zero(base);
    auto F = closed_form_transform(SpectralDensity::truncated_exponential(halfline(), {1.0}));
    F->base = base;
    CheckResult a = check_lemma1_bound(*F, {1.0}, 0.4, 2.0, 1.0, 2, base, w, q);
    CheckResult b = check_lemma1_bound(*F, {1.0}, 0.1, 2.0, 1.0, 2, base, w, q);
    TubeFunction S = *F;
    S.amplitude = 10.0;
    CheckResult c = check_lemma1_bound(S, {1.0}, 0.4, 2.0, 1.0, 2, base, w, q);
    bool ok = a.passed && b.passed && c.passed == a.passed;
    report(8, "Lemma 1 pointwise bound, delta in {0.4, 0.1}, scale-invariant verdict", ok,
           "margins " + fmt(a.min_margin) + ", " + fmt(b.min_margin) +
               "; x10 scaling keeps the verdict");
}

void criterion9_wedge() {
    QuadSpec q = desk();
    BaseRegion dom = BaseRegion::truncated_cone(halfline(), 1e-6, 1e6);
    WeightFn lin1 = WeightFn::linear(1.0, dom);
    EdgeOfWedgeResult tri = check_edge_of_wedge(SpectralDensity::triangle(), halfline(), lin1,
                                                lin1, 2.0, 1.0, q, 1e-6, 1e-3);
    EdgeOfWedgeResult bmp = check_edge_of_wedge(SpectralDensity::bump({0.0}, 0.5, 3),
                                                halfline(), lin1, lin1, 2.0, 1.0, q, 1e-6, 1e-3);
    bool guard = false;
    try {
        check_edge_of_wedge(SpectralDensity::bump({1.0}, 1.0, 3), halfline(), lin1, lin1, 2.0,
                            1.0, q);
    } catch (const Error& e) {
        guard = e.code() == errc::support_not_in_k;
    }
    bool ok = tri.mismatch.passed && tri.densities.passed && bmp.mismatch.passed &&
              bmp.densities.passed && guard;
    report(9, "edge-of-the-wedge gluing with the support guard", ok,
           "triangle ladder tail " + fmt(tri.mismatch.lhs.back()) + " < 1e-6, densities " +
               fmt(tri.densities.lhs[0]) + " <= 1e-3; bump ladder tail " +
               fmt(bmp.mismatch.lhs.back()) + "; guard fires on supp [0,2]");
}

void criterion10_mollified() {
    QuadSpec q = desk();  // epsilon schedule {0.2, 0.1, 0.05} by default
    auto F = closed_form_transform(SpectralDensity::truncated_exponential(halfline(), {1.0}));
    F->base = BaseRegion::truncated_cone(halfline(), 1e-8, 1e8);
    WeightFn w = WeightFn::zero(F->base);
    CheckResult r = check_thm3_recovery(*F, halfline(), w, 3.0, 1.0, q, 1, {{1.0}});

    MollifiedRecovery mr = recover_density_mollified(*F, {1.0}, q, 1, {{1.0}});
    double worst = 0.0;
    for (double t : {0.25, 0.5, 1.0, 1.5})
        worst = std::max(worst, std::abs(mr.density.value_at(t).real() - std::exp(-two_pi * t)));

    TubeFunction C;
    C.source = TubeFunction::Source::closed_form;
    C.formula = TubeFunction::Formula::constant;
    C.dim = 1;
    C.base = BaseRegion::box({0.0}, {1.0});
    CheckResult bad = check_thm3_recovery(C, halfline(), w, 3.0, 1.0, q, 1, {{1.0}});
    bool aborted = !bad.passed && bad.note.find("HardyLittlewoodUnbounded") != std::string::npos;

    bool ok = r.passed && worst <= 1e-3 && aborted;
    report(10, "mollified recovery at p = 3 with the Hardy-Littlewood gate", ok,
           "probe error " + fmt(worst) + " <= 1e-3 over eps {0.2, 0.1, 0.05}; control aborts: " +
               std::string(aborted ? "yes" : "no"));
}

void criterion11_cones() {
    std::mt19937 rng(20240809);
    std::uniform_real_distribution<double> u(-3.0, 3.0);
    bool bidual_ok = true;
    std::vector<ConeSpec> cones = {make_cone({{1.0}}), make_cone({{1, 0}, {1, 1}}),
                                   make_cone({{2, 1}, {1, 3}}),
                                   make_cone({{1, 0, 0}, {0.2, 1, 0}, {0, 0.3, 1}})};
    for (const ConeSpec& c : cones) {
        ConeSpec dd = dual(dual(c));
        for (int k = 0; k < 1000; ++k) {
            rvec p(c.dim);
            for (double& x : p) x = u(rng);
            if (contains(c, p, true) != contains(dd, p, true)) bidual_ok = false;
        }
    }

    ConeSpec skew = make_cone({{1, 0}, {1, 1}});
    ConeSpec d = dual(skew);
    bool oracle_ok = true;
    for (const rvec& h : skew.halfspaces) {
        double tight = std::numeric_limits<double>::infinity();
        for (const rvec& g : skew.generators) {
            double v = dot(h, g);
            if (v < -1e-10) oracle_ok = false;
            tight = std::min(tight, std::abs(v));
        }
        if (tight > 1e-10) oracle_ok = false;
    }
    for (const rvec& g : skew.generators)
        for (const rvec& v : d.generators)
            if (dot(g, v) < -1e-12) oracle_ok = false;

    bool reg_ok = is_regular(make_cone({{1, 0}, {0, 1}})) &&
                  !is_regular(make_cone({{1, 0}, {-1, 0}, {0, 1}}));
    bool ok = bidual_ok && oracle_ok && reg_ok;
    report(11, "cone geometry: biduality, dual oracle, regularity", ok,
           std::string("biduality 1000 pts x 4 cones: ") + (bidual_ok ? "ok" : "bad") +
               "; halfspace oracle: " + (oracle_ok ? "ok" : "bad") +
               "; half-plane irregular: " + (reg_ok ? "ok" : "bad"));
}

void criterion12_determinism() {
    namespace fs = std::filesystem;
    ExperimentConfig cfg = load_config_file(std::string(TUBEPW_CONFIG_DIR) + "/cor1_growth.json");
    for (auto& [id, q] : cfg.quad_specs) q = q.scaled_grid(0.5);
    fs::path a = fs::temp_directory_path() / "tubepw_acc_det_a";
    fs::path b = fs::temp_directory_path() / "tubepw_acc_det_b";
    SuiteOutcome o1 = run_suite(cfg);
    SuiteOutcome o2 = run_suite(cfg);
    write_reports(cfg, o1, a.string(), "t0");
    write_reports(cfg, o2, b.string(), "t0");
    auto slurp = [](const fs::path& p) {
        std::ifstream in(p);
        std::stringstream ss;
        ss << in.rdbuf();
        return ss.str();
    };
    bool ok = slurp(a / "results.json") == slurp(b / "results.json");
    report(12, "bundled suite reruns are byte-identical (timestamp excluded)", ok,
           ok ? "results.json matches byte for byte" : "results.json differs");
}

}  // namespace

int main() {
    std::printf("tubepw acceptance suite\n");
    criterion1_roundtrip();
    criterion2_y_independence();
    criterion3_plancherel();
    criterion4_cor2();
    criterion5_inequalities();
    criterion6_support();
    criterion7_cor1();
    criterion8_lemma1();
    criterion9_wedge();
    criterion10_mollified();
    criterion11_cones();
    criterion12_determinism();
    if (failures > 0) {
        std::printf("%d criterion(s) failed\n", failures);
        return 1;
    }
    std::printf("all 12 criteria passed\n");
    return 0;
}
