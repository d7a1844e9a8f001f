#pragma once

#include <atomic>
#include <chrono>
#include <filesystem>
#include <mutex>
#include <thread>

#include "serialize.hpp"

namespace tubepw {

// Resolved experiment configuration: named entities plus a list of check
// invocations. All references are by id; unresolved ids are a config error.
struct ExperimentConfig {
    std::map<std::string, ConeSpec> cones;
    std::map<std::string, BaseRegion> bases;
    std::map<std::string, WeightFn> weights;
    std::map<std::string, SpectralDensity> densities;
    std::map<std::string, TubeFunction> tube_functions;
    std::map<std::string, QuadSpec> quad_specs;
    std::vector<json> suite;
    std::string output_dir;
    std::vector<std::string> output_formats = {"json", "csv"};

    template <typename M>
    const typename M::mapped_type& resolve(const M& m, const std::string& id,
                                           const char* kind) const {
        auto it = m.find(id);
        if (it == m.end())
            fail(errc::unresolved_reference, std::string(kind) + " id not found: " + id);
        return it->second;
    }
    const ConeSpec& cone(const std::string& id) const { return resolve(cones, id, "cone"); }
    const BaseRegion& base(const std::string& id) const { return resolve(bases, id, "base"); }
    const WeightFn& weight(const std::string& id) const {
        return resolve(weights, id, "weight");
    }
    const SpectralDensity& density(const std::string& id) const {
        return resolve(densities, id, "density");
    }
    const TubeFunction& tube_function(const std::string& id) const {
        return resolve(tube_functions, id, "tube_function");
    }
    const QuadSpec& quad(const std::string& id) const {
        return resolve(quad_specs, id, "quad_spec");
    }
};

namespace detail {

inline BaseRegion base_from_json(const json& j, const ExperimentConfig& cfg) {
    std::string variant = j.at("variant");
    if (variant == "box") return BaseRegion::box(j.at("lo").get<rvec>(), j.at("hi").get<rvec>());
    if (variant == "ball")
        return BaseRegion::ball(j.at("center").get<rvec>(), j.at("radius").get<double>());
    if (variant == "truncated_cone") {
        ConeSpec c = j.at("cone").is_string() ? cfg.cone(j.at("cone").get<std::string>())
                                              : cone_from_json(j.at("cone"));
        return BaseRegion::truncated_cone(std::move(c), j.at("rho_min"), j.at("rho_max"));
    }
    fail(errc::config_parse, "unknown base variant: " + variant);
}

inline WeightFn weight_from_json(const json& j, const ExperimentConfig& cfg) {
    std::string variant = j.at("variant");
    BaseRegion dom = j.at("domain").is_string()
                         ? cfg.base(j.at("domain").get<std::string>())
                         : base_from_json(j.at("domain"), cfg);
    if (variant == "zero") return WeightFn::zero(std::move(dom));
    if (variant == "log_power")
        return WeightFn::log_power(j.at("params").at("alpha"), std::move(dom));
    if (variant == "linear") return WeightFn::linear(j.at("params").at("rate"), std::move(dom));
    if (variant == "tabulated") {
        const json& p = j.at("params");
        if (p.contains("csv")) {
            std::ifstream in(p.at("csv").get<std::string>());
            require(in.good(), errc::io_error,
                    "cannot open weight CSV: " + p.at("csv").get<std::string>());
            return tabulated_weight_from_csv(in, std::move(dom));
        }
        return WeightFn::tabulated(p.at("axes").get<std::vector<rvec>>(),
                                   p.at("values").get<rvec>(), std::move(dom));
    }
    fail(errc::config_parse, "unknown weight variant: " + variant);
}

inline SpectralDensity density_from_json(const json& j, const ExperimentConfig& cfg) {
    std::string variant = j.at("variant");
    if (variant == "truncated_exponential") {
        ConeSpec c = j.at("cone").is_string() ? cfg.cone(j.at("cone").get<std::string>())
                                              : cone_from_json(j.at("cone"));
        return SpectralDensity::truncated_exponential(std::move(c),
                                                      j.at("params").at("w").get<rvec>());
    }
    if (variant == "gaussian")
        return SpectralDensity::gaussian(j.at("params").at("center").get<rvec>(),
                                         j.at("params").at("sigma"));
    if (variant == "triangle") return SpectralDensity::triangle();
    if (variant == "bump")
        return SpectralDensity::bump(j.at("params").at("center").get<rvec>(),
                                     j.at("params").at("radius"),
                                     j.at("params").value("order", 3));
    fail(errc::config_parse, "unknown density variant: " + variant);
}

inline TubeFunction tube_function_from_json(const json& j, const ExperimentConfig& cfg) {
    std::string source = j.at("source");
    TubeFunction F;
    if (source == "closed_form") {
        const SpectralDensity& f = cfg.density(j.at("density").get<std::string>());
        auto Fc = closed_form_transform(f);
        require(Fc.has_value(), errc::config_parse,
                "density admits no closed-form transform: " +
                    j.at("density").get<std::string>());
        F = *Fc;
    } else if (source == "synthesized") {
        const SpectralDensity& f = cfg.density(j.at("density").get<std::string>());
        QuadSpec q = j.contains("quad") ? cfg.quad(j.at("quad").get<std::string>()) : QuadSpec{};
        BaseRegion base = j.contains("base")
                              ? (j.at("base").is_string()
                                     ? cfg.base(j.at("base").get<std::string>())
                                     : base_from_json(j.at("base"), cfg))
                              : BaseRegion::box(rvec(f.dim, -1e8), rvec(f.dim, 1e8));
        F = synthesized_function(f, std::move(base), std::move(q));
    } else if (source == "external") {
        auto s = std::make_shared<ExternalSlices>();
        s->halfwidth = j.at("halfwidth");
        s->heights = j.at("heights").get<rvec>();
        for (const json& sl : j.at("samples")) {
            cvec v;
            for (const json& pair : sl) v.emplace_back(pair.at(0), pair.at(1));
            s->samples.push_back(std::move(v));
        }
        F.source = TubeFunction::Source::external;
        F.dim = 1;
        F.slices = std::move(s);
        F.base = BaseRegion::box({-1e8}, {1e8});
    } else {
        fail(errc::config_parse, "unknown tube function source: " + source);
    }
    if (j.contains("base") && source != "synthesized")
        F.base = j.at("base").is_string() ? cfg.base(j.at("base").get<std::string>())
                                          : base_from_json(j.at("base"), cfg);
    if (j.contains("amplitude")) F.amplitude = j.at("amplitude").get<double>();
    if (j.contains("xshift")) F.xshift = j.at("xshift").get<rvec>();
    return F;
}

}  // namespace detail

inline ExperimentConfig load_config(const json& root) {
    ExperimentConfig cfg;
    try {
        if (root.contains("cones"))
            for (auto& [id, j] : root.at("cones").items()) cfg.cones[id] = cone_from_json(j);
        if (root.contains("bases"))
            for (auto& [id, j] : root.at("bases").items())
                cfg.bases[id] = detail::base_from_json(j, cfg);
        if (root.contains("weights"))
            for (auto& [id, j] : root.at("weights").items())
                cfg.weights[id] = detail::weight_from_json(j, cfg);
        if (root.contains("densities"))
            for (auto& [id, j] : root.at("densities").items())
                cfg.densities[id] = detail::density_from_json(j, cfg);
        if (root.contains("quad_specs"))
            for (auto& [id, j] : root.at("quad_specs").items())
                cfg.quad_specs[id] = quadspec_from_json(j);
        if (root.contains("tube_functions"))
            for (auto& [id, j] : root.at("tube_functions").items())
                cfg.tube_functions[id] = detail::tube_function_from_json(j, cfg);
        if (root.contains("suite"))
            for (const json& j : root.at("suite")) cfg.suite.push_back(j);
        if (root.contains("output")) {
            cfg.output_dir = root.at("output").value("dir", "");
            if (root.at("output").contains("formats"))
                cfg.output_formats =
                    root.at("output").at("formats").get<std::vector<std::string>>();
        }
    } catch (const Error&) {
        throw;
    } catch (const std::exception& e) {
        fail(errc::config_parse, e.what());
    }
    return cfg;
}

inline ExperimentConfig load_config_file(const std::string& path) {
    std::ifstream in(path);
    require(in.good(), errc::io_error, "cannot open config: " + path);
    json root;
    try {
        in >> root;
    } catch (const std::exception& e) {
        fail(errc::config_parse, e.what());
    }
    return load_config(root);
}

// ---- check dispatch ----

struct SuiteEntryResult {
    std::string id;
    std::vector<CheckResult> results;  // some checks emit two sub-results
    double runtime_seconds = 0.0;
};

inline double entry_alpha(const json& j, const char* key, double dflt) {
    if (!j.contains(key)) return dflt;
    if (j.at(key).is_string()) return std::numeric_limits<double>::infinity();
    return j.at(key).get<double>();
}

inline std::vector<CheckResult> run_check(const ExperimentConfig& cfg, const json& j) {
    std::string kind = j.at("check");
    std::string id = j.value("id", kind);
    QuadSpec q = j.contains("quad") ? cfg.quad(j.at("quad").get<std::string>()) : QuadSpec{};

    if (kind == "thm1_p1") {
        std::vector<rvec> ts;
        for (const json& t : j.at("t_samples")) ts.push_back(t.get<rvec>());
        CheckResult r = check_thm1_p1(
            cfg.tube_function(j.at("tube_function").get<std::string>()),
            density_fn(cfg.density(j.at("density").get<std::string>())),
            cfg.base(j.at("base").get<std::string>()),
            cfg.weight(j.at("weight").get<std::string>()), entry_alpha(j, "s", 1.0), q, ts, id);
        return {r};
    }
    if (kind == "thm1_p") {
        Thm1pResult r = check_thm1_p(cfg.tube_function(j.at("tube_function").get<std::string>()),
                                     cfg.density(j.at("density").get<std::string>()),
                                     cfg.base(j.at("base").get<std::string>()),
                                     cfg.weight(j.at("weight").get<std::string>()),
                                     j.at("p").get<double>(), entry_alpha(j, "s", 1.0), q,
                                     j.at("y_samples").get<rvec>(), id);
        return {r.hausdorff_young, r.integrated};
    }
    if (kind == "support_containment") {
        RecoveredDensity r = recover_density(
            cfg.tube_function(j.at("tube_function").get<std::string>()),
            j.at("height").get<rvec>(), q);
        CheckResult c = check_support_containment(
            r, cfg.cone(j.at("cone").get<std::string>()), j.value("R", 0.0),
            j.value("tol", 1e-3), j.value("geometric_margin", 0.02), id);
        return {c};
    }
    if (kind == "cor1_growth") {
        rvec ladder;
        const json& l = j.at("ladder");
        double r0 = l.at("r0");
        double fac = l.at("factor");
        for (int k = 0; k < l.at("count").get<int>(); ++k) ladder.push_back(r0 * std::pow(fac, k));
        CheckResult c = check_cor1_growth(
            density_fn(cfg.density(j.at("density").get<std::string>())),
            cfg.cone(j.at("cone").get<std::string>()), j.value("R_psi", 0.0),
            j.at("p").get<double>(), entry_alpha(j, "s", 1.0), q, ladder,
            j.at("ray").get<rvec>(), id);
        return {c};
    }
    if (kind == "j_optimum") {
        JOptimum jo = j_optimum(j.at("t_norm"), j.at("n"), j.at("p"), j.at("s"),
                                j.value("R_psi", 0.0), j.at("eps_v"));
        // brute-force grid oracle on rho in (0, 10]
        double A = j.at("n").get<int>() * (1.0 - j.at("p").get<double>()) *
                   (1.0 + j.at("s").get<double>()) / (j.at("s").get<double>() * j.at("p").get<double>());
        double best = std::numeric_limits<double>::infinity();
        for (int i = 1; i <= 10000; ++i) {
            double rho = 10.0 * i / 10000.0;
            double val = -A * std::log(j.at("eps_v").get<double>() * rho) +
                         two_pi * j.value("R_psi", 0.0) * (1.0 + rho) +
                         two_pi * rho * j.at("t_norm").get<double>();
            best = std::min(best, val);
        }
        CheckResult c;
        c.check_id = "j_optimum";
        c.instance = id;
        c.lhs = {jo.j_value};
        c.rhs = {best + 1e-4};
        c.diagnostics["rho_star"] = jo.rho_star;
        c.diagnostics["brute_min"] = best;
        c.diagnostics["gap"] = best - jo.j_value;
        c.passed = jo.j_value <= best + 1e-12 && best - jo.j_value <= 1e-4;
        c.min_margin = best + 1e-4 - jo.j_value;
        return {c};
    }
    if (kind == "lemma1_bound") {
        CheckResult c = check_lemma1_bound(
            cfg.tube_function(j.at("tube_function").get<std::string>()),
            j.at("y0").get<rvec>(), j.at("delta"), j.at("p"), entry_alpha(j, "s", 1.0),
            j.at("N"), cfg.base(j.at("base").get<std::string>()),
            cfg.weight(j.at("weight").get<std::string>()), q, id);
        return {c};
    }
    if (kind == "cor2_isometry") {
        CheckResult c = check_cor2_isometry(cfg.density(j.at("density").get<std::string>()),
                                            j.at("alpha"), cfg.cone(j.at("cone").get<std::string>()),
                                            cfg.base(j.at("base").get<std::string>()), q,
                                            j.value("tol", 1e-3), id);
        return {c};
    }
    if (kind == "edge_of_wedge") {
        EdgeOfWedgeResult r = check_edge_of_wedge(
            cfg.density(j.at("density").get<std::string>()),
            cfg.cone(j.at("cone").get<std::string>()),
            cfg.weight(j.at("weight1").get<std::string>()),
            cfg.weight(j.at("weight2").get<std::string>()), j.at("p"),
            entry_alpha(j, "s", 1.0), q, j.value("mismatch_tol", 1e-6),
            j.value("density_tol", 1e-3), id);
        return {r.mismatch, r.densities};
    }
    if (kind == "thm3_recovery") {
        std::vector<rvec> basis;
        if (j.contains("basis"))
            for (const json& b : j.at("basis")) basis.push_back(b.get<rvec>());
        else
            basis = default_mollifier_basis(cfg.cone(j.at("cone").get<std::string>()));
        CheckResult c = check_thm3_recovery(
            cfg.tube_function(j.at("tube_function").get<std::string>()),
            cfg.cone(j.at("cone").get<std::string>()),
            cfg.weight(j.at("weight").get<std::string>()), j.at("p"),
            entry_alpha(j, "s", 1.0), q, j.value("N", 1), basis, id);
        return {c};
    }
    if (kind == "roundtrip") {
        // synthesize -> recover against the analytic density
        const SpectralDensity& f = cfg.density(j.at("density").get<std::string>());
        const TubeFunction& F = cfg.tube_function(j.at("tube_function").get<std::string>());
        CheckResult c;
        c.check_id = "roundtrip";
        c.instance = id;
        double worst = 0.0;
        double tmax = j.value("t_max", 3.0);
        double floor_ = j.value("density_floor", 1e-6);
        for (const json& yj : j.at("heights")) {
            rvec y = yj.get<rvec>();
            RecoveredDensity r = recover_density(F, y, q);
            for (std::size_t i = 0; i < r.t.size(); ++i) {
                if (std::abs(r.t[i]) > tmax) continue;
                if (std::abs(r.t[i]) < 0.75 * r.dt) continue;  // support-edge row
                double want = eval_density(f, rvec{r.t[i]});
                if (std::abs(want) <= floor_) continue;
                worst = std::max(worst, std::abs(r.values[i] - want) / std::abs(want));
            }
        }
        c.lhs = {worst};
        c.rhs = {j.value("tol", 1e-3)};
        c.finish(1e-300);
        return {c};
    }
    if (kind == "y_independence") {
        const TubeFunction& F = cfg.tube_function(j.at("tube_function").get<std::string>());
        CheckResult c;
        c.check_id = "y_independence";
        c.instance = id;
        c.lhs = {y_independence_residual(F, j.at("y1").get<rvec>(), j.at("y2").get<rvec>(), q)};
        c.rhs = {j.value("tol", 1e-4)};
        c.finish(1e-300);
        return {c};
    }
    fail(errc::config_parse, "unknown check kind: " + kind);
}

// ---- suite runner ----

struct SuiteOutcome {
    std::vector<SuiteEntryResult> entries;
    bool all_passed = true;
};

inline SuiteOutcome run_suite(const ExperimentConfig& cfg, int jobs = 1) {
    SuiteOutcome out;
    out.entries.resize(cfg.suite.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
        while (true) {
            std::size_t i = next.fetch_add(1);
            if (i >= cfg.suite.size()) return;
            auto start = std::chrono::steady_clock::now();
            SuiteEntryResult& e = out.entries[i];
            e.id = cfg.suite[i].value("id", cfg.suite[i].value("check", "check"));
            try {
                e.results = run_check(cfg, cfg.suite[i]);
            } catch (const Error& err) {
                if (err.code() == errc::unresolved_reference ||
                    err.code() == errc::config_parse)
                    throw;  // config problems abort the suite
                CheckResult c;
                c.check_id = cfg.suite[i].value("check", "check");
                c.instance = e.id;
                c.passed = false;
                c.note = err.what();
                e.results = {c};
            }
            e.runtime_seconds =
                std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        }
    };
    if (jobs <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        std::exception_ptr eptr;
        std::mutex emx;
        for (int k = 0; k < jobs; ++k)
            pool.emplace_back([&] {
                try {
                    worker();
                } catch (...) {
                    std::scoped_lock lk(emx);
                    if (!eptr) eptr = std::current_exception();
                }
            });
        for (auto& th : pool) th.join();
        if (eptr) std::rethrow_exception(eptr);
    }
    for (const SuiteEntryResult& e : out.entries)
        for (const CheckResult& r : e.results)
            if (!r.passed) out.all_passed = false;
    return out;
}

inline void write_reports(const ExperimentConfig& cfg, const SuiteOutcome& out,
                          const std::string& dir, const std::string& timestamp) {
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    json results = json::array();
    for (const SuiteEntryResult& e : out.entries)
        for (const CheckResult& r : e.results) {
            json jr = to_json(r);
            jr["entry_id"] = e.id;
            results.push_back(std::move(jr));
        }
    json root{{"timestamp", timestamp}, {"results", results}};
    bool want_json = std::find(cfg.output_formats.begin(), cfg.output_formats.end(), "json") !=
                     cfg.output_formats.end();
    bool want_csv = std::find(cfg.output_formats.begin(), cfg.output_formats.end(), "csv") !=
                    cfg.output_formats.end();
    if (want_json) {
        std::ofstream jf(fs::path(dir) / "results.json");
        jf << root.dump(2) << '\n';
    }
    if (want_csv) {
        std::ofstream cf(fs::path(dir) / "summary.csv");
        cf << "check_id,passed,min_margin,runtime\n";
        for (const SuiteEntryResult& e : out.entries)
            for (const CheckResult& r : e.results)
                cf << (r.check_id + (e.id != r.check_id ? ":" + e.id : "")) << ','
                   << (r.passed ? 1 : 0) << ',' << r.min_margin << ',' << e.runtime_seconds
                   << '\n';
        for (const SuiteEntryResult& e : out.entries)
            for (std::size_t k = 0; k < e.results.size(); ++k) {
                const CheckResult& r = e.results[k];
                if (r.lhs.empty()) continue;
                std::ofstream tf(fs::path(dir) /
                                 (e.id + (e.results.size() > 1 ? "_" + std::to_string(k) : "") +
                                  "_trace.csv"));
                tf << "index,lhs,rhs\n";
                for (std::size_t i = 0; i < r.lhs.size(); ++i)
                    tf << i << ',' << r.lhs[i] << ','
                       << (r.rhs.size() == 1 ? r.rhs[0] : r.rhs[i]) << '\n';
            }
    }
}

// human-readable entity description with derived quantities
inline json describe(const ExperimentConfig& cfg, const std::string& id) {
    if (auto it = cfg.cones.find(id); it != cfg.cones.end()) {
        const ConeSpec& c = it->second;
        ConeSpec d = dual(c);
        return json{{"kind", "cone"},
                    {"dim", c.dim},
                    {"generators", c.generators},
                    {"dual_generators", d.generators},
                    {"simplicial", c.simplicial},
                    {"regular", is_regular(c)}};
    }
    if (auto it = cfg.weights.find(id); it != cfg.weights.end()) {
        SlopeEstimate s = slope(it->second);
        json j = to_json(it->second);
        j["kind"] = "weight";
        j["slope"] = s.value;
        j["slope_estimated"] = s.estimated;
        return j;
    }
    if (auto it = cfg.densities.find(id); it != cfg.densities.end()) {
        const SpectralDensity& f = it->second;
        json j = to_json(f);
        j["kind"] = "density";
        switch (f.support.kind) {
            case SupportDesc::Kind::all_space: j["support"] = "all_space"; break;
            case SupportDesc::Kind::box: j["support"] = json{{"box_lo", f.support.lo}, {"box_hi", f.support.hi}}; break;
            case SupportDesc::Kind::ball: j["support"] = json{{"ball_center", f.support.center}, {"ball_radius", f.support.radius}}; break;
            default: j["support"] = "dual_cone"; break;
        }
        if (f.kind == SpectralDensity::Kind::trunc_exp) j["decay_certificate"] = f.decay;
        j["closed_form_transform"] = closed_form_transform(f).has_value();
        return j;
    }
    if (auto it = cfg.bases.find(id); it != cfg.bases.end()) {
        json j = to_json(it->second);
        j["kind"] = "base";
        return j;
    }
    if (auto it = cfg.quad_specs.find(id); it != cfg.quad_specs.end()) {
        json j = to_json(it->second);
        j["kind"] = "quad_spec";
        return j;
    }
    if (auto it = cfg.tube_functions.find(id); it != cfg.tube_functions.end()) {
        const TubeFunction& F = it->second;
        json j{{"kind", "tube_function"}, {"dim", F.dim}};
        j["source"] = F.source == TubeFunction::Source::closed_form ? "closed_form"
                      : F.source == TubeFunction::Source::synthesized ? "synthesized"
                                                                       : "external";
        j["base"] = to_json(F.base);
        return j;
    }
    fail(errc::unresolved_reference, "no entity with id: " + id);
}

}  // namespace tubepw
