// tubepw: batch front-end for tube-domain transform and norm experiments.
//
// Subcommands:
//   cone dual|regular   derived cone data
//   synth               evaluate F(z) = int f(t) e^{2 pi i t.z} dt at one z
//   recover             slice-transform density recovery to CSV
//   norm                weighted mixed norm of a tube function
//   support             U_alpha membership verdict for one frequency
//   verify <suite>      run a check suite, write reports, exit 0/1/2
//   describe <id>       entity parameters and derived quantities
//
// Exit codes: 0 success / all checks passed, 1 config or usage error,
// 2 at least one check failed.

#include <CLI11.hpp>

#include <iostream>

#include "tubepw/suite.hpp"

using namespace tubepw;

namespace {

struct CommonOpts {
    std::string config_path;
    std::string out_dir;
    double grid_scale = 1.0;
    double tol = 0.0;  // 0 = keep config tolerances
    int jobs = 1;
};

ExperimentConfig load_and_tune(const CommonOpts& o) {
    ExperimentConfig cfg = load_config_file(o.config_path);
    if (cfg.quad_specs.empty()) cfg.quad_specs["default"] = QuadSpec{};
    for (auto& [id, q] : cfg.quad_specs) {
        if (o.grid_scale != 1.0) {
            q = q.scaled_grid(o.grid_scale);
            q.y_points = std::max(16, static_cast<int>(q.y_points * o.grid_scale));
        }
        if (o.tol > 0.0) q.tol_abs = o.tol;
    }
    return cfg;
}

std::string output_dir(const CommonOpts& o, const ExperimentConfig& cfg) {
    if (!o.out_dir.empty()) return o.out_dir;
    if (!cfg.output_dir.empty()) return cfg.output_dir;
    if (const char* env = std::getenv("TUBEPW_OUT")) return env;
    return "tubepw_out";
}

std::string iso_timestamp() {
    std::time_t t = std::time(nullptr);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
    return buf;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"tube-domain Laplace transform laboratory"};
    app.require_subcommand(1);

    CommonOpts opts;
    app.add_option("--config", opts.config_path, "experiment config JSON")
        ->envname("TUBEPW_CONFIG");
    app.add_option("--out", opts.out_dir, "output directory (default TUBEPW_OUT)");
    app.add_option("--grid-scale", opts.grid_scale, "scale factor for grid resolutions");
    app.add_option("--tol", opts.tol, "override tol_abs in every quad spec");
    app.add_option("--jobs", opts.jobs, "concurrent checks in verify")->check(CLI::Range(1, 64));

    auto* cone_cmd = app.add_subcommand("cone", "cone geometry queries");
    std::string cone_id, cone_action;
    cone_cmd->add_option("action", cone_action, "dual or regular")->required();
    cone_cmd->add_option("--id", cone_id, "cone id in the config")->required();

    auto* synth_cmd = app.add_subcommand("synth", "evaluate a synthesized transform at z");
    std::string synth_density, synth_quad;
    rvec synth_x, synth_y;
    synth_cmd->add_option("--density", synth_density)->required();
    synth_cmd->add_option("--quad", synth_quad);
    synth_cmd->add_option("--x", synth_x, "Re z per axis")->required();
    synth_cmd->add_option("--y", synth_y, "Im z per axis")->required();

    auto* rec_cmd = app.add_subcommand("recover", "recover the density from one slice");
    std::string rec_fn, rec_quad, rec_out;
    rvec rec_y;
    bool rec_mollified = false;
    int rec_N = 1;
    rec_cmd->add_option("--tube-function", rec_fn)->required();
    rec_cmd->add_option("--y", rec_y, "height")->required();
    rec_cmd->add_option("--quad", rec_quad);
    rec_cmd->add_option("--csv", rec_out, "CSV output path (default stdout)");
    rec_cmd->add_flag("--mollified", rec_mollified, "mollified recovery path");
    rec_cmd->add_option("--mollifier-order", rec_N, "N in the product mollifier");

    auto* norm_cmd = app.add_subcommand("norm", "weighted mixed norm");
    std::string norm_fn, norm_base, norm_weight, norm_quad, norm_p = "2", norm_s = "1";
    norm_cmd->add_option("--tube-function", norm_fn)->required();
    norm_cmd->add_option("--base", norm_base)->required();
    norm_cmd->add_option("--weight", norm_weight)->required();
    norm_cmd->add_option("--p", norm_p, "exponent p (number or 'inf')");
    norm_cmd->add_option("--s", norm_s, "exponent s (number or 'inf')");
    norm_cmd->add_option("--quad", norm_quad);

    auto* sup_cmd = app.add_subcommand("support", "U_alpha membership verdict");
    std::string sup_base, sup_weight, sup_alpha = "1", sup_quad;
    rvec sup_t;
    sup_cmd->add_option("--base", sup_base)->required();
    sup_cmd->add_option("--weight", sup_weight)->required();
    sup_cmd->add_option("--alpha", sup_alpha, "alpha (number or 'inf')");
    sup_cmd->add_option("--t", sup_t, "frequency")->required();
    sup_cmd->add_option("--quad", sup_quad);

    auto* ver_cmd = app.add_subcommand("verify", "run a check suite");
    std::string suite_path;
    ver_cmd->add_option("suite", suite_path, "suite config JSON")->required();

    auto* desc_cmd = app.add_subcommand("describe", "entity description");
    std::string desc_id;
    desc_cmd->add_option("id", desc_id)->required();

    CLI11_PARSE(app, argc, argv);

    auto parse_exp = [](const std::string& s) {
        if (s == "inf" || s == "infinity") return std::numeric_limits<double>::infinity();
        return std::stod(s);
    };

    try {
        if (ver_cmd->parsed()) opts.config_path = suite_path;
        require(!opts.config_path.empty(), errc::config_parse,
                "a config is required (--config or the verify suite path)");
        ExperimentConfig cfg = load_and_tune(opts);
        auto quad_of = [&](const std::string& id) {
            return id.empty() ? QuadSpec{} : cfg.quad(id);
        };

        if (cone_cmd->parsed()) {
            const ConeSpec& c = cfg.cone(cone_id);
            if (cone_action == "dual") {
                std::cout << json{{"dual_generators", dual(c).generators}}.dump(2) << '\n';
            } else if (cone_action == "regular") {
                RegularityWitness w = regularity(c);
                json j{{"regular", w.regular}};
                if (w.regular) j["witness"] = w.witness;
                std::cout << j.dump(2) << '\n';
            } else {
                fail(errc::config_parse, "cone action must be dual or regular");
            }
        } else if (synth_cmd->parsed()) {
            const SpectralDensity& f = cfg.density(synth_density);
            require(synth_x.size() == synth_y.size() &&
                        static_cast<int>(synth_x.size()) == f.dim,
                    errc::dimension_mismatch, "--x/--y must have the density dimension");
            cvec z(f.dim);
            for (int d = 0; d < f.dim; ++d) z[d] = cplx(synth_x[d], synth_y[d]);
            SynthesisResult r = synthesize_detailed(f, z, quad_of(synth_quad));
            std::cout << json{{"re", r.value.real()},
                              {"im", r.value.imag()},
                              {"tail_estimate", r.tail_estimate}}
                             .dump(2)
                      << '\n';
        } else if (rec_cmd->parsed()) {
            const TubeFunction& F = cfg.tube_function(rec_fn);
            QuadSpec q = quad_of(rec_quad);
            RecoveredDensity r;
            if (rec_mollified) {
                MollifiedRecovery mr = recover_density_mollified(
                    F, rec_y, q, rec_N,
                    default_mollifier_basis(F.density ? F.density->cone : make_cone({{1.0}})));
                r = std::move(mr.density);
                std::cerr << "mollified status: " << mr.diag.status << '\n';
            } else {
                r = recover_density(F, rec_y, q);
            }
            if (rec_out.empty()) {
                write_density_csv(std::cout, r);
            } else {
                std::ofstream out(rec_out);
                require(out.good(), errc::io_error, "cannot open " + rec_out);
                write_density_csv(out, r);
                std::cerr << "wrote " << rec_out << '\n';
            }
        } else if (norm_cmd->parsed()) {
            NormParams np{parse_exp(norm_p), parse_exp(norm_s)};
            NormReport rep = mixed_norm_detailed(cfg.tube_function(norm_fn), cfg.base(norm_base),
                                                 cfg.weight(norm_weight), np, quad_of(norm_quad));
            std::cout << to_json(rep).dump(2) << '\n';
        } else if (sup_cmd->parsed()) {
            SupportSetQuery v = support_membership(sup_t, parse_exp(sup_alpha),
                                                   cfg.base(sup_base), cfg.weight(sup_weight),
                                                   quad_of(sup_quad));
            std::cout << to_json(v).dump(2) << '\n';
        } else if (desc_cmd->parsed()) {
            std::cout << describe(cfg, desc_id).dump(2) << '\n';
        } else if (ver_cmd->parsed()) {
            SuiteOutcome out = run_suite(cfg, opts.jobs);
            write_reports(cfg, out, output_dir(opts, cfg), iso_timestamp());
            for (const SuiteEntryResult& e : out.entries)
                for (const CheckResult& r : e.results)
                    std::cout << (r.passed ? "[PASS] " : "[FAIL] ") << e.id << " (" << r.check_id
                              << ") min_margin=" << r.min_margin
                              << (r.note.empty() ? "" : "  " + r.note) << '\n';
            if (!out.all_passed) return 2;
        }
        return 0;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
