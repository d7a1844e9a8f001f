#pragma once

#include <fstream>

#include <json.hpp>

#include "checks.hpp"

namespace tubepw {

using json = nlohmann::ordered_json;

// ---- JSON <-> domain types. Cones serialize as {dim, generators}; the
// halfspace form is always re-derived on load. ----

inline json to_json(const ConeSpec& c) {
    return json{{"dim", c.dim}, {"generators", c.generators}};
}

inline ConeSpec cone_from_json(const json& j) {
    require(j.contains("generators"), errc::config_parse, "cone needs generators");
    std::vector<rvec> gens = j.at("generators").get<std::vector<rvec>>();
    ConeSpec c = make_cone(gens);
    if (j.contains("dim"))
        require(j.at("dim").get<int>() == c.dim, errc::config_parse, "cone dim mismatch");
    return c;
}

inline json to_json(const BaseRegion& b) {
    switch (b.kind) {
        case BaseRegion::Kind::box:
            return json{{"variant", "box"}, {"lo", b.lo}, {"hi", b.hi}};
        case BaseRegion::Kind::ball:
            return json{{"variant", "ball"}, {"center", b.center}, {"radius", b.radius}};
        case BaseRegion::Kind::truncated_cone:
            return json{{"variant", "truncated_cone"},
                        {"cone", to_json(b.cone)},
                        {"rho_min", b.rho_min},
                        {"rho_max", b.rho_max}};
    }
    return {};
}

inline json to_json(const WeightFn& w) {
    json j{{"domain", to_json(w.domain)}};
    switch (w.kind) {
        case WeightFn::Kind::zero:
            j["variant"] = "zero";
            break;
        case WeightFn::Kind::log_power:
            j["variant"] = "log_power";
            j["params"] = json{{"alpha", w.alpha}};
            break;
        case WeightFn::Kind::linear:
            j["variant"] = "linear";
            j["params"] = json{{"rate", w.rate}};
            break;
        case WeightFn::Kind::tabulated:
            j["variant"] = "tabulated";
            j["params"] = json{{"axes", w.grid_axes}, {"values", w.values}};
            break;
    }
    return j;
}

inline json to_json(const SpectralDensity& f) {
    switch (f.kind) {
        case SpectralDensity::Kind::trunc_exp:
            return json{{"variant", "truncated_exponential"},
                        {"cone", to_json(f.cone)},
                        {"params", json{{"w", f.w}}}};
        case SpectralDensity::Kind::gaussian:
            return json{{"variant", "gaussian"},
                        {"params", json{{"center", f.center}, {"sigma", f.sigma}}}};
        case SpectralDensity::Kind::triangle:
            return json{{"variant", "triangle"}};
        case SpectralDensity::Kind::bump:
            return json{{"variant", "bump"},
                        {"params", json{{"center", f.center},
                                        {"radius", f.sigma},
                                        {"order", f.bump_order}}}};
    }
    return {};
}

inline json to_json(const QuadSpec& q) {
    return json{{"slice_halfwidth", q.slice_halfwidth},
                {"slice_points", q.slice_points},
                {"t_truncation", q.t_truncation},
                {"y_points", q.y_points},
                {"tol_rel", q.tol_rel},
                {"tol_abs", q.tol_abs},
                {"epsilon_schedule", q.epsilon_schedule},
                {"use_closed_form", q.use_closed_form},
                {"tail_order", q.tail_order},
                {"slice_edge_tol", q.slice_edge_tol}};
}

inline QuadSpec quadspec_from_json(const json& j) {
    QuadSpec q;
    if (j.contains("slice_halfwidth")) q.slice_halfwidth = j.at("slice_halfwidth");
    if (j.contains("slice_points")) q.slice_points = j.at("slice_points");
    if (j.contains("t_truncation")) q.t_truncation = j.at("t_truncation");
    if (j.contains("y_points")) q.y_points = j.at("y_points");
    if (j.contains("tol_rel")) q.tol_rel = j.at("tol_rel");
    if (j.contains("tol_abs")) q.tol_abs = j.at("tol_abs");
    if (j.contains("epsilon_schedule")) q.epsilon_schedule = j.at("epsilon_schedule").get<rvec>();
    if (j.contains("use_closed_form")) q.use_closed_form = j.at("use_closed_form");
    if (j.contains("tail_order")) q.tail_order = j.at("tail_order");
    if (j.contains("slice_edge_tol")) q.slice_edge_tol = j.at("slice_edge_tol");
    q.validate();
    return q;
}

inline json to_json(const CheckResult& r) {
    json d = json::object();
    for (const auto& [k, v] : r.diagnostics) d[k] = v;
    return json{{"check_id", r.check_id}, {"instance", r.instance},
                {"passed", r.passed},     {"min_margin", r.min_margin},
                {"lhs", r.lhs},           {"rhs", r.rhs},
                {"diagnostics", d},       {"note", r.note}};
}

inline json to_json(const SupportSetQuery& v) {
    const char* verdict = v.verdict == SupportSetQuery::Verdict::converges    ? "Converges"
                          : v.verdict == SupportSetQuery::Verdict::diverges ? "Diverges"
                                                                            : "Inconclusive";
    json j{{"t", v.t},
           {"alpha", std::isinf(v.alpha) ? json("inf") : json(v.alpha)},
           {"verdict", verdict},
           {"min_ray_exponent", v.min_ray_exponent},
           {"margin", v.margin},
           {"slope_widened", v.slope_widened}};
    if (v.integral_value >= 0.0) j["integral_value"] = v.integral_value;
    return j;
}

inline json to_json(const NormReport& r) {
    const char* regime = r.regime == NormParams::Regime::finite_finite ? "finite_finite"
                         : r.regime == NormParams::Regime::p_finite_s_inf ? "p_finite_s_inf"
                                                                          : "both_inf";
    return json{{"value", r.value},
                {"regime", regime},
                {"overflow", r.overflow},
                {"max_slice_edge", r.max_slice_edge},
                {"y_nodes", r.y_nodes}};
}

// CSV for recovered densities: t, re, im (trusted rows marked)
inline void write_density_csv(std::ostream& os, const RecoveredDensity& r) {
    os << "t,re,im,trusted\n";
    for (std::size_t i = 0; i < r.t.size(); ++i)
        os << r.t[i] << ',' << r.values[i].real() << ',' << r.values[i].imag() << ','
           << (r.trust_mask.empty() || r.trust_mask[i] ? 1 : 0) << '\n';
}

// CSV loader for tabulated weights: rows "y_1,...,y_n,value" on a full grid
inline WeightFn tabulated_weight_from_csv(std::istream& is, BaseRegion domain) {
    std::vector<rvec> points;
    rvec values;
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::stringstream ss(line);
        rvec row;
        std::string cell;
        while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
        require(row.size() >= 2, errc::config_parse, "weight CSV rows need point, value");
        values.push_back(row.back());
        row.pop_back();
        points.push_back(std::move(row));
    }
    require(!points.empty(), errc::config_parse, "weight CSV is empty");
    const std::size_t n = points[0].size();
    std::vector<rvec> axes(n);
    for (std::size_t d = 0; d < n; ++d) {
        rvec ax;
        for (const rvec& p : points) ax.push_back(p[d]);
        std::sort(ax.begin(), ax.end());
        ax.erase(std::unique(ax.begin(), ax.end(),
                             [](double a, double b) { return std::abs(a - b) < 1e-12; }),
                 ax.end());
        axes[d] = std::move(ax);
    }
    std::size_t total = 1;
    for (const rvec& ax : axes) total *= ax.size();
    require(total == points.size(), errc::config_parse,
            "weight CSV must cover a full tensor grid");
    rvec grid(total, std::numeric_limits<double>::quiet_NaN());
    for (std::size_t i = 0; i < points.size(); ++i) {
        std::size_t flat = 0;
        for (std::size_t d = 0; d < n; ++d) {
            auto it = std::lower_bound(axes[d].begin(), axes[d].end(), points[i][d] - 1e-12);
            flat = flat * axes[d].size() + static_cast<std::size_t>(it - axes[d].begin());
        }
        grid[flat] = values[i];
    }
    for (double v : grid)
        require(!std::isnan(v), errc::config_parse, "weight CSV has grid holes");
    return WeightFn::tabulated(std::move(axes), std::move(grid), std::move(domain));
}

}  // namespace tubepw
