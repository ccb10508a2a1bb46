/// @file experiments.hpp
/// @brief Table and summary emission for the CLI drivers, and data snapshots
/// with their parameter sidecar (`<path>.json`).
#pragma once

#include <filesystem>

#include "orthoflow/flows/condition.hpp"
#include "orthoflow/harness/config.hpp"
#include "orthoflow/harness/largeness.hpp"
#include "orthoflow/harness/report.hpp"
#include "orthoflow/harness/snapshot.hpp"
#include "orthoflow/harness/verify.hpp"

namespace orthoflow::harness {

inline const std::vector<std::string>& scan_header() {
    static const std::vector<std::string> h{"N", "F_l1l3", "u1_l3", "u2_l3", "u3_l3", "ratio"};
    return h;
}

inline const std::vector<std::string>& trace_header() {
    static const std::vector<std::string> h{"t",     "l2_u",         "grad_l2_u",     "l3_u",
                                            "l3_R",  "div_residual", "energy_defect", "defect"};
    return h;
}

inline const std::vector<std::string>& condition_header() {
    static const std::vector<std::string> h{"N",          "lhs",     "rhs",     "satisfied", "vstar2",
                                            "besov_sum",  "vstar_chain_ok", "n_power", "rhs_chain_ok",
                                            "f_l1l3",     "C1",      "C2"};
    return h;
}

inline json to_json(const datagen::ValidationReport& r) {
    json j = json::array();
    for (const auto& e : r.entries)
        j.push_back({{"id", e.id}, {"name", e.name}, {"passed", e.passed}, {"measured", e.measured},
                     {"bound", e.bound}, {"detail", e.detail}});
    return j;
}

inline std::string sidecar_path(const std::string& snapshot) { return snapshot + ".json"; }

/// Writes Σu₀ⁱ as a snapshot and {params, validation} next to it.
inline void save_data(const std::string& path, const datagen::OrthogonalData& d, const datagen::ValidationReport& r) {
    save_snapshot(path, d.sum());
    json j{{"params", to_json(d.params)}, {"validation", to_json(r)}, {"all_passed", r.all_passed()}};
    write_text(sidecar_path(path), j.dump(2) + "\n");
}

/// Loads a snapshot and splits it by velocity slot. Parameters come from the
/// sidecar when present.
inline datagen::OrthogonalData load_data(const std::string& path) {
    const auto u = load_snapshot(path);
    ConstructionParams p;
    if (std::filesystem::exists(sidecar_path(path))) {
        const auto bytes = read_file_bytes(sidecar_path(path));
        const auto j = json::parse(std::string(bytes.begin(), bytes.end()));
        if (j.contains("params")) p = params_from_json(j.at("params"));
    }
    return datagen::OrthogonalData::from_sum(u, p);
}

inline CsvTable scan_csv(const flows::ScanReport& s) {
    CsvTable t(scan_header());
    for (const auto& r : s.rows)
        t.add({static_cast<long long>(r.N), r.f_l1l3, r.u_l3[0], r.u_l3[1], r.u_l3[2], r.ratio});
    return t;
}

inline json scan_summary(const flows::ScanReport& s) {
    json j;
    j["eps"] = s.options.eps;
    j["delta"] = s.options.delta;
    j["C"] = s.options.C;
    j["bands"] = to_string(s.options.bands);
    j["points_per_decade"] = s.options.points_per_decade;
    j["bound_exponent"] = s.bound_exponent;
    j["slope"] = std::isnan(s.slope) ? json(nullptr) : json(s.slope);
    j["slope_ok"] = s.slope_ok();
    j["ratio_spread"] = s.ratio_spread;
    j["ratio_ok"] = s.ratio_ok();
    j["ratio_non_increasing"] = s.ratio_non_increasing;
    j["rows"] = json::array();
    for (const auto& r : s.rows)
        j["rows"].push_back({{"N", r.N}, {"F_l1l3", r.f_l1l3}, {"normalized", r.normalized}, {"ratio", r.ratio},
                             {"tail_bound", r.tail_bound}, {"evaluations", r.evaluations}});
    if (s.cross) {
        const auto& c = *s.cross;
        j["cross_check"] = {{"N", c.N},           {"separable", c.separable},         {"full3d", c.full3d},
                            {"rel_diff", c.rel_diff}, {"projected", c.projected}, {"projected_over_terms", c.projected_over_terms}};
    }
    return j;
}

inline CsvTable condition_csv(const flows::ConditionScan& s) {
    CsvTable t(condition_header());
    for (const auto& r : s.rows)
        t.add({static_cast<long long>(r.N), r.lhs, r.rhs, static_cast<long long>(r.satisfied), r.vstar2(), r.besov_sum,
               static_cast<long long>(r.vstar_chain_ok), r.n_power, static_cast<long long>(r.rhs_chain_ok), r.f_l1l3,
               r.C1, r.C2});
    return t;
}

inline json condition_summary(const flows::ConditionScan& s, const flows::ConditionOptions& o) {
    json j;
    j["p"] = o.p;
    j["C0"] = o.C0;
    j["lhs_decreasing"] = s.lhs_decreasing;
    j["vstar_chain_all"] = s.vstar_chain_all;
    j["crossover_N"] = s.crossover ? json(*s.crossover) : json(nullptr);
    j["crossover_consistent"] = s.crossover_consistent;
    j["rows"] = json::array();
    for (const auto& r : s.rows)
        j["rows"].push_back({{"N", r.N}, {"lhs", r.lhs}, {"lhs_tail_bound", r.lhs_tail_bound}, {"rhs", r.rhs},
                             {"satisfied", r.satisfied}, {"vstar_norm", r.vstar_norm}, {"besov_sum", r.besov_sum},
                             {"C1", r.C1}, {"C2", r.C2}});
    return j;
}

inline void add_trace_rows(CsvTable& t, const solver::TrajectoryTrace& tr) {
    for (const auto& s : tr.samples)
        t.add({s.t, s.l2, s.grad_l2, s.l3, s.r_l3, s.div_residual, s.energy_defect, s.defect});
}

inline json trace_summary(const solver::TrajectoryTrace& tr) {
    return {{"steps", tr.steps},
            {"halted", tr.halted},
            {"halt_time", tr.halt_time},
            {"message", tr.message},
            {"energy_defect", tr.energy_defect},
            {"energy_constant", tr.energy_constant},
            {"max_energy_increase", tr.max_energy_increase},
            {"max_div_residual", tr.max_div_residual}};
}

inline CsvTable largeness_csv(const LargenessTable& t) {
    CsvTable c({"N", "B1", "B2", "B3", "method1", "method2", "method3"});
    for (const auto& r : t.rows)
        c.add({static_cast<long long>(r.N), r.b[0], r.b[1], r.b[2], r.method[0], r.method[1], r.method[2]});
    return c;
}

inline json largeness_summary(const LargenessTable& t) {
    json j{{"params", to_json(t.base)},
           {"column1_increasing", t.column1_increasing},
           {"alpha", t.alpha},
           {"fit_residual", t.fit_residual}};
    if (t.threshold) {
        j["threshold"] = *t.threshold;
        j["threshold_N"] = t.threshold_N ? json(*t.threshold_N) : json(nullptr);
    }
    return j;
}

/// Default norm columns of `orthoflow norms`.
inline std::vector<BesovSpec> default_norm_specs() {
    return {{-1.0, norms::kInfinity, norms::kInfinity, BesovMethod::heat},
            {-1.0, norms::kInfinity, 2.0, BesovMethod::heat},
            {-0.25, 4.0, 2.0, BesovMethod::dyadic}};
}

inline std::string spec_label(const BesovSpec& s) {
    auto num = [](double v) { return std::isinf(v) ? std::string("inf") : format_double(v); };
    return "B^" + num(s.s) + "_" + num(s.p) + "," + num(s.q) + "[" + norms::to_string(s.method) + "]";
}

inline BesovSpec parse_spec(const std::string& text) {
    std::vector<std::string> parts;
    std::size_t pos = 0;
    while (true) {
        const auto c = text.find(',', pos);
        parts.push_back(text.substr(pos, c - pos));
        if (c == std::string::npos) break;
        pos = c + 1;
    }
    if (parts.size() != 3 && parts.size() != 4)
        throw std::invalid_argument("norm spec \"" + text + "\" must be s,p,q[,heat|dyadic]");
    auto num = [&](const std::string& s) {
        if (s == "inf") return norms::kInfinity;
        double v = 0.0;
        const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
        if (r.ec != std::errc{} || r.ptr != s.data() + s.size())
            throw std::invalid_argument("norm spec \"" + text + "\": bad number \"" + s + "\"");
        return v;
    };
    BesovSpec spec{num(parts[0]), num(parts[1]), num(parts[2]), BesovMethod::heat};
    if (parts.size() == 4) spec.method = besov_method_from(parts[3]);
    spec.validate();
    return spec;
}

/// Per-component rows of L², L³ and the requested Besov norms.
inline CsvTable norms_table(const datagen::OrthogonalData& d, const std::vector<BesovSpec>& specs) {
    std::vector<std::string> h{"component", "L2", "L3"};
    for (const auto& s : specs) h.push_back(spec_label(s));
    CsvTable t(h);
    for (int i = 0; i < 3; ++i) {
        const auto sp = spectral::SparseSpectrum::from(d.components[i]);
        std::vector<CsvCell> row{static_cast<long long>(i + 1)};
        if (sp.empty()) {
            for (std::size_t c = 1; c < h.size(); ++c) row.push_back(0.0);
        } else {
            row.push_back(d.components[i].l2());
            row.push_back(norms::lp_norm(sp, 3.0));
            for (const auto& s : specs) row.push_back(norms::besov_norm_detailed(sp, s).value);
        }
        t.add(row);
    }
    return t;
}

inline json to_json(const SuiteReport& r) {
    json j{{"seed", r.seed}, {"passed", r.passed()}, {"checks", json::array()}};
    for (const auto& c : r.checks)
        j["checks"].push_back({{"suite", c.suite}, {"name", c.name}, {"passed", c.passed},
                               {"measured", c.measured}, {"tolerance", c.tolerance}});
    return j;
}

}  // namespace orthoflow::harness
