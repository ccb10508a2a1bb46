/// @file config.hpp
/// @brief ExperimentConfig and its JSON form.
#pragma once

#include <filesystem>
#include <optional>
#include <set>
#include <unistd.h>

#include "json.hpp"
#include "orthoflow/flows/forcing.hpp"
#include "orthoflow/norms/besov.hpp"
#include "orthoflow/solver/evolution.hpp"

namespace orthoflow::harness {

using spectral::FourierGrid;
using spectral::SpectralVectorField;

using json = nlohmann::json;
using datagen::BandPolicy;
using datagen::ConstructionParams;
using norms::BesovMethod;
using norms::BesovSpec;

struct QuadraturePolicy {
    double points_per_decade = 32.0;
    std::optional<double> t_max;  // nullopt: extend until the tail is negligible

    bool operator==(const QuadraturePolicy&) const = default;
};

struct OutputPaths {
    std::string snapshot, csv, json;

    bool operator==(const OutputPaths&) const = default;
};

struct ExperimentConfig {
    ConstructionParams params;
    std::optional<std::array<int, 3>> grid;  // nullopt: "auto"
    solver::EvolutionConfig evolution;
    QuadraturePolicy quadrature;
    std::vector<BesovSpec> norms;
    OutputPaths outputs;
    std::vector<int> Ns;
    int workers = 1;
    std::uint64_t seed = 20240611ull;

    bool operator==(const ExperimentConfig&) const = default;
};

namespace detail {

inline json number_or_inf(double v) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    return v;
}

inline double read_number(const json& j, const std::string& key) {
    if (j.is_string()) {
        const auto s = j.get<std::string>();
        if (s == "inf") return norms::kInfinity;
        if (s == "-inf") return -norms::kInfinity;
        throw std::invalid_argument("config: " + key + " must be a number or \"inf\"");
    }
    if (!j.is_number()) throw std::invalid_argument("config: " + key + " must be a number");
    return j.get<double>();
}

inline void reject_unknown(const json& j, const std::string& where, std::initializer_list<const char*> keys) {
    if (!j.is_object()) throw std::invalid_argument("config: " + where + " must be an object");
    std::set<std::string> ok(keys.begin(), keys.end());
    for (const auto& [k, v] : j.items())
        if (!ok.count(k)) throw std::invalid_argument("config: unknown key " + where + "." + k);
}

}  // namespace detail

inline const char* to_string(BandPolicy b) { return b == BandPolicy::separated ? "separated" : "planar"; }

inline BandPolicy band_policy_from(const std::string& s) {
    if (s == "separated") return BandPolicy::separated;
    if (s == "planar") return BandPolicy::planar;
    throw std::invalid_argument("unknown band policy \"" + s + "\" (separated|planar)");
}

inline BesovMethod besov_method_from(const std::string& s) {
    if (s == "heat") return BesovMethod::heat;
    if (s == "dyadic") return BesovMethod::dyadic;
    throw std::invalid_argument("unknown Besov method \"" + s + "\" (heat|dyadic)");
}

inline json to_json(const ConstructionParams& p) {
    return {{"N", p.N}, {"eps", p.eps}, {"delta", p.delta}, {"C", p.C}, {"bands", to_string(p.bands)}};
}

inline ConstructionParams params_from_json(const json& j) {
    detail::reject_unknown(j, "params", {"N", "eps", "delta", "C", "bands"});
    ConstructionParams p;
    if (j.contains("N")) p.N = j.at("N").get<int>();
    if (j.contains("eps")) p.eps = detail::read_number(j.at("eps"), "params.eps");
    p.delta = j.contains("delta") ? detail::read_number(j.at("delta"), "params.delta")
                                  : ConstructionParams::default_delta(p.eps);
    if (j.contains("C")) p.C = detail::read_number(j.at("C"), "params.C");
    if (j.contains("bands")) p.bands = band_policy_from(j.at("bands").get<std::string>());
    return p;
}

inline json to_json(const BesovSpec& s) {
    return {{"s", s.s}, {"p", detail::number_or_inf(s.p)}, {"q", detail::number_or_inf(s.q)},
            {"method", norms::to_string(s.method)}};
}

inline BesovSpec besov_from_json(const json& j) {
    detail::reject_unknown(j, "norms[]", {"s", "p", "q", "method"});
    BesovSpec s;
    s.s = detail::read_number(j.at("s"), "norms.s");
    s.p = detail::read_number(j.at("p"), "norms.p");
    s.q = detail::read_number(j.at("q"), "norms.q");
    if (j.contains("method")) s.method = besov_method_from(j.at("method").get<std::string>());
    s.validate();
    return s;
}

inline json to_json(const ExperimentConfig& c) {
    json j;
    j["params"] = to_json(c.params);
    j["grid"] = c.grid ? json(*c.grid) : json("auto");
    const auto& e = c.evolution;
    j["evolution"] = {{"T", e.T},
                      {"dt", e.dt},
                      {"trace_stride", e.trace_stride},
                      {"linear", e.linear},
                      {"measure_plans", e.measure_plans},
                      {"l3_oversample", e.l3_oversample}};
    j["quadrature"] = {{"points_per_decade", c.quadrature.points_per_decade},
                       {"t_max", c.quadrature.t_max ? json(*c.quadrature.t_max) : json("auto")}};
    j["norms"] = json::array();
    for (const auto& s : c.norms) j["norms"].push_back(to_json(s));
    j["outputs"] = {{"snapshot", c.outputs.snapshot}, {"csv", c.outputs.csv}, {"json", c.outputs.json}};
    j["Ns"] = c.Ns;
    j["workers"] = c.workers;
    j["seed"] = c.seed;
    return j;
}

inline ExperimentConfig config_from_json(const json& j) {
    detail::reject_unknown(j, "config",
                           {"params", "grid", "evolution", "quadrature", "norms", "outputs", "Ns", "workers", "seed"});
    ExperimentConfig c;
    if (j.contains("params")) c.params = params_from_json(j.at("params"));
    if (j.contains("grid")) {
        const auto& g = j.at("grid");
        if (g.is_string()) {
            if (g.get<std::string>() != "auto") throw std::invalid_argument("config: grid must be \"auto\" or [n1,n2,n3]");
        } else {
            c.grid = g.get<std::array<int, 3>>();
        }
    }
    if (j.contains("evolution")) {
        const auto& e = j.at("evolution");
        detail::reject_unknown(e, "evolution", {"T", "dt", "trace_stride", "linear", "measure_plans", "l3_oversample"});
        auto& v = c.evolution;
        if (e.contains("T")) v.T = detail::read_number(e.at("T"), "evolution.T");
        if (e.contains("dt")) v.dt = detail::read_number(e.at("dt"), "evolution.dt");
        if (e.contains("trace_stride")) v.trace_stride = e.at("trace_stride").get<int>();
        if (e.contains("linear")) v.linear = e.at("linear").get<bool>();
        if (e.contains("measure_plans")) v.measure_plans = e.at("measure_plans").get<bool>();
        if (e.contains("l3_oversample")) v.l3_oversample = detail::read_number(e.at("l3_oversample"), "evolution.l3_oversample");
    }
    if (j.contains("quadrature")) {
        const auto& q = j.at("quadrature");
        detail::reject_unknown(q, "quadrature", {"points_per_decade", "t_max"});
        if (q.contains("points_per_decade"))
            c.quadrature.points_per_decade = detail::read_number(q.at("points_per_decade"), "quadrature.points_per_decade");
        if (q.contains("t_max") && !(q.at("t_max").is_string() && q.at("t_max").get<std::string>() == "auto"))
            c.quadrature.t_max = detail::read_number(q.at("t_max"), "quadrature.t_max");
    }
    if (j.contains("norms"))
        for (const auto& s : j.at("norms")) c.norms.push_back(besov_from_json(s));
    if (j.contains("outputs")) {
        const auto& o = j.at("outputs");
        detail::reject_unknown(o, "outputs", {"snapshot", "csv", "json"});
        c.outputs.snapshot = o.value("snapshot", "");
        c.outputs.csv = o.value("csv", "");
        c.outputs.json = o.value("json", "");
    }
    if (j.contains("Ns")) c.Ns = j.at("Ns").get<std::vector<int>>();
    if (j.contains("workers")) c.workers = j.at("workers").get<int>();
    if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
    return c;
}

inline ExperimentConfig parse_config(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw std::invalid_argument(std::string("config: ") + e.what());
    }
    try {
        return config_from_json(j);
    } catch (const json::exception& e) {
        throw std::invalid_argument(std::string("config: ") + e.what());
    }
}

inline std::string serialize_config(const ExperimentConfig& c) { return to_json(c).dump(2) + "\n"; }

/// Throws when `path` cannot be created or overwritten.
inline void require_writable(const std::string& path) {
    if (path.empty()) return;
    namespace fs = std::filesystem;
    const fs::path p(path);
    const fs::path dir = p.has_parent_path() ? p.parent_path() : fs::path(".");
    if (!fs::is_directory(dir)) throw std::invalid_argument("output directory does not exist: " + dir.string());
    if (fs::exists(p) ? ::access(p.c_str(), W_OK) != 0 : ::access(dir.c_str(), W_OK) != 0)
        throw std::invalid_argument("output path not writable: " + path);
}

inline void validate(const ExperimentConfig& c) {
    c.params.validate();
    c.evolution.validate();
    if (c.workers < 1) throw std::invalid_argument("workers must be >= 1");
    if (!(c.quadrature.points_per_decade >= 1.0)) throw std::invalid_argument("points_per_decade must be >= 1");
    if (c.grid) (void)spectral::make_grid(*c.grid);
    require_writable(c.outputs.snapshot);
    require_writable(c.outputs.csv);
    require_writable(c.outputs.json);
}

/// Solver grid: explicit dims, or per axis the smallest even size ≥ 3× the
/// largest frequency of u⊗u (flat axes get 4). Throws past the memory cap.
inline FourierGrid resolve_grid(const std::optional<std::array<int, 3>>& dims, const datagen::OrthogonalData& d) {
    if (dims) return spectral::make_grid(*dims);
    std::array<int, 3> m{0, 0, 0};
    for (const auto& c : d.components) {
        const auto cm = spectral::content_max_modes(c);
        for (int a = 0; a < 3; ++a) m[a] = std::max(m[a], cm[a]);
    }
    std::array<int, 3> out{};
    for (int a = 0; a < 3; ++a) out[a] = m[a] == 0 ? 4 : spectral::dealiased_size_for(2 * m[a]);
    return spectral::make_grid(out);
}

}  // namespace orthoflow::harness
