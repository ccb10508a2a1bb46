// orthoflow: command-line driver for data generation, norms, scans and runs.
#include <chrono>
#include <cstdio>
#include <iostream>

#include "CLI11.hpp"
#include "orthoflow/harness/experiments.hpp"

using namespace orthoflow;
using namespace orthoflow::harness;

namespace {

struct Common {
    std::string config_path;
    ExperimentConfig cfg;
    std::string bands = "separated";
    std::vector<int> Ns;
    std::string grid = "auto";
    std::string csv, json_out;
};

std::string slurp(const std::string& path) {
    const auto b = read_file_bytes(path);
    return std::string(b.begin(), b.end());
}

// Flags given on the command line override the config file.
template <class T, class U>
void take(const CLI::Option* o, T& dst, const U& src) {
    if (o && o->count() > 0) dst = src;
}

std::optional<std::array<int, 3>> parse_grid(const std::string& s) {
    if (s == "auto") return std::nullopt;
    std::array<int, 3> d{};
    if (std::sscanf(s.c_str(), "%d,%d,%d", &d[0], &d[1], &d[2]) != 3)
        throw std::invalid_argument("--grid must be \"auto\" or n1,n2,n3");
    return d;
}

void emit(const std::string& path, const std::string& text) {
    if (path.empty() || path == "-")
        std::cout << text;
    else
        write_text(path, text);
}

void print_validation(const datagen::ValidationReport& r) {
    for (const auto& e : r.entries)
        std::cout << (e.passed ? "PASS " : "FAIL ") << e.id << "  " << e.name << "  measured=" << format_double(e.measured)
                  << " bound=" << format_double(e.bound) << "  " << e.detail << "\n";
    std::cout << (r.all_passed() ? "all hypotheses pass\n" : "hypotheses FAILED\n");
}

struct ParamOpts {
    CLI::Option *N = nullptr, *eps = nullptr, *delta = nullptr, *C = nullptr, *bands = nullptr;
};

ParamOpts add_params(CLI::App* a, Common& c, bool with_N) {
    ParamOpts o;
    auto& p = c.cfg.params;
    if (with_N) o.N = a->add_option("--N", p.N, "frequency scale N");
    o.eps = a->add_option("--eps", p.eps, "epsilon > 0");
    o.delta = a->add_option("--delta", p.delta, "delta < eps/4 (default min(eps/8, 0.05))");
    o.C = a->add_option("--C", p.C, "budget constant C > 0");
    o.bands = a->add_option("--bands", c.bands, "band policy: separated|planar");
    return o;
}

// Loads --config when given, then applies the explicit flags on top.
ExperimentConfig resolve(const Common& c, const ParamOpts& po) {
    ExperimentConfig out = c.config_path.empty() ? ExperimentConfig{} : parse_config(slurp(c.config_path));
    const auto& p = c.cfg.params;
    take(po.N, out.params.N, p.N);
    take(po.eps, out.params.eps, p.eps);
    take(po.C, out.params.C, p.C);
    take(po.bands, out.params.bands, band_policy_from(c.bands));
    if (po.delta && po.delta->count() > 0)
        out.params.delta = p.delta;
    else if (po.eps && po.eps->count() > 0)
        out.params.delta = ConstructionParams::default_delta(out.params.eps);
    return out;
}

flows::ScanOptions scan_options(const ExperimentConfig& cfg) {
    flows::ScanOptions o;
    o.eps = cfg.params.eps;
    o.delta = cfg.params.delta;
    o.C = cfg.params.C;
    o.bands = cfg.params.bands;
    o.points_per_decade = cfg.quadrature.points_per_decade;
    o.workers = cfg.workers;
    if (!cfg.Ns.empty()) o.Ns = cfg.Ns;
    return o;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Spectral lab for frequency-orthogonal Navier-Stokes data"};
    app.require_subcommand(1);
    Common c;
    app.add_option("--config", c.config_path, "JSON experiment config; flags override it")->check(CLI::ExistingFile);

    // gen
    auto* gen = app.add_subcommand("gen", "build constructed data, validate, write a snapshot");
    const auto gen_p = add_params(gen, c, true);
    std::string gen_out, gen_report;
    gen->add_option("--out", gen_out, "snapshot path (.onsf); the report goes to <out>.json");
    gen->add_option("--report", gen_report, "extra path for the validation report JSON");

    // norms
    auto* nrm = app.add_subcommand("norms", "per-component norms of a snapshot");
    std::string nrm_in;
    std::vector<std::string> nrm_specs;
    nrm->add_option("--in", nrm_in, "snapshot path")->required()->check(CLI::ExistingFile);
    nrm->add_option("--spec", nrm_specs, "Besov norm s,p,q[,heat|dyadic]; repeatable")->take_all();
    nrm->add_option("--csv", c.csv, "output CSV (default stdout)");

    // largeness
    auto* lrg = app.add_subcommand("largeness", "B^-1_inf,inf of each component over a list of N");
    const auto lrg_p = add_params(lrg, c, false);
    std::optional<double> lrg_M;
    auto* lrg_N = lrg->add_option("--N", c.Ns, "comma separated N values")->delimiter(',');
    lrg->add_option("--threshold", lrg_M, "report the smallest N = 4^k with column 1 above M");
    lrg->add_option("--csv", c.csv, "output CSV (default stdout)");
    lrg->add_option("--json", c.json_out, "summary JSON");

    // scan
    auto* scn = app.add_subcommand("scan", "forcing norm sweep over N");
    const auto scn_p = add_params(scn, c, false);
    auto* scn_N = scn->add_option("--N", c.Ns, "comma separated N values")->delimiter(',');
    auto* scn_w = scn->add_option("--workers", c.cfg.workers, "worker threads");
    auto* scn_ppd = scn->add_option("--ppd", c.cfg.quadrature.points_per_decade, "time points per decade");
    bool scn_cross = false;
    scn->add_flag("--cross-check", scn_cross, "full-3D and projected cross-check at the smallest N");
    scn->add_option("--csv", c.csv, "output CSV (default stdout)");
    scn->add_option("--json", c.json_out, "summary JSON (default <csv>.json)");

    // condition
    auto* cnd = app.add_subcommand("condition", "evaluate the smallness condition over N");
    const auto cnd_p = add_params(cnd, c, false);
    auto* cnd_N = cnd->add_option("--N", c.Ns, "comma separated N values")->delimiter(',');
    auto* cnd_w = cnd->add_option("--workers", c.cfg.workers, "worker threads");
    flows::ConditionOptions copt;
    cnd->add_option("--p", copt.p, "integrability p in (3, inf)");
    cnd->add_option("--C0", copt.C0, "constant C0 > 0");
    cnd->add_option("--csv", c.csv, "output CSV (default stdout)");
    cnd->add_option("--json", c.json_out, "summary JSON (default <csv>.json)");

    // solve
    auto* slv = app.add_subcommand("solve", "time integration of a snapshot");
    std::string slv_in, slv_mode = "full";
    slv->add_option("--in", slv_in, "snapshot path")->required()->check(CLI::ExistingFile);
    slv->add_option("--mode", slv_mode, "full|residual|linear|decomposed")
        ->check(CLI::IsMember({"full", "residual", "linear", "decomposed"}));
    auto* slv_T = slv->add_option("--T", c.cfg.evolution.T, "final time");
    auto* slv_dt = slv->add_option("--dt", c.cfg.evolution.dt, "time step");
    auto* slv_stride = slv->add_option("--stride", c.cfg.evolution.trace_stride, "steps between trace samples");
    auto* slv_grid = slv->add_option("--grid", c.grid, "auto or n1,n2,n3");
    slv->add_option("--csv", c.csv, "trace CSV (default stdout)");
    slv->add_option("--json", c.json_out, "summary JSON (default <csv>.json)");

    // verify
    auto* vfy = app.add_subcommand("verify", "run the property suites");
    std::string vfy_suite = "all";
    vfy->add_option("--suite", vfy_suite, "invariants|oracles|all")
        ->check(CLI::IsMember({"invariants", "oracles", "all"}));
    auto* vfy_seed = vfy->add_option("--seed", c.cfg.seed, "64-bit seed");
    vfy->add_option("--json", c.json_out, "report JSON");

    // config
    auto* cfgc = app.add_subcommand("config", "print the effective config as JSON");

    CLI11_PARSE(app, argc, argv);

    try {
        if (gen->parsed()) {
            auto cfg = resolve(c, gen_p);
            if (gen_out.empty()) gen_out = cfg.outputs.snapshot;
            cfg.params.validate();
            require_writable(gen_out);
            const auto d = datagen::build_data(cfg.params);
            const auto r = datagen::validate_hypotheses(d);
            print_validation(r);
            if (!gen_out.empty()) {
                save_data(gen_out, d, r);
                std::cout << "wrote " << gen_out << " and " << sidecar_path(gen_out) << "\n";
            }
            if (!gen_report.empty())
                write_text(gen_report, json{{"params", to_json(d.params)}, {"validation", to_json(r)}}.dump(2) + "\n");
            return 0;
        }
        if (nrm->parsed()) {
            std::vector<BesovSpec> specs;
            for (const auto& s : nrm_specs) specs.push_back(parse_spec(s));
            if (specs.empty() && !c.config_path.empty()) specs = parse_config(slurp(c.config_path)).norms;
            if (specs.empty()) specs = default_norm_specs();
            emit(c.csv, norms_table(load_data(nrm_in), specs).str());
            return 0;
        }
        if (lrg->parsed()) {
            auto cfg = resolve(c, lrg_p);
            take(lrg_N, cfg.Ns, c.Ns);
            if (cfg.Ns.empty()) cfg.Ns = {16, 64, 256, 1024};
            const auto t = largeness_table(cfg.Ns, cfg.params, lrg_M);
            emit(c.csv, largeness_csv(t).str());
            if (!c.json_out.empty()) write_text(c.json_out, largeness_summary(t).dump(2) + "\n");
            if (t.threshold) {
                if (t.threshold_N)
                    std::cerr << "threshold " << format_double(*t.threshold) << " first exceeded at N = " << *t.threshold_N << "\n";
                else
                    std::cerr << "threshold " << format_double(*t.threshold) << " not reached for N <= " << kMaxThresholdN << "\n";
            }
            return 0;
        }
        if (scn->parsed()) {
            auto cfg = resolve(c, scn_p);
            take(scn_N, cfg.Ns, c.Ns);
            take(scn_w, cfg.workers, c.cfg.workers);
            take(scn_ppd, cfg.quadrature.points_per_decade, c.cfg.quadrature.points_per_decade);
            auto o = scan_options(cfg);
            o.cross_check = scn_cross;
            const auto t0 = std::chrono::steady_clock::now();
            const auto rep = flows::forcing_scan(o);
            auto summary = scan_summary(rep);
            summary["seconds"] = seconds_since(t0);
            emit(c.csv, scan_csv(rep).str());
            const std::string js = !c.json_out.empty() ? c.json_out : (c.csv.empty() || c.csv == "-" ? "" : c.csv + ".json");
            if (js.empty())
                std::cerr << summary.dump(2) << "\n";
            else
                write_text(js, summary.dump(2) + "\n");
            return 0;
        }
        if (cnd->parsed()) {
            auto cfg = resolve(c, cnd_p);
            take(cnd_N, cfg.Ns, c.Ns);
            take(cnd_w, cfg.workers, c.cfg.workers);
            copt.validate();
            auto o = scan_options(cfg);
            if (cfg.Ns.empty()) o.Ns = {4, 6, 8, 10};
            const auto s = flows::condition_scan(o, copt);
            emit(c.csv, condition_csv(s).str());
            const auto summary = condition_summary(s, copt);
            const std::string js = !c.json_out.empty() ? c.json_out : (c.csv.empty() || c.csv == "-" ? "" : c.csv + ".json");
            if (js.empty())
                std::cerr << summary.dump(2) << "\n";
            else
                write_text(js, summary.dump(2) + "\n");
            return 0;
        }
        if (slv->parsed()) {
            auto cfg = c.config_path.empty() ? ExperimentConfig{} : parse_config(slurp(c.config_path));
            take(slv_T, cfg.evolution.T, c.cfg.evolution.T);
            take(slv_dt, cfg.evolution.dt, c.cfg.evolution.dt);
            take(slv_stride, cfg.evolution.trace_stride, c.cfg.evolution.trace_stride);
            take(slv_grid, cfg.grid, parse_grid(c.grid));
            cfg.evolution.linear = slv_mode == "linear";
            cfg.evolution.validate();
            const auto d = load_data(slv_in);
            const auto g = resolve_grid(cfg.grid, d);
            const auto t0 = std::chrono::steady_clock::now();
            CsvTable table(trace_header());
            json summary{{"mode", slv_mode}, {"grid", g.dims()}, {"T", cfg.evolution.T}, {"dt", cfg.evolution.dt}};
            if (slv_mode == "full") {
                const auto r = solver::solve_full_ns(d.sum(g), cfg.evolution);
                add_trace_rows(table, r.trace);
                summary["trace"] = trace_summary(r.trace);
            } else if (slv_mode == "decomposed") {
                const auto r = solver::decomposition_check(d, g, cfg.evolution);
                auto full = r.full;
                for (std::size_t k = 0; k < full.samples.size() && k < r.residual.samples.size(); ++k)
                    full.samples[k].r_l3 = r.residual.samples[k].r_l3;
                add_trace_rows(table, full);
                summary["trace"] = trace_summary(r.full);
                summary["sup_defect"] = r.sup_defect;
            } else {
                const auto r = solver::solve_residual(d, g, cfg.evolution);
                add_trace_rows(table, r.trace);
                summary["trace"] = trace_summary(r.trace);
            }
            summary["seconds"] = seconds_since(t0);
            emit(c.csv, table.str());
            const std::string js = !c.json_out.empty() ? c.json_out : (c.csv.empty() || c.csv == "-" ? "" : c.csv + ".json");
            if (js.empty())
                std::cerr << summary.dump(2) << "\n";
            else
                write_text(js, summary.dump(2) + "\n");
            return summary["trace"]["halted"].get<bool>() ? 3 : 0;
        }
        if (vfy->parsed()) {
            auto cfg = c.config_path.empty() ? ExperimentConfig{} : parse_config(slurp(c.config_path));
            take(vfy_seed, cfg.seed, c.cfg.seed);
            const auto r = run_suite(vfy_suite, cfg.seed);
            for (const auto& ch : r.checks)
                std::cout << (ch.passed ? "PASS " : "FAIL ") << ch.suite << ": " << ch.name
                          << "  measured=" << format_double(ch.measured) << " tol=" << format_double(ch.tolerance) << "\n";
            std::cout << "seed " << r.seed << (r.passed() ? ": all checks pass\n" : ": checks FAILED\n");
            if (!c.json_out.empty()) write_text(c.json_out, to_json(r).dump(2) + "\n");
            return r.passed() ? 0 : 1;
        }
        if (cfgc->parsed()) {
            const auto cfg = c.config_path.empty() ? ExperimentConfig{} : parse_config(slurp(c.config_path));
            std::cout << serialize_config(cfg);
            return 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "orthoflow: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
