#include <gtest/gtest.h>

#include <clocale>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <locale>

#include "orthoflow/harness/experiments.hpp"
#include "test_util.hpp"

using namespace orthoflow;
using namespace orthoflow::harness;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const auto dir = fs::temp_directory_path() / ("orthoflow_test_harness_" + std::to_string(::getpid()));
    fs::create_directories(dir);
    return dir / name;
}

std::string slurp(const fs::path& p) {
    std::ifstream is(p);
    return std::string(std::istreambuf_iterator<char>(is), {});
}

ConstructionParams params(int N, double eps, double delta, BandPolicy b = BandPolicy::separated) {
    ConstructionParams p;
    p.N = N;
    p.eps = eps;
    p.delta = delta;
    p.bands = b;
    return p;
}

}  // namespace

// ---------------------------------------------------------------- snapshots

TEST(Snapshot, SaveLoadSaveIsByteIdentical) {
    std::mt19937_64 rng(test::kCorpusSeed);
    const auto g = spectral::make_grid({12, 8, 10});
    auto f = test::random_field(g, 3, rng, true, 3);
    const auto p = scratch("a.onsf"), q = scratch("b.onsf");
    save_snapshot(p, f);
    const auto back = load_snapshot(p);
    save_snapshot(q, back);
    EXPECT_EQ(read_file_bytes(p), read_file_bytes(q));
    EXPECT_EQ(test::max_coeff_diff(back, f), 0.0);
    EXPECT_EQ(back.mean_zero(), f.mean_zero());
}

TEST(Snapshot, HeaderLayout) {
    const auto g = spectral::make_grid({4, 6, 8});
    auto f = test::cosine_mode(g, 1, {0, 1, 2}, 1.0);
    const auto b = encode_snapshot(f);
    ASSERT_EQ(b.size(), 4u + 1 + 12 + 2 + 3 * g.size() * 16 + 8);
    EXPECT_EQ(std::string(b.begin(), b.begin() + 4), "ONSF");
    EXPECT_EQ(b[4], 1);
    EXPECT_EQ(b[5], 4);
    EXPECT_EQ(b[9], 6);
    EXPECT_EQ(b[13], 8);
    EXPECT_EQ(b[17], 3);
    EXPECT_EQ(b[18], 1);
    std::uint64_t stored = 0;
    for (int i = 0; i < 8; ++i) stored |= std::uint64_t(b[b.size() - 8 + i]) << (8 * i);
    EXPECT_EQ(stored, fnv1a64(b.data(), b.size() - 8));
}

TEST(Snapshot, FnvKnownValues) {
    EXPECT_EQ(fnv1a64(nullptr, 0), 0xcbf29ce484222325ull);
    const std::uint8_t a[] = {'a'};
    EXPECT_EQ(fnv1a64(a, 1), 0xaf63dc4c8601ec8cull);
    const std::string foobar = "foobar";
    EXPECT_EQ(fnv1a64(reinterpret_cast<const std::uint8_t*>(foobar.data()), foobar.size()), 0x85944171f73967e8ull);
}

TEST(Snapshot, EmptyComponentsStayEmpty) {
    const auto g = spectral::make_grid({8, 8, 4});
    const auto f = test::cosine_mode(g, 0, {0, 2, 0}, 1.0);
    const auto back = decode_snapshot(encode_snapshot(f));
    EXPECT_TRUE(back.has_component(0));
    EXPECT_FALSE(back.has_component(1));
    EXPECT_FALSE(back.has_component(2));
}

TEST(Snapshot, CorruptionIsDetected) {
    const auto g = spectral::make_grid({8, 8, 8});
    const auto good = encode_snapshot(test::cosine_mode(g, 2, {1, 1, 0}, 2.0));
    auto flip = good;
    flip[40] ^= 0x01;
    EXPECT_THROW(
        {
            try {
                decode_snapshot(flip);
            } catch (const std::runtime_error& e) {
                EXPECT_NE(std::string(e.what()).find("checksum"), std::string::npos);
                throw;
            }
        },
        std::runtime_error);
    auto magic = good;
    magic[0] = 'X';
    EXPECT_THROW(decode_snapshot(magic), std::runtime_error);
    auto shortened = good;
    shortened.resize(shortened.size() - 16);
    EXPECT_THROW(decode_snapshot(shortened), std::runtime_error);
}

TEST(Snapshot, NonHermitianDataIsRejectedOnLoad) {
    const auto g = spectral::make_grid({8, 8, 8});
    SpectralVectorField f(g, true);
    std::vector<cplx> v(g.size());
    v[*g.index_of({1, 2, 0})] = {1.0, 0.0};  // no conjugate partner
    f.set_component(0, std::move(v));
    EXPECT_THROW(decode_snapshot(encode_snapshot(f)), std::runtime_error);
}

TEST(Snapshot, DataSidecarRestoresParamsAndSplit) {
    const auto p = params(4, 0.5, 0.05);
    const auto d = datagen::build_data(p);
    const auto path = scratch("d.onsf").string();
    save_data(path, d, datagen::validate_hypotheses(d));
    const auto back = load_data(path);
    EXPECT_EQ(back.params, p);
    const auto g = back.common_grid();
    for (int i = 0; i < 3; ++i)
        EXPECT_EQ(test::max_coeff_diff(back.components[i], d.component_on(i, g)), 0.0) << i;
    const auto side = json::parse(slurp(sidecar_path(path)));
    EXPECT_EQ(side.at("validation").size(), datagen::validate_hypotheses(d).entries.size());
}

// ------------------------------------------------------------------ config

TEST(Config, ParseSerializeParseIsAFixedPoint) {
    ExperimentConfig c;
    c.params = params(32, 0.3, 0.02, BandPolicy::planar);
    c.params.C = 2.5;
    c.grid = std::array<int, 3>{64, 32, 48};
    c.evolution.T = 0.5;
    c.evolution.dt = 2.5e-3;
    c.evolution.linear = true;
    c.quadrature.t_max = 12.0;
    c.norms = {{-1.0, norms::kInfinity, norms::kInfinity, BesovMethod::heat}, {-0.25, 4.0, 2.0, BesovMethod::dyadic}};
    c.outputs = {"x.onsf", "x.csv", ""};
    c.Ns = {6, 10, 16};
    c.workers = 3;
    c.seed = 0xfedcba9876543210ull;
    const auto text = serialize_config(c);
    const auto once = parse_config(text);
    EXPECT_EQ(once, c);
    EXPECT_EQ(serialize_config(once), text);

    const ExperimentConfig dflt;
    EXPECT_EQ(parse_config(serialize_config(dflt)), dflt);
    EXPECT_EQ(to_json(dflt).at("grid"), "auto");
}

TEST(Config, UnknownKeysAndBadValuesAreRejected) {
    EXPECT_THROW(parse_config(R"({"bogus": 1})"), std::invalid_argument);
    EXPECT_THROW(parse_config(R"({"params": {"N": 16, "epsilon": 0.2}})"), std::invalid_argument);
    EXPECT_THROW(parse_config(R"({"evolution": {"steps": 3}})"), std::invalid_argument);
    EXPECT_THROW(parse_config(R"({"grid": "big"})"), std::invalid_argument);
    EXPECT_THROW(parse_config(R"({"params": {"bands": "diagonal"}})"), std::invalid_argument);
    EXPECT_THROW(parse_config(R"({"norms": [{"s": -1, "p": "inf", "q": 0}]})"), std::invalid_argument);
    EXPECT_THROW(parse_config("{not json"), std::invalid_argument);
}

TEST(Config, DeltaDefaultsFromEps) {
    const auto c = parse_config(R"({"params": {"eps": 0.16}})");
    EXPECT_DOUBLE_EQ(c.params.delta, 0.02);
}

TEST(Config, ValidationCoversParamsEvolutionAndPaths) {
    ExperimentConfig c;
    EXPECT_NO_THROW(validate(c));
    c.params.delta = 0.2;
    EXPECT_THROW(validate(c), std::invalid_argument);
    c = ExperimentConfig{};
    c.evolution.dt = 0.0;
    EXPECT_THROW(validate(c), std::invalid_argument);
    c = ExperimentConfig{};
    c.workers = 0;
    EXPECT_THROW(validate(c), std::invalid_argument);
    c = ExperimentConfig{};
    c.outputs.csv = "/nonexistent-dir-orthoflow/x.csv";
    EXPECT_THROW(validate(c), std::invalid_argument);
    c = ExperimentConfig{};
    c.outputs.csv = scratch("ok.csv").string();
    EXPECT_NO_THROW(validate(c));
}

TEST(Config, AutoGridHoldsDealiasedProducts) {
    const auto d = datagen::build_data(params(4, 0.5, 0.05));
    const auto g = resolve_grid(std::nullopt, d);
    // Content reaches 2M = 16 on axes 1 and 3 and 2N = 8 on axis 2.
    EXPECT_EQ(g.dims(), (std::array<int, 3>{96, 48, 96}));
    for (int a = 0; a < 3; ++a) EXPECT_GE(g.dealias_cutoff(a), a == 1 ? 16 : 32);
    EXPECT_EQ(resolve_grid(std::array<int, 3>{32, 32, 32}, d).dims(), (std::array<int, 3>{32, 32, 32}));

    // One planar component: the flat axis stays at 4.
    datagen::OrthogonalData one;
    const auto small = spectral::make_grid({4, 16, 16});
    one.components = {test::cosine_mode(small, 0, {0, 2, 3}), SpectralVectorField(small, true),
                      SpectralVectorField(small, true)};
    const auto g1 = resolve_grid(std::nullopt, one);
    EXPECT_EQ(g1.dims(), (std::array<int, 3>{4, 12, 18}));
}

TEST(Config, AutoGridRespectsTheMemoryCap) {
    const auto d = datagen::build_data(params(16, 0.25, 0.03));
    ::setenv("ORTHOFLOW_MEM_CAP_MB", "64", 1);
    EXPECT_THROW(resolve_grid(std::nullopt, d), std::invalid_argument);
    ::unsetenv("ORTHOFLOW_MEM_CAP_MB");
}

// -------------------------------------------------------------------- CSV

TEST(Csv, SchemaHeaders) {
    EXPECT_EQ(CsvTable(scan_header()).str(), "N,F_l1l3,u1_l3,u2_l3,u3_l3,ratio\n");
    const auto& th = trace_header();
    EXPECT_EQ(th.front(), "t");
    EXPECT_EQ(th.back(), "defect");
}

TEST(Csv, LocaleIndependentShortestRoundTrip) {
    const char* previous = std::setlocale(LC_ALL, nullptr);
    const std::string saved = previous ? previous : "C";
    const char* de = std::setlocale(LC_ALL, "de_DE.UTF-8");
    CsvTable t({"a", "b", "c"});
    t.add({1234567.25, 1234567LL, std::string("x")});
    t.add({0.1, -3LL, std::string("y")});
    t.add({1e-300, 0LL, std::string("z")});
    EXPECT_EQ(t.str(), "a,b,c\n1234567.25,1234567,x\n0.1,-3,y\n1e-300,0,z\n");
    std::setlocale(LC_ALL, saved.c_str());
    if (!de) GTEST_LOG_(INFO) << "de_DE locale unavailable; checked under the default locale only";

    for (double v : {0.1, 1.0 / 3.0, 6.02214076e23, -2.5e-17, 0.30326532985631671}) {
        const auto s = format_double(v);
        EXPECT_EQ(std::stod(s), v) << s;
    }
    EXPECT_EQ(format_double(std::numeric_limits<double>::infinity()), "inf");
}

TEST(Csv, RowWidthMustMatchHeader) {
    CsvTable t({"a", "b"});
    EXPECT_THROW(t.add({1.0}), std::invalid_argument);
}

TEST(Csv, NormSpecParsing) {
    const auto s = parse_spec("-1,inf,2");
    EXPECT_EQ(s.s, -1.0);
    EXPECT_TRUE(std::isinf(s.p));
    EXPECT_EQ(s.q, 2.0);
    EXPECT_EQ(s.method, BesovMethod::heat);
    EXPECT_EQ(parse_spec("-0.25,4,2,dyadic").method, BesovMethod::dyadic);
    EXPECT_THROW(parse_spec("-1,inf"), std::invalid_argument);
    EXPECT_THROW(parse_spec("-1,x,2"), std::invalid_argument);
    EXPECT_THROW(parse_spec("-1,inf,2,fourier"), std::invalid_argument);
    EXPECT_EQ(spec_label(s), "B^-1_inf,2[heat]");
}

// ------------------------------------------------------------------ norms

TEST(NormsTable, ZeroFieldGivesZeros) {
    datagen::OrthogonalData z;
    const auto g = spectral::make_grid({8, 8, 8});
    z.components = {SpectralVectorField(g, true), SpectralVectorField(g, true), SpectralVectorField(g, true)};
    const auto csv = norms_table(z, default_norm_specs()).str();
    EXPECT_EQ(csv.substr(csv.find('\n') + 1), "1,0,0,0,0,0\n2,0,0,0,0,0\n3,0,0,0,0,0\n");
}

TEST(NormsTable, ComponentThreeIsTheSingleModeClosedForm) {
    const auto p = params(16, 0.25, 0.03);
    const auto d = datagen::build_data(p);
    const double amp = norms::lp_norm(d.components[2], norms::kInfinity);
    const auto [b3, method] = component_largeness(3, p);
    // sup_t √t e^{−2t} = e^{−1/2}/2 at t = 1/4.
    EXPECT_NEAR(b3 / amp, 0.5 * std::exp(-0.5), 1e-9);
    EXPECT_NEAR(b3 / amp, 0.303265, 5e-7);
    EXPECT_EQ(method, "heat");
}

TEST(NormsTable, ComponentOneMeetsTheLargenessLowerBound) {
    for (int N : {16, 32, 64}) {
        const auto p = params(N, 0.25, 0.03);
        const auto d = datagen::build_data(p);
        const auto csv = norms_table(d, default_norm_specs());
        const double b1 = component_largeness(1, p).first;
        EXPECT_GE(b1, std::exp(-8.0) * std::sqrt(std::log(double(N)) / p.C)) << N;
        EXPECT_EQ(csv.rows(), 3u);
    }
}

// --------------------------------------------------------------- largeness

TEST(Largeness, SeparableFormulaMatchesTheSparsePath) {
    for (int N : {4, 8, 16, 32}) {
        auto p = params(N, 0.25, 0.03, BandPolicy::planar);
        for (int axis : {1, 2}) {
            const auto cs = datagen::component_spectrum(axis, p);
            const double sparse = norms::besov_norm_detailed(cs.spectrum, largeness_spec()).value;
            const double sep = detail::separable_largeness(axis, p);
            EXPECT_NEAR(sep / sparse, 1.0, 1e-9) << "N=" << N << " axis=" << axis;
        }
    }
}

TEST(Largeness, ColumnOneGrowsLikeSqrtLogN) {
    const auto t = largeness_table({16, 64, 256, 1024}, params(16, 0.25, 0.03));
    ASSERT_EQ(t.rows.size(), 4u);
    EXPECT_TRUE(t.column1_increasing);
    EXPECT_LE(t.fit_residual, 0.2);
    for (const auto& r : t.rows) EXPECT_GE(r.b[0], std::exp(-8.0) * std::sqrt(std::log(double(r.N))));
    // Component 3 scales with (ln N^{1+ε})^{1/2}.
    const double c0 = t.rows.front().b[2] / std::sqrt(std::log(16.0));
    for (const auto& r : t.rows) EXPECT_NEAR(r.b[2] / std::sqrt(std::log(double(r.N))), c0, 1e-9 * c0);
    const auto csv = largeness_csv(t).str();
    EXPECT_EQ(csv.substr(0, csv.find('\n')), "N,B1,B2,B3,method1,method2,method3");
}

TEST(Largeness, ThresholdIsTheFirstCrossing) {
    const auto base = params(16, 0.25, 0.03);
    for (double M : {0.2, 0.3, 0.35}) {
        const auto N = largeness_threshold(M, base);
        ASSERT_TRUE(N.has_value()) << M;
        auto p = base;
        p.bands = BandPolicy::planar;
        p.N = *N;
        EXPECT_GT(component_largeness(1, p).first, M);
        if (*N > 4) {
            p.N = *N / 4;
            EXPECT_LE(component_largeness(1, p).first, M);
        }
    }
    EXPECT_FALSE(largeness_threshold(100.0, base).has_value());
}

// ------------------------------------------------------------------ verify

TEST(Verify, SuitesPassAndRecordTheSeed) {
    const auto r = run_suite("all", 12345);
    EXPECT_EQ(r.seed, 12345u);
    EXPECT_TRUE(r.passed());
    for (const auto& c : r.checks) EXPECT_TRUE(c.passed) << c.suite << ": " << c.name << " " << c.measured;
    EXPECT_GE(r.checks.size(), 15u);
    EXPECT_EQ(to_json(r).at("seed"), 12345u);
    EXPECT_THROW(run_suite("everything", 1), std::invalid_argument);
}

TEST(Verify, SeedDeterminesTheReport) {
    const auto a = run_suite("invariants", 7), b = run_suite("invariants", 7);
    ASSERT_EQ(a.checks.size(), b.checks.size());
    for (std::size_t i = 0; i < a.checks.size(); ++i) EXPECT_EQ(a.checks[i].measured, b.checks[i].measured);
}

// --------------------------------------------------------------------- CLI

#ifdef ORTHOFLOW_CLI_PATH
namespace {

int run_cli(const std::string& args, const fs::path& log) {
    const std::string cmd = std::string("\"") + ORTHOFLOW_CLI_PATH + "\" " + args + " > \"" + log.string() + "\" 2>&1";
    const int rc = std::system(cmd.c_str());
    return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

}  // namespace

TEST(Cli, GenWritesSnapshotAndReport) {
    const auto out = scratch("cli.onsf"), log = scratch("gen.log");
    ASSERT_EQ(run_cli("gen --N 16 --eps 0.25 --delta 0.03 --C 1 --out " + out.string(), log), 0) << slurp(log);
    EXPECT_TRUE(fs::exists(out));
    const auto side = json::parse(slurp(out.string() + ".json"));
    EXPECT_EQ(side.at("params").at("N"), 16);
    EXPECT_EQ(side.at("validation").size(), 9u);
    EXPECT_NE(slurp(log).find("PASS a"), std::string::npos);

    const auto norms_csv = scratch("norms.csv");
    ASSERT_EQ(run_cli("norms --in " + out.string() + " --csv " + norms_csv.string(), log), 0) << slurp(log);
    const auto text = slurp(norms_csv);
    EXPECT_EQ(text.substr(0, text.find('\n')),
              "component,L2,L3,B^-1_inf,inf[heat],B^-1_inf,2[heat],B^-0.25_4,2[dyadic]");
}

TEST(Cli, GenRejectsBadParams) {
    const auto log = scratch("bad.log");
    EXPECT_NE(run_cli("gen --N 4 --eps 0.1", log), 0);
    EXPECT_NE(slurp(log).find("bands [4,8] and [5,10] overlap"), std::string::npos) << slurp(log);
    EXPECT_NE(run_cli("gen --N 16 --eps 0.2 --delta 0.06", log), 0);
    EXPECT_NE(slurp(log).find("delta < eps/4"), std::string::npos) << slurp(log);
}

TEST(Cli, SolveDecomposedWritesTheDefectColumn) {
    const auto in = scratch("s.onsf"), csv = scratch("trace.csv"), log = scratch("solve.log");
    ASSERT_EQ(run_cli("gen --N 4 --eps 0.5 --out " + in.string(), log), 0) << slurp(log);
    ASSERT_EQ(run_cli("solve --in " + in.string() + " --mode decomposed --T 0.01 --dt 1e-3 --stride 5 --grid 48,48,48 --csv " +
                          csv.string(),
                      log),
              0)
        << slurp(log);
    const auto text = slurp(csv);
    EXPECT_EQ(text.substr(0, text.find('\n')), "t,l2_u,grad_l2_u,l3_u,l3_R,div_residual,energy_defect,defect");
    EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 4);
    const auto summary = json::parse(slurp(csv.string() + ".json"));
    EXPECT_LE(summary.at("sup_defect").get<double>(), 1e-12);
}

TEST(Cli, VerifyExitsZeroAndConfigRoundTrips) {
    const auto log = scratch("verify.log"), cfg = scratch("cfg.json"), cfg2 = scratch("cfg2.json");
    EXPECT_EQ(run_cli("verify --suite all", log), 0) << slurp(log);
    EXPECT_NE(run_cli("verify --suite nothing", log), 0);
    ASSERT_EQ(run_cli("config", cfg), 0);
    ASSERT_EQ(run_cli("--config " + cfg.string() + " config", cfg2), 0);
    EXPECT_EQ(slurp(cfg), slurp(cfg2));
}
#endif
