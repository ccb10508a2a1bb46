#include <gtest/gtest.h>

#include "orthoflow/flows/quadrature.hpp"
#include "orthoflow/solver/evolution.hpp"
#include "test_util.hpp"

using namespace orthoflow;
using namespace orthoflow::solver;
using test::random_field;
using test::sine_mode;

namespace {

EvolutionConfig config(double T, double dt, bool measure = false) {
    EvolutionConfig c;
    c.T = T;
    c.dt = dt;
    c.measure_plans = measure;
    return c;
}

// A(sin x cos y cos z, −cos x sin y cos z, 0).
SpectralVectorField taylor_green(const FourierGrid& g, double A) {
    SpectralVectorField u(g, true);
    for (int s2 : {-1, 1})
        for (int s3 : {-1, 1}) {
            u += sine_mode(g, 0, {1, s2, s3}, 0.25 * A);
            u += sine_mode(g, 1, {s2, 1, s3}, -0.25 * A);
        }
    return u;
}

datagen::OrthogonalData small_data(int N, double eps) {
    datagen::ConstructionParams p;
    p.N = N;
    p.eps = eps;
    p.delta = datagen::ConstructionParams::default_delta(eps);
    return datagen::build_data(p);
}

datagen::OrthogonalData only_component(datagen::OrthogonalData d, int keep) {
    for (int i = 0; i < 3; ++i)
        if (i != keep) d.components[i] = SpectralVectorField(d.components[i].grid(), true);
    return d;
}

double rel(const SpectralVectorField& a, const SpectralVectorField& b) { return (a - b).l2() / b.l2(); }

}  // namespace

TEST(EvolutionConfig, Validation) {
    EXPECT_NO_THROW(config(0.1, 1e-3).validate());
    EXPECT_THROW(config(0.1, 0.0).validate(), std::invalid_argument);
    EXPECT_THROW(config(1e-4, 1e-3).validate(), std::invalid_argument);
    EXPECT_THROW(config(0.1005, 1e-3 * 0.7).validate(), std::invalid_argument);
    auto c = config(0.1, 1e-3);
    c.trace_stride = 0;
    EXPECT_THROW(c.validate(), std::invalid_argument);
    EXPECT_EQ(config(1.0, 1e-3).steps(), 1000);
}

TEST(EvolutionConfig, AdvectiveLimit) {
    const auto g = spectral::make_grid({16, 16, 16});
    const auto u = taylor_green(g, 2.0);
    EXPECT_NEAR(advective_dt_limit(u), (2.0 * M_PI / 16) / 2.0, 1e-12);
    EXPECT_TRUE(std::isinf(advective_dt_limit(SpectralVectorField(g, true))));
}

TEST(StepFullNs, SingleComponentIsHeatFlow) {
    const auto d = small_data(4, 0.5);
    const auto g = spectral::make_grid({32, 32, 32});
    const auto u = spectral::regrid(d.components[0], g);
    NsStepper st(g, 1e-2, false);
    EXPECT_LE(rel(st.step(u, 0.0), spectral::heat_semigroup(u, 1e-2)), 1e-14);
}

TEST(StepFullNs, ZeroStateStaysZero) {
    const auto g = spectral::make_grid({16, 16, 16});
    NsStepper st(g, 1e-2, false);
    EXPECT_EQ(st.step(SpectralVectorField(g, true), 0.0).l2(), 0.0);
}

TEST(StepFullNs, StepDoublingIsThirdOrder) {
    const auto g = spectral::make_grid({16, 16, 16});
    const auto u = taylor_green(g, 2.0);
    auto diff = [&](double h) {
        NsStepper full(g, h, false), half(g, h / 2, false);
        return (full.step(u, 0.0) - half.step(half.step(u, 0.0), h / 2)).l2();
    };
    const double r = diff(0.02) / diff(0.01);
    EXPECT_GT(r, 6.5);
    EXPECT_LT(r, 9.5);
}

TEST(StepFullNs, BlowUpHaltsWithTime) {
    const auto g = spectral::make_grid({16, 16, 16});
    std::mt19937_64 rng(test::kCorpusSeed + 300);
    auto u = random_field(g, 4, rng, true);
    u *= 1e6 / u.l2();
    const auto r = solve_full_ns(u, config(100.0, 0.5));
    EXPECT_TRUE(r.trace.halted);
    EXPECT_GT(r.trace.halt_time, 0.0);
    EXPECT_LT(r.trace.halt_time, 100.0);
    EXPECT_NE(r.trace.message.find("non-finite"), std::string::npos);
}

TEST(SolveFullNs, HeatExactnessForOneComponent) {
    const auto d = small_data(8, 0.5);
    const auto g = spectral::make_grid({64, 64, 64});
    const auto u0 = spectral::regrid(d.components[0], g);
    const auto r = solve_full_ns(u0, config(0.1, 1e-3));
    EXPECT_FALSE(r.trace.halted);
    EXPECT_LE(rel(r.state, spectral::heat_semigroup(u0, 0.1)), 1e-6);
}

TEST(SolveFullNs, EnergyDivergenceAndTrace) {
    const auto g = spectral::make_grid({16, 16, 16});
    std::mt19937_64 rng(test::kCorpusSeed + 301);
    auto u0 = random_field(g, 3, rng, true);
    u0 *= 2.0 / u0.l2();
    auto c = config(0.1, 1e-3);
    const auto r = solve_full_ns(u0, c);
    EXPECT_LE(r.trace.max_energy_increase, 1e-10);
    EXPECT_LE(r.trace.max_div_residual, 1e-10);
    ASSERT_EQ(r.trace.samples.size(), 11u);
    for (std::size_t i = 1; i < r.trace.samples.size(); ++i) {
        const auto& s = r.trace.samples[i];
        EXPECT_GT(s.t, r.trace.samples[i - 1].t);
        EXPECT_LE(s.l2, r.trace.samples[i - 1].l2);
        EXPECT_TRUE(std::isfinite(s.l3) && std::isfinite(s.grad_l2) && std::isfinite(s.energy_defect));
    }
    EXPECT_DOUBLE_EQ(r.trace.samples.back().t, 0.1);
    EXPECT_NEAR(r.trace.samples.back().l2, r.state.l2(), 1e-15);
    EXPECT_TRUE(std::isfinite(r.trace.energy_constant));
}

TEST(SolveFullNs, EnergyDefectIsSecondOrder) {
    const auto g = spectral::make_grid({16, 16, 16});
    const auto u0 = taylor_green(g, 2.0);
    const double a = solve_full_ns(u0, config(0.2, 0.01)).trace.energy_defect;
    const double b = solve_full_ns(u0, config(0.2, 0.005)).trace.energy_defect;
    EXPECT_GT(a / b, 3.0);
    EXPECT_LT(a / b, 5.0);
}

TEST(SolveFullNs, HalvingDtQuartersTheError) {
    const auto g = spectral::make_grid({16, 16, 16});
    const auto u0 = taylor_green(g, 2.0);
    const auto ref = solve_full_ns(u0, config(0.2, 0.02 / 8)).state;
    const double e1 = rel(solve_full_ns(u0, config(0.2, 0.02)).state, ref);
    const double e2 = rel(solve_full_ns(u0, config(0.2, 0.01)).state, ref);
    EXPECT_GT(e1 / e2, 3.0);
    EXPECT_LT(e1 / e2, 5.0);
}

TEST(SolveFullNs, DeterministicTraces) {
    const auto g = spectral::make_grid({16, 16, 16});
    const auto u0 = taylor_green(g, 2.0);
    const auto a = solve_full_ns(u0, config(0.05, 1e-3));
    const auto b = solve_full_ns(u0, config(0.05, 1e-3));
    ASSERT_EQ(a.trace.samples.size(), b.trace.samples.size());
    for (std::size_t i = 0; i < a.trace.samples.size(); ++i) {
        EXPECT_EQ(a.trace.samples[i].l2, b.trace.samples[i].l2);
        EXPECT_EQ(a.trace.samples[i].l3, b.trace.samples[i].l3);
    }
    EXPECT_EQ(test::max_coeff_diff(a.state, b.state), 0.0);
}

TEST(SolveFullNs, RejectsCompressibleData) {
    const auto g = spectral::make_grid({16, 16, 16});
    EXPECT_THROW(solve_full_ns(test::cosine_mode(g, 0, {1, 0, 0}), config(0.1, 1e-2)), std::invalid_argument);
}

TEST(SolveResidual, NoForcingMeansNoResidual) {
    const auto d = only_component(small_data(4, 0.5), 0);
    const auto g = spectral::make_grid({32, 32, 32});
    const auto r = solve_residual(d, g, config(0.05, 1e-3));
    EXPECT_EQ(r.state.l2(), 0.0);
    for (const auto& s : r.trace.samples) EXPECT_EQ(s.r_l3, 0.0);
}

TEST(SolveResidual, LinearModeMatchesDuhamelOracle) {
    // R(t) = ∫₀ᵗ e^{(t−s)Δ}[F(s) − Q(v★(s), R(s))] ds on nodes s_m = m·h,
    // fourth-order weights, fixed-point iteration for the implicit last node.
    const auto d = small_data(2, 1.0);
    const auto g = spectral::make_grid({32, 32, 32});
    const auto pol = flows::ProductPolicy::truncate;
    const double T = 0.1, h = T / 40;
    const int M = 40;
    const auto u0 = d.sum(g);
    auto G = [&](double s, const SpectralVectorField& R) {
        return flows::forcing_F(d, s, g, pol) - flows::bilinear_Q(spectral::heat_semigroup(u0, s), R, pol);
    };
    auto heat = [](const SpectralVectorField& f, double t) { return spectral::heat_semigroup(f, t); };
    // Solves R = known + w·G(s, R) by fixed-point iteration.
    auto implicit = [&](double s, const SpectralVectorField& known, double w) {
        SpectralVectorField R = known;
        for (int it = 0; it < 50; ++it) {
            auto next = known;
            next.axpy(w, G(s, R));
            const double change = (next - R).l2();
            R = next;
            if (change <= 1e-15) break;
        }
        return R;
    };
    // Weights of nodes 0..m in ∫₀^{t_m}, m ≥ 2: Simpson, with a leading 3/8
    // panel when m is odd.
    auto weights = [&](int m) {
        std::vector<double> w(m + 1, 0.0);
        int start = 0;
        if (m % 2 == 1) {
            for (int j = 0; j < 4; ++j) w[j] += (j == 0 || j == 3 ? 3.0 : 9.0) / 8;
            start = 3;
        }
        for (int j = start; j < m; j += 2) {
            w[j] += 1.0 / 3;
            w[j + 1] += 4.0 / 3;
            w[j + 2] += 1.0 / 3;
        }
        for (auto& x : w) x *= h;
        return w;
    };
    std::vector<SpectralVectorField> R(M + 1, SpectralVectorField(g, true)), Gs(M + 1);
    Gs[0] = G(0.0, R[0]);
    // Start: trapezoid to h/2, then Simpson over [0, h].
    const auto Rhalf = implicit(h / 2, (h / 4) * heat(Gs[0], h / 2), h / 4);
    const auto Ghalf = G(h / 2, Rhalf);
    auto known1 = heat(Gs[0], h);
    known1 *= h / 6;
    known1.axpy(4 * h / 6, heat(Ghalf, h / 2));
    R[1] = implicit(h, known1, h / 6);
    Gs[1] = G(h, R[1]);
    for (int m = 2; m <= M; ++m) {
        const auto w = weights(m);
        SpectralVectorField known(g, true);
        for (int j = 0; j < m; ++j)
            if (w[j] != 0.0) known.axpy(w[j], heat(Gs[j], (m - j) * h));
        R[m] = implicit(m * h, known, w[m]);
        Gs[m] = G(m * h, R[m]);
    }
    auto c = config(T, 1e-3);
    c.linear = true;
    const auto r = solve_residual(d, g, c);
    ASSERT_GT(R[M].l2(), 0.0);
    EXPECT_LE(rel(r.state, R[M]), 1e-4);
}

TEST(SolveResidual, SmallDataResidualBoundedByForcing) {
    const auto d = small_data(2, 1.0);
    const auto g = spectral::make_grid({32, 32, 32});
    auto c = config(0.5, 2e-3);
    c.trace_stride = 5;
    const auto r = solve_residual(d, g, c);
    double sup = 0.0;
    for (const auto& s : r.trace.samples) sup = std::max(sup, s.r_l3);
    auto q = flows::ForcingQuadrature::for_data(d, 16);
    const auto f = flows::forcing_l1l3(d, q, flows::ForcingMode::full);
    EXPECT_GT(sup, 0.0);
    EXPECT_LE(sup, 10.0 * f.value);
    EXPECT_LE(r.trace.max_div_residual, 1e-10);
}

TEST(DecompositionCheck, OneComponentIsExact) {
    const auto d = only_component(small_data(4, 0.5), 0);
    const auto g = spectral::make_grid({32, 32, 32});
    const auto r = decomposition_check(d, g, config(0.05, 1e-3));
    EXPECT_LE(r.sup_defect, 1e-12);
    EXPECT_EQ(r.R.l2(), 0.0);
}

TEST(DecompositionCheck, FullDataSplitsToRoundOff) {
    const auto d = small_data(2, 1.0);
    const auto g = spectral::make_grid({32, 32, 32});
    auto c = config(0.1, 2e-3);
    c.trace_stride = 10;
    const auto r = decomposition_check(d, g, c);
    EXPECT_FALSE(r.full.halted);
    EXPECT_LE(r.sup_defect, 1e-5);
    EXPECT_EQ(r.t.size(), 51u);
    EXPECT_EQ(r.full.samples.size(), 6u);
    EXPECT_GT(r.residual.samples.back().r_l3, 0.0);
}

TEST(DecompositionCheck, RejectsLinearMode) {
    auto c = config(0.1, 1e-3);
    c.linear = true;
    EXPECT_THROW(decomposition_check(small_data(2, 1.0), spectral::make_grid({32, 32, 32}), c), std::invalid_argument);
}

TEST(ResidualStepper, RelabeledComponentsTakeTheGenericPath) {
    const auto d = small_data(2, 1.0);
    auto p = d;
    p.components = {d.components[1], d.components[2], d.components[0]};
    const auto g = spectral::make_grid({32, 32, 32});
    std::mt19937_64 rng(test::kCorpusSeed + 302);
    auto R = random_field(g, 4, rng, true);
    R *= 0.1 / R.l2();
    ResidualStepper a(d, g, 1e-3, false, false), b(p, g, 1e-3, false, false);
    const auto fa = a.rhs(R, 0.05), fb = b.rhs(R, 0.05);
    EXPECT_LE(rel(fb, fa), 1e-13);
}
