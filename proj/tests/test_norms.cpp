#include <gtest/gtest.h>

#include <numbers>

#include "orthoflow/norms/besov.hpp"
#include "orthoflow/norms/inequalities.hpp"
#include "test_util.hpp"

using namespace orthoflow;
using namespace orthoflow::norms;
using orthoflow::spectral::make_grid;
using orthoflow::test::cosine_mode;
using orthoflow::test::random_field;

namespace {

// Constants measured once on the seeded corpora below, then frozen.
constexpr double kEquivalenceLo = 0.1, kEquivalenceHi = 10.0;  // dyadic/heat B⁻¹∞,∞; measured [1.53, 2.34]
constexpr double kEmbedC1 = 1.5;  // B⁻¹∞,∞ ≤ C₁ B^{-1/4}_{4,2}; measured 1.30
constexpr double kEmbedC2 = 1.0;  // B^{-1/4}_{4,2} ≤ C₂ L³; measured 0.80
constexpr double kEmbedC3 = 1.0;  // B⁻¹∞,₂ ≤ C₃ L² on 2D fields; measured 0.75

// Real field of (x₂, x₃) in component 1 with Gaussian coefficients on [lo, hi]².
SpectralVectorField planar_field(int lo, int hi, std::mt19937_64& rng) {
    std::normal_distribution<double> gauss;
    auto g = make_grid({4, 2 * hi + 4, 2 * hi + 4});
    SpectralVectorField f(g);
    for (int a = lo; a <= hi; ++a)
        for (int b = -hi; b <= hi; ++b)
            if (std::abs(b) >= lo) f.set_hermitian(0, {0, a, b}, cplx{gauss(rng), gauss(rng)});
    return f;
}

}  // namespace

TEST(Lp, CosineClosedForms) {
    auto g = make_grid({16, 16, 16});
    auto f = cosine_mode(g, 0, {1, 2, 3});
    EXPECT_NEAR(lp_norm(f, 2), 0.7071068, 5e-8);
    // (4/(3π))^{1/3} = 0.7515011.
    EXPECT_NEAR(lp_norm(f, 3), std::cbrt(4.0 / (3.0 * std::numbers::pi)), 1e-6);
    EXPECT_NEAR(lp_norm(f, 3), 0.751498, 5e-6);
    EXPECT_NEAR(lp_norm(f, 4), std::pow(3.0 / 8.0, 0.25), 1e-12);
    EXPECT_NEAR(lp_norm(f, kInfinity), 1.0, 1e-12);
    EXPECT_NEAR(lp_norm(f, 1), 2.0 / std::numbers::pi, 1e-3);
}

TEST(Lp, SampledL2MatchesParseval) {
    auto g = make_grid({16, 16, 16});
    std::mt19937_64 rng(test::kCorpusSeed + 20);
    auto f = random_field(g, 5, rng, true);
    const auto s = SparseSpectrum::from(f);
    FftBuffer buf;
    auto samples = s.sample(spectral::unit_multiplier, spectral::sampling_dims(s.content, 1.0), buf);
    EXPECT_NEAR(lp_of_samples(samples, 2.0), f.l2(), 1e-10 * f.l2());
}

TEST(Lp, Homogeneity) {
    auto g = make_grid({12, 12, 12});
    std::mt19937_64 rng(test::kCorpusSeed + 21);
    auto f = random_field(g, 4, rng, true);
    auto h = -2.5 * f;
    for (double p : {1.0, 2.0, 2.5, 3.0, 4.0, kInfinity}) {
        const double a = lp_norm(f, p), b = lp_norm(h, p);
        EXPECT_NEAR(b, 2.5 * a, 1e-12 * b) << "p=" << p;
    }
}

TEST(Lp, RejectsPBelowOne) {
    auto g = make_grid({8, 8, 8});
    EXPECT_THROW(lp_norm(cosine_mode(g, 0, {1, 0, 0}), 0.5), std::invalid_argument);
}

TEST(Lp, PositiveFastPathMatchesSampling) {
    auto g = make_grid({16, 16, 16});
    SpectralVectorField f(g);
    for (int a = 1; a <= 5; ++a)
        for (int b = 1; b <= 5; ++b) f.set_hermitian(0, {0, a, b}, cplx{1.0 / (a + b), 0.0});
    const auto s = SparseSpectrum::from(f);
    ASSERT_TRUE(s.nonnegative_real);
    FftBuffer buf;
    auto samples = s.sample(spectral::unit_multiplier, spectral::sampling_dims(s.content, 4.0), buf);
    EXPECT_NEAR(lp_norm(s, kInfinity), lp_of_samples(samples, kInfinity), 1e-12);
}

TEST(LittlewoodPaley, PartitionOfUnity) {
    auto g = make_grid({24, 24, 24});
    std::mt19937_64 rng(test::kCorpusSeed + 22);
    auto f = random_field(g, 10, rng);
    SpectralVectorField sum(g);
    for (int j = -1; j <= 6; ++j) sum += littlewood_paley(f, j);
    EXPECT_LE((sum - f).l2(), 1e-10 * f.l2());
}

TEST(LittlewoodPaley, SingleModeShells) {
    auto g = make_grid({16, 16, 16});
    auto f = cosine_mode(g, 1, {0, 3, 4});
    for (int j = -2; j <= 6; ++j) {
        const double n = littlewood_paley(f, j).l2();
        if (j == 2 || j == 3) {
            EXPECT_GT(n, 0.0) << j;
        } else {
            EXPECT_EQ(n, 0.0) << j;
        }
    }
    EXPECT_EQ(littlewood_paley(SpectralVectorField(g), 2).l2(), 0.0);
}

TEST(LittlewoodPaley, SupportInAnnulus) {
    auto g = make_grid({24, 24, 24});
    std::mt19937_64 rng(test::kCorpusSeed + 23);
    auto f = random_field(g, 10, rng);
    for (int j = 0; j <= 4; ++j) {
        const auto s = SparseSpectrum::from(littlewood_paley(f, j));
        EXPECT_GE(std::sqrt(s.kmin2), std::ldexp(1.0, j - 1));
        EXPECT_LE(std::sqrt(s.kmax2), std::ldexp(1.0, j + 1));
    }
}

TEST(Besov, HeatSingleModeClosedForm) {
    auto g = make_grid({8, 8, 8});
    const double amp = 1.7;
    auto f = cosine_mode(g, 2, {1, 1, 0}, amp);
    const double want = 0.5 * std::exp(-0.5) * amp;
    EXPECT_NEAR(want / amp, 0.303265, 5e-7);
    auto r = besov_norm_detailed(f, {-1, kInfinity, kInfinity, BesovMethod::heat});
    EXPECT_NEAR(r.value, want, 1e-6 * want);
    EXPECT_NEAR(r.argmax_t, 0.25, 1e-4);
}

TEST(Besov, HeatSingleModeClosedFormSignedCoefficient) {
    // Non-positive coefficients take the sampled L^∞ path.
    auto g = make_grid({8, 8, 8});
    auto f = test::sine_mode(g, 0, {0, 1, 1}, -0.8);
    EXPECT_NEAR(besov_norm(f, {-1, kInfinity, kInfinity, BesovMethod::heat}), 0.8 * 0.5 * std::exp(-0.5), 1e-6);
}

TEST(Besov, HeatQ2MatchesClosedFormTimeIntegral) {
    // For nonnegative coefficients c_k, ‖e^{tΔ}f‖_∞ = Σ c_k e^{-t|k|²}, so
    // ∫₀^∞ ‖e^{tΔ}f‖²_∞ dt = Σ_{k,l} c_k c_l / (|k|² + |l|²).
    auto g = make_grid({4, 16, 16});
    SpectralVectorField f(g);
    std::vector<std::pair<double, double>> modes;  // (c, |k|²) over all ±k
    for (int a = 2; a <= 5; ++a)
        for (int b = 2; b <= 5; ++b) {
            const double c = 0.1 * (1 + a * b % 3);
            f.set_hermitian(0, {0, a, b}, cplx{c, 0.0});
            modes.push_back({c, double(a * a + b * b)});
            modes.push_back({c, double(a * a + b * b)});
        }
    double oracle = 0.0;
    for (auto [c1, k1] : modes)
        for (auto [c2, k2] : modes) oracle += c1 * c2 / (k1 + k2);
    const double b = besov_norm(f, {-1, kInfinity, 2, BesovMethod::heat});
    EXPECT_NEAR(b * b, oracle, 1e-2 * oracle);
}

TEST(Besov, DyadicSingleModeClosedForm) {
    auto g = make_grid({16, 16, 16});
    auto f = cosine_mode(g, 0, {0, 3, 4});
    DyadicProfile chi;
    const double c2 = chi.shell(5.0, 2), c3 = chi.shell(5.0, 3);
    const double want = std::max(c2 / 4.0, c3 / 8.0);
    EXPECT_NEAR(besov_norm(f, {-1, kInfinity, kInfinity, BesovMethod::dyadic}), want, 1e-12);
    const double want2 = std::sqrt(std::pow(c2 / 4.0, 2) + std::pow(c3 / 8.0, 2));
    EXPECT_NEAR(besov_norm(f, {-1, kInfinity, 2, BesovMethod::dyadic}), want2, 1e-12);
}

TEST(Besov, SpecValidation) {
    auto g = make_grid({8, 8, 8});
    auto f = cosine_mode(g, 0, {1, 1, 0});
    EXPECT_THROW(besov_norm(f, {0.5, 2, 2, BesovMethod::heat}), std::invalid_argument);
    EXPECT_NO_THROW(besov_norm(f, {0.5, 2, 2, BesovMethod::dyadic}));
    TimeGrid narrow{0.01, 1.0, 32, std::nullopt};
    EXPECT_THROW(besov_norm(f, {-1, kInfinity, kInfinity, BesovMethod::heat}, narrow), std::invalid_argument);
    TimeGrid sparse{1e-4, 100.0, 8, std::nullopt};
    EXPECT_THROW(besov_norm(f, {-1, kInfinity, kInfinity, BesovMethod::heat}, sparse), std::invalid_argument);
    SpectralVectorField m(g, false);
    m.set(0, {0, 0, 0}, cplx{1.0, 0.0});
    EXPECT_THROW(besov_norm(m, {-1, kInfinity, kInfinity, BesovMethod::dyadic}), std::invalid_argument);
}

TEST(Besov, TailBoundsAreSmall) {
    auto g = make_grid({8, 8, 8});
    auto f = cosine_mode(g, 2, {1, 1, 0});
    auto r = besov_norm_detailed(f, {-1, kInfinity, 2, BesovMethod::heat});
    EXPECT_LE(r.tail_bound, 1e-6 * r.value * r.value);
    EXPECT_LE(r.head, 1e-3 * r.value * r.value);
}

TEST(Besov, TimeGridAnchorIsContained) {
    TimeGrid tg{1e-3, 10.0, 32, 0.0123};
    auto t = tg.points();
    EXPECT_NE(std::find(t.begin(), t.end(), 0.0123), t.end());
    EXPECT_LE(t.front(), 1e-3);
    EXPECT_GE(t.back(), 10.0);
    for (std::size_t i = 1; i < t.size(); ++i) EXPECT_GT(t[i], t[i - 1]);
}

TEST(Besov, Homogeneity) {
    auto g = make_grid({8, 8, 8});
    std::mt19937_64 rng(test::kCorpusSeed + 24);
    auto f = random_field(g, 3, rng, true);
    auto h = -2.5 * f;
    for (BesovSpec spec : {BesovSpec{-1, kInfinity, kInfinity, BesovMethod::dyadic},
                           BesovSpec{-0.25, 4, 2, BesovMethod::dyadic}, BesovSpec{-1, 3, 2, BesovMethod::heat}}) {
        const double a = besov_norm(f, spec), b = besov_norm(h, spec);
        EXPECT_NEAR(b, 2.5 * a, 1e-12 * b);
    }
}

TEST(Besov, DyadicHeatEquivalenceOnFrozenCorpus) {
    auto g = make_grid({16, 16, 16});
    std::mt19937_64 rng(test::kCorpusSeed + 100);
    for (int i = 0; i < 20; ++i) {
        auto f = random_field(g, 2 + i % 5, rng, true);
        const double d = besov_norm(f, {-1, kInfinity, kInfinity, BesovMethod::dyadic});
        const double h = besov_norm(f, {-1, kInfinity, kInfinity, BesovMethod::heat});
        EXPECT_GE(d / h, kEquivalenceLo) << i;
        EXPECT_LE(d / h, kEquivalenceHi) << i;
        const double b4 = besov_norm(f, {-0.25, 4, 2, BesovMethod::dyadic});
        EXPECT_LE(d, kEmbedC1 * b4) << i;
        EXPECT_LE(b4, kEmbedC2 * lp_norm(f, 3)) << i;
    }
}

TEST(Besov, PlanarEmbeddingIntoL2) {
    std::mt19937_64 rng(test::kCorpusSeed + 101);
    for (int i = 0; i < 10; ++i) {
        const int lo = 1 + i % 4, hi = lo + 2 + i % 3;
        auto f = planar_field(lo, hi, rng);
        const double b = besov_norm(f, {-1, kInfinity, 2, BesovMethod::heat});
        EXPECT_LE(b, kEmbedC3 * f.l2()) << i;
    }
}

TEST(Bernstein, SingleModeRatio) {
    auto g = make_grid({16, 16, 16});
    auto f = cosine_mode(g, 0, {0, 3, 4});
    auto r = bernstein_check(f, {5, 5}, 2, 3, 2);
    const double l3 = std::cbrt(4.0 / (3.0 * std::numbers::pi));
    EXPECT_NEAR(r.ratio, l3 / (std::cbrt(5.0) * std::sqrt(0.5)), 1e-6);
    EXPECT_NEAR(bernstein_check(f, {5, 5}, 3, 3, 3).ratio, 1.0, 1e-15);
    EXPECT_THROW(bernstein_check(f, {1, 4}, 2, 3, 2), std::invalid_argument);
    EXPECT_THROW(bernstein_check(f, {1, 8}, 3, 2, 2), std::invalid_argument);
}

TEST(Bernstein, ScalingOfConstructedBand) {
    // Gaussian-weighted band [N, 2N]² at N and 2N.
    auto build = [](int N) {
        auto g = make_grid({4, 4 * N + 4, 4 * N + 4});
        SpectralVectorField f(g);
        for (int a = N; a <= 2 * N; ++a)
            for (int b = N; b <= 2 * N; ++b)
                f.set_hermitian(0, {0, a, b}, cplx{std::exp(double(a * a + b * b) / (N * N)), 0.0});
        return f;
    };
    const double kmax = [](int N) { return std::sqrt(8.0) * N; }(1);
    auto r1 = bernstein_check(build(6), {6, 6 * kmax}, 2, 3, 2);
    auto r2 = bernstein_check(build(12), {12, 12 * kmax}, 2, 3, 2);
    EXPECT_LE(std::max(r1.ratio / r2.ratio, r2.ratio / r1.ratio), std::cbrt(2.0));
}

TEST(Smoothing, ContractionAtEqualExponents) {
    auto fit = heat_smoothing_fit({1, 16}, 0, 2, 2, 8, 3);
    EXPECT_NEAR(fit.exponent, 0.0, 0.1);
}

TEST(Smoothing, LaplacianRateInL2) {
    auto fit = heat_smoothing_fit({1, 16}, 2, 2, 2, 16, 4);
    EXPECT_NEAR(fit.expected, -1.0, 0.0);
    EXPECT_NEAR(fit.exponent, -1.0, 0.1);
}

TEST(Smoothing, L2ToLinfRate) {
    auto fit = heat_smoothing_fit({1, 16}, 0, 2, kInfinity, 16, 5);
    EXPECT_NEAR(fit.exponent, -0.75, 0.1);
}

TEST(Smoothing, FractionalDerivativeInL3) {
    auto fit = heat_smoothing_fit({1, 12}, 4.0 / 3.0, 3, 3, 8, 6, 10);
    EXPECT_LE(fit.exponent, -2.0 / 3.0 + 0.1);
}

TEST(Smoothing, RejectsQBelowP) {
    EXPECT_THROW(heat_smoothing_fit({1, 16}, 0, 3, 2, 4), std::invalid_argument);
}
