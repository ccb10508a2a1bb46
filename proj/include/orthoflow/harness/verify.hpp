/// @file verify.hpp
/// @brief Property suites run by `orthoflow verify` and the acceptance binary.
#pragma once

#include <functional>
#include <numbers>
#include <random>

#include "orthoflow/flows/forcing.hpp"
#include "orthoflow/norms/besov.hpp"
#include "orthoflow/solver/evolution.hpp"

namespace orthoflow::harness {

using spectral::FourierGrid;
using spectral::SpectralVectorField;

struct CheckResult {
    std::string suite, name;
    bool passed = false;
    double measured = 0.0, tolerance = 0.0;
};

struct SuiteReport {
    std::uint64_t seed = 0;
    std::vector<CheckResult> checks;
    bool passed() const {
        return std::all_of(checks.begin(), checks.end(), [](const auto& c) { return c.passed; });
    }
};

/// Real, mean-zero field with Gaussian coefficients on |kₐ| ≤ band.
inline SpectralVectorField random_field(const FourierGrid& g, int band, std::mt19937_64& rng, bool divergence_free) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    SpectralVectorField f(g, true);
    for (int c = 0; c < 3; ++c)
        for (int k1 = 0; k1 <= band; ++k1)
            for (int k2 = -band; k2 <= band; ++k2)
                for (int k3 = -band; k3 <= band; ++k3) {
                    if (k1 == 0 && (k2 < 0 || (k2 == 0 && k3 <= 0))) continue;
                    f.set_hermitian(c, {k1, k2, k3}, cplx{gauss(rng), gauss(rng)});
                }
    return divergence_free ? spectral::leray_project(f) : f;
}

namespace detail {

inline void record(SuiteReport& r, const char* suite, const std::string& name, double measured, double tol) {
    r.checks.push_back({suite, name, measured <= tol, measured, tol});
}

inline double rel_diff(const SpectralVectorField& a, const SpectralVectorField& b) {
    return (a - b).l2() / std::max(b.l2(), 1e-300);
}

}  // namespace detail

/// Leray idempotence, divergence annihilation, semigroup property, dyadic
/// partition of unity and Parseval on seeded random fields.
inline void invariant_suite(SuiteReport& r, std::array<int, 3> dims = {64, 64, 64}, int fields = 3) {
    const char* S = "invariants";
    const auto g = spectral::make_grid(dims);
    std::mt19937_64 rng(r.seed);
    spectral::FftBuffer buf;
    for (int i = 0; i < fields; ++i) {
        const int band = std::min({8 + 4 * i, dims[0] / 3, dims[1] / 3, dims[2] / 3});
        const auto f = random_field(g, band, rng, false);
        const auto P = spectral::leray_project(f);
        const std::string tag = "[" + std::to_string(i) + "]";
        detail::record(r, S, "leray idempotent" + tag, detail::rel_diff(spectral::leray_project(P), P), 1e-12);
        detail::record(r, S, "leray annihilates divergence" + tag, spectral::divergence_residual(P), 1e-10);
        const double s = 0.013 * (i + 1), t = 0.029;
        detail::record(r, S, "heat semigroup" + tag,
                       detail::rel_diff(spectral::heat_semigroup(spectral::heat_semigroup(f, s), t),
                                        spectral::heat_semigroup(f, s + t)),
                       1e-12);
        const auto x = spectral::sample_components(f, g.dims(), buf);
        double ms = 0.0;
        for (const auto& c : x)
            for (double v : c) ms += v * v;
        ms /= double(spectral::physical_size(g.dims()));
        detail::record(r, S, "parseval" + tag, std::abs(std::sqrt(ms) - f.l2()) / f.l2(), 1e-10);
    }
    const spectral::DyadicProfile chi;
    double worst = 0.0;
    for (int i = 0; i <= 4000; ++i) {
        const double rr = std::exp(std::log(0.75) + i * (std::log(4096.0) - std::log(0.75)) / 4000);
        const auto [lo, hi] = spectral::DyadicProfile::contributing_shells(rr, rr);
        double sum = 0.0;
        for (int j = lo; j <= hi; ++j) sum += chi.shell(rr, j);
        worst = std::max(worst, std::abs(sum - 1.0));
    }
    detail::record(r, S, "dyadic partition of unity", worst, 1e-12);
}

/// Closed forms: single-mode L³ and heat semigroup, the heat-method B⁻¹∞,∞ of a
/// cosine, Q(a,a) = 2P(a·∇a), and one-step heat exactness of the NS step.
inline void oracle_suite(SuiteReport& r) {
    const char* S = "oracles";
    const auto g = spectral::make_grid({16, 16, 16});
    auto cosine = [&](int c, Wavevector k, double amp) {
        SpectralVectorField f(g, true);
        f.set_hermitian(c, k, cplx{0.5 * amp, 0.0});
        return f;
    };
    const auto c1 = cosine(0, {0, 3, 4}, 1.7);
    const double l3 = std::cbrt(4.0 / (3.0 * std::numbers::pi));
    detail::record(r, S, "L3 of a cosine", std::abs(norms::lp_norm(c1, 3.0) - 1.7 * l3) / (1.7 * l3), 1e-6);
    detail::record(r, S, "heat multiplier of a cosine",
                   detail::rel_diff(spectral::heat_semigroup(c1, 0.01), std::exp(-0.25) * c1), 1e-14);
    const auto c3 = cosine(2, {1, 1, 0}, 2.0);
    const norms::BesovSpec b{-1.0, norms::kInfinity, norms::kInfinity, norms::BesovMethod::heat};
    const double want = 2.0 * std::sqrt(0.25) * std::exp(-0.5);
    detail::record(r, S, "B-1inf,inf of cos(x1+x2)", std::abs(norms::besov_norm(c3, b) - want) / want, 1e-6);

    std::mt19937_64 rng(r.seed + 1);
    const auto big = spectral::make_grid({32, 32, 32});
    const auto a = random_field(big, 5, rng, true);
    const auto q = flows::bilinear_Q(a, a);
    spectral::FftBuffer buf;
    const auto x = spectral::sample_components(a, big.dims(), buf);
    std::array<std::array<std::vector<double>, 3>, 3> da;
    for (int j = 0; j < 3; ++j)
        da[j] = spectral::sample_components(spectral::derivative(a, axis_from_int(j + 1)), big.dims(), buf);
    // (a·∇a)_l = Σ_j a_j ∂_j a_l, sampled and transformed back.
    std::array<std::vector<double>, 3> adv;
    for (int l = 0; l < 3; ++l) {
        adv[l].assign(x[l].size(), 0.0);
        for (int j = 0; j < 3; ++j)
            for (std::size_t i = 0; i < adv[l].size(); ++i) adv[l][i] += x[j][i] * da[j][l][i];
    }
    SpectralVectorField A(big, true);
    for (int l = 0; l < 3; l += 2) {
        std::vector<cplx> ha(big.size()), hb(big.size());
        spectral::from_physical_pair(adv[l], l + 1 < 3 ? std::span<const double>(adv[l + 1]) : std::span<const double>{},
                                     big.dims(), big, ha, l + 1 < 3 ? std::span<cplx>(hb) : std::span<cplx>{}, buf);
        A.set_component(l, std::move(ha));
        if (l + 1 < 3) A.set_component(l + 1, std::move(hb));
    }
    A = spectral::leray_project(A);
    spectral::dealias_in_place(A);
    detail::record(r, S, "Q(a,a) = 2P(a.grad a)", detail::rel_diff(q, 2.0 * A), 1e-12);

    SpectralVectorField shear(big, true);
    shear.set_hermitian(0, {0, 2, 3}, cplx{0.4, 0.1});
    shear.set_hermitian(0, {0, 5, -1}, cplx{-0.2, 0.3});
    solver::NsStepper st(big, 0.01, false);
    detail::record(r, S, "single-component NS step is the heat step",
                   detail::rel_diff(st.step(shear, 0.0), spectral::heat_semigroup(shear, 0.01)), 1e-14);
}

inline SuiteReport run_suite(const std::string& which, std::uint64_t seed) {
    if (which != "invariants" && which != "oracles" && which != "all")
        throw std::invalid_argument("unknown suite \"" + which + "\" (invariants|oracles|all)");
    SuiteReport r;
    r.seed = seed;
    if (which != "oracles") invariant_suite(r);
    if (which != "invariants") oracle_suite(r);
    return r;
}

}  // namespace orthoflow::harness
