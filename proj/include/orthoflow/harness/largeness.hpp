/// @file largeness.hpp
/// @brief ‖u₀ⁱ‖_{B⁻¹∞,∞} of the constructed components over a range of N.
///
/// Components 1 and 2 are evaluated from their sparse planar spectra with the
/// heat method. Past kSparseModeLimit modes the equal-phase structure is used
/// instead: every coefficient is A·e^{|m|²/s²}/√2 at ±m with m on a square
/// band, so ‖e^{tΔ}u‖_∞ = √2·A·(Σ_{a=lo}^{hi} e^{(1/s² − t)a²})².
#pragma once

#include <optional>
#include <tuple>

#include "orthoflow/datagen/construction.hpp"
#include "orthoflow/norms/besov.hpp"

namespace orthoflow::harness {

inline constexpr std::size_t kSparseModeLimit = std::size_t(1) << 18;
inline constexpr int kMaxThresholdN = 1 << 20;

struct LargenessRow {
    int N = 0;
    std::array<double, 3> b{};
    std::array<std::string, 3> method;
};

struct LargenessTable {
    datagen::ConstructionParams base;
    std::vector<LargenessRow> rows;
    bool column1_increasing = true;
    double alpha = 0.0;         // least-squares fit column1 ≈ α·(ln N)^{1/2}
    double fit_residual = 0.0;  // max relative deviation from the fit
    std::optional<int> threshold_N;
    std::optional<double> threshold;
};

namespace detail {

// Σ_{a=lo}^{hi} e^{c·a²}, c ≤ 4/lo² here, so no overflow.
inline double band_sum(int lo, int hi, double c) {
    double s = 0.0;
    for (int a = lo; a <= hi; ++a) s += std::exp(c * double(a) * a);
    return s;
}

inline double separable_largeness(int axis, const datagen::ConstructionParams& p) {
    const int lo = axis == 1 ? p.N : p.M();
    const int hi = 2 * lo;
    const double s2 = axis == 1 ? double(p.N) * p.N : std::pow(double(p.N), 2.0 * (1.0 + p.eps));
    const double budget = p.l2_targets()[axis - 1];
    const double A = std::sqrt(budget) / band_sum(lo, hi, 2.0 / s2);
    auto sup = [&](double t) {
        const double s = band_sum(lo, hi, 1.0 / s2 - t);
        return std::sqrt(2.0) * A * s * s;
    };
    const double kmin2 = 2.0 * lo * lo, kmax2 = 2.0 * hi * hi;
    const auto tg = norms::TimeGrid::covering(kmin2, kmax2, 32.0);
    const auto ts = tg.points();
    auto g = [&](double t) { return std::sqrt(t) * sup(t); };
    std::size_t best = 0;
    double v = 0.0;
    for (std::size_t i = 0; i < ts.size(); ++i) {
        const double gi = g(ts[i]);
        if (gi > v) v = gi, best = i;
    }
    if (best > 0 && best + 1 < ts.size()) {
        const auto [lt, gv] =
            norms::golden_max([&](double lt) { return g(std::exp(lt)); }, std::log(ts[best - 1]), std::log(ts[best + 1]));
        (void)lt;
        v = std::max(v, gv);
    }
    return v;
}

}  // namespace detail

inline const norms::BesovSpec& largeness_spec() {
    static const norms::BesovSpec s{-1.0, norms::kInfinity, norms::kInfinity, norms::BesovMethod::heat};
    return s;
}

/// ‖u₀ⁱ‖_{B⁻¹∞,∞}, i = 1, 2, 3 (1-based), with the evaluation path used.
inline std::pair<double, std::string> component_largeness(int i, const datagen::ConstructionParams& p) {
    p.validate();
    if (i == 3) {
        const auto s = spectral::SparseSpectrum::from(datagen::build_component3(p));
        return {norms::besov_norm_detailed(s, largeness_spec()).value, "heat"};
    }
    const long lo = i == 1 ? p.N : p.M();
    const std::size_t modes = 2 * static_cast<std::size_t>(lo + 1) * static_cast<std::size_t>(lo + 1);
    if (modes > kSparseModeLimit) return {detail::separable_largeness(i, p), "heat-separable"};
    const auto cs = datagen::component_spectrum(i, p);
    return {norms::besov_norm_detailed(cs.spectrum, largeness_spec()).value, "heat"};
}

/// Smallest N = 4^k (k ≥ 1, N ≤ kMaxThresholdN) with column 1 above M.
inline std::optional<int> largeness_threshold(double M, const datagen::ConstructionParams& base) {
    for (long N = 4; N <= kMaxThresholdN; N *= 4) {
        auto p = base;
        p.N = static_cast<int>(N);
        p.bands = datagen::BandPolicy::planar;
        if (component_largeness(1, p).first > M) return p.N;
    }
    return std::nullopt;
}

inline LargenessTable largeness_table(const std::vector<int>& Ns, const datagen::ConstructionParams& base,
                                      std::optional<double> threshold = std::nullopt) {
    LargenessTable t;
    t.base = base;
    for (int N : Ns) {
        auto p = base;
        p.N = N;
        LargenessRow r;
        r.N = N;
        for (int i = 0; i < 3; ++i) std::tie(r.b[i], r.method[i]) = component_largeness(i + 1, p);
        t.rows.push_back(r);
    }
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t k = 0; k < t.rows.size(); ++k) {
        const double x = std::sqrt(std::log(double(t.rows[k].N)));
        sxy += x * t.rows[k].b[0];
        sxx += x * x;
        if (k > 0 && !(t.rows[k].b[0] > t.rows[k - 1].b[0])) t.column1_increasing = false;
    }
    t.alpha = sxx > 0.0 ? sxy / sxx : 0.0;
    for (const auto& r : t.rows) {
        const double fit = t.alpha * std::sqrt(std::log(double(r.N)));
        t.fit_residual = std::max(t.fit_residual, std::abs(r.b[0] - fit) / r.b[0]);
    }
    if (threshold) {
        t.threshold = threshold;
        t.threshold_N = largeness_threshold(*threshold, base);
    }
    return t;
}

}  // namespace orthoflow::harness
