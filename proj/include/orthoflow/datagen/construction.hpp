/// @file construction.hpp
/// @brief Frequency-orthogonal initial data at scales N and N^{1+ε}, and the
/// validator for the smallness hypotheses they are meant to satisfy.
///
/// Component 1 lives on k₁ = 0 with (k₂,k₃) ∈ ±[N,2N]², component 2 on k₂ = 0
/// with (k₁,k₃) ∈ ±[M,2M]², M = ⌈N^{1+ε}⌉, and component 3 is a single
/// mode on ±(1,1,0). Complex coefficients a_m of the model data are split
/// as a_m/√2 over ±m, so the fields are real and Σ a_m² is the squared L² norm.
#pragma once

#include <cmath>
#include <optional>
#include <sstream>
#include <string>

#include "orthoflow/norms/lp.hpp"
#include "orthoflow/spectral/operators.hpp"

namespace orthoflow::datagen {

using spectral::FourierGrid;
using spectral::SpectralVectorField;

/// Smallest integer ≥ x, treating x within 1e-9 relative of an integer as
/// that integer (pow(16, 1.25) must give 32, not 33).
inline long guarded_ceil(double x) {
    const double r = std::round(x);
    if (std::abs(x - r) <= 1e-9 * std::max(1.0, std::abs(x))) return static_cast<long>(r);
    return static_cast<long>(std::ceil(x));
}

/// How strictly the two band scales must be separated.
enum class BandPolicy {
    separated,  // 2N ≤ ⌈N^{1+ε}⌉: the radial bands meet at most at an endpoint
    planar,     // only plane-disjointness; supports never meet since k₁ = 0 vs k₂ = 0
};

struct ConstructionParams {
    int N = 16;
    double eps = 0.25;
    double delta = 0.03;
    double C = 1.0;
    BandPolicy bands = BandPolicy::separated;

    bool operator==(const ConstructionParams&) const = default;

    static double default_delta(double eps) { return std::min(eps / 8.0, 0.05); }

    /// ⌈N^{1+ε}⌉.
    int M() const { return static_cast<int>(guarded_ceil(std::pow(double(N), 1.0 + eps))); }

    /// Squared-L² targets per component: C⁻¹ln N, C⁻¹ln N^{1+ε}, C⁻¹δ ln N^{1+ε}.
    std::array<double, 3> l2_targets() const {
        const double lnN = std::log(double(N));
        return {lnN / C, (1.0 + eps) * lnN / C, delta * (1.0 + eps) * lnN / C};
    }

    /// Target L² bound (C⁻¹δ ln N^{1+ε})^{1/2}, shared by all components.
    double l2_bound() const { return std::sqrt(delta * (1.0 + eps) * std::log(double(N)) / C); }

    /// L³ bound on component 3: C⁻¹ N^{1/3−δ(1+ε)} (ln N^{1+ε})^{-1/2}.
    double l3_bound() const {
        return std::pow(double(N), 1.0 / 3.0 - delta * (1.0 + eps)) / (C * std::sqrt((1.0 + eps) * std::log(double(N))));
    }

    void validate() const {
        if (N < 2) throw std::invalid_argument("N must be >= 2");
        if (!(eps > 0.0) || !std::isfinite(eps)) throw std::invalid_argument("eps must be > 0");
        if (!(C > 0.0) || !std::isfinite(C)) throw std::invalid_argument("C must be > 0");
        if (!(delta > 0.0)) throw std::invalid_argument("delta must be > 0");
        if (!(delta < eps / 4.0)) {
            std::ostringstream os;
            os << "delta must satisfy delta < eps/4 (delta=" << delta << ", eps/4=" << eps / 4.0 << ")";
            throw std::invalid_argument(os.str());
        }
        if (bands == BandPolicy::separated && 2 * N > M()) {
            std::ostringstream os;
            os << "bands [" << N << "," << 2 * N << "] and [" << M() << "," << 2 * M() << "] overlap (2N=" << 2 * N
               << " > ceil(N^(1+eps))=" << M() << ")";
            throw std::invalid_argument(os.str());
        }
    }
};

/// Rectangular support: |k_a| ∈ [lo, hi] on the two active axes, k = 0 on `flat`.
struct Band {
    int flat = 0;
    int lo = 0, hi = 0;
};

struct ComponentBuild {
    SpectralVectorField field;
    double equalized = 0.0;  // A (or B): a_m e^{-|m|²/s²}
    double anchor_t = 0.0;   // s⁻², the equalization time
    Band band;
};

/// Grid just large enough for a field with per-axis max modes `m` (flat axes get dim 4).
inline FourierGrid compact_grid(const std::array<int, 3>& m) {
    std::array<int, 3> d{};
    for (int a = 0; a < 3; ++a) d[a] = m[a] == 0 ? 4 : std::max(4, 2 * m[a] + 2);
    return spectral::make_grid(d);
}

struct ComponentSpectrum {
    spectral::SparseSpectrum spectrum;
    double equalized = 0.0;
    double anchor_t = 0.0;
    Band band;
};

/// Sparse coefficients of the component on axis 1 (scale N, plane k₁ = 0) or
/// axis 2 (scale M, plane k₂ = 0); usable where the dense grid would not fit.
inline ComponentSpectrum component_spectrum(int axis, const ConstructionParams& p) {
    p.validate();
    if (axis != 1 && axis != 2) throw std::invalid_argument("build_component: axis must be 1 or 2");
    const int c = axis - 1;
    const int lo = axis == 1 ? p.N : p.M();
    const int hi = 2 * lo;
    // Scale s: N or N^{1+ε} (unrounded), anchor t = s⁻².
    const double s2 = axis == 1 ? double(p.N) * p.N : std::pow(double(p.N), 2.0 * (1.0 + p.eps));
    const double budget = p.l2_targets()[c];
    const int other = axis == 1 ? 1 : 0;  // first active axis; k₃ is the second
    ComponentSpectrum out{{}, 0.0, 1.0 / s2, Band{c, lo, hi}};
    // Σ e^{2|m|²/s²} over the band, shifted by the largest exponent for range safety.
    const double shift = 2.0 * 2.0 * hi * hi / s2;
    double sum = 0.0;
    for (int a = lo; a <= hi; ++a)
        for (int b = lo; b <= hi; ++b) sum += std::exp(2.0 * (double(a) * a + double(b) * b) / s2 - shift);
    // A = sqrt(budget / Σ e^{2|m|²/s²}); a_m = A e^{|m|²/s²}.
    const double A_scaled = std::sqrt(budget / sum);  // = A · e^{shift/2}
    if (!std::isfinite(A_scaled) || !(A_scaled > 0.0)) throw std::logic_error("non-finite equalized coefficient");
    out.equalized = A_scaled * std::exp(-0.5 * shift);
    auto& sp = out.spectrum;
    const std::size_t n = 2 * static_cast<std::size_t>(hi - lo + 1) * static_cast<std::size_t>(hi - lo + 1);
    sp.k.reserve(n);
    sp.k2.reserve(n);
    sp.c[c].reserve(n);
    for (int a = lo; a <= hi; ++a)
        for (int b = lo; b <= hi; ++b) {
            const double m2 = double(a) * a + double(b) * b;
            const double am = A_scaled * std::exp(m2 / s2 - 0.5 * shift);
            Wavevector k{0, 0, 0};
            k[other] = a;
            k[2] = b;
            for (int sign : {1, -1}) {
                sp.k.push_back({sign * k[0], sign * k[1], sign * k[2]});
                sp.k2.push_back(m2);
                sp.c[c].push_back(cplx{am / std::sqrt(2.0), 0.0});
            }
        }
    sp.finish();
    return out;
}

/// Dense version of component_spectrum on its compact grid.
inline ComponentBuild build_component(int axis, const ConstructionParams& p) {
    auto cs = component_spectrum(axis, p);
    ComponentBuild out{SpectralVectorField(compact_grid(cs.spectrum.content)), cs.equalized, cs.anchor_t, cs.band};
    const int c = axis - 1;
    auto dst = out.field.component_mut(c);
    for (std::size_t m = 0; m < cs.spectrum.size(); ++m) dst[*out.field.grid().index_of(cs.spectrum.k[m])] = cs.spectrum.c[c][m];
    return out;
}

/// Component 3: √2·(C⁻¹δ ln N^{1+ε})^{1/2}·cos(x₁ + x₂) in velocity slot 3.
inline SpectralVectorField build_component3(const ConstructionParams& p) {
    p.validate();
    const double c = std::sqrt(p.l2_targets()[2]);
    SpectralVectorField f(compact_grid({1, 1, 0}));
    f.set_hermitian(2, {1, 1, 0}, cplx{c / std::sqrt(2.0), 0.0});
    return f;
}

struct OrthogonalData {
    std::array<SpectralVectorField, 3> components;
    std::array<Band, 3> bands;
    ConstructionParams params;
    double A = 0.0, B = 0.0;

    /// Per-axis max of the component grids.
    FourierGrid common_grid() const {
        std::array<int, 3> d{4, 4, 4};
        for (const auto& f : components)
            for (int a = 0; a < 3; ++a) d[a] = std::max(d[a], f.grid().dim(a));
        return spectral::make_grid(d);
    }

    /// Component i regridded onto g.
    SpectralVectorField component_on(int i, const FourierGrid& g) const { return spectral::regrid(components[i], g); }

    /// u₀ = Σ u₀ⁱ on g (defaults to the common grid).
    SpectralVectorField sum(std::optional<FourierGrid> g = std::nullopt) const {
        const FourierGrid gg = g ? *g : common_grid();
        SpectralVectorField u(gg);
        for (int i = 0; i < 3; ++i) u += component_on(i, gg);
        return u;
    }

    /// Splits a field whose velocity slot i holds component i.
    static OrthogonalData from_sum(const SpectralVectorField& u, const ConstructionParams& p) {
        OrthogonalData d;
        d.params = p;
        for (int i = 0; i < 3; ++i) {
            SpectralVectorField f(u.grid(), u.mean_zero());
            if (u.has_component(i)) f.set_component(i, std::vector<cplx>(u.component(i).begin(), u.component(i).end()));
            d.components[i] = std::move(f);
        }
        d.bands = {Band{0, p.N, 2 * p.N}, Band{1, p.M(), 2 * p.M()}, Band{2, 1, 1}};
        return d;
    }
};

inline OrthogonalData build_data(const ConstructionParams& p) {
    p.validate();
    OrthogonalData d;
    d.params = p;
    auto c1 = build_component(1, p);
    auto c2 = build_component(2, p);
    d.components = {std::move(c1.field), std::move(c2.field), build_component3(p)};
    d.bands = {c1.band, c2.band, Band{2, 1, 1}};
    d.A = c1.equalized;
    d.B = c2.equalized;
    return d;
}

// ---------------------------------------------------------------------------

struct HypothesisEntry {
    std::string id;    // "a".."f", or "budget"
    std::string name;
    bool passed = false;
    double measured = 0.0;
    double bound = 0.0;
    std::string detail;
};

struct ValidationReport {
    std::vector<HypothesisEntry> entries;

    bool all_passed() const {
        return std::all_of(entries.begin(), entries.end(), [](const auto& e) { return e.passed; });
    }
    const HypothesisEntry* find(const std::string& id) const {
        for (const auto& e : entries)
            if (e.id == id) return &e;
        return nullptr;
    }
    std::vector<std::string> failures() const {
        std::vector<std::string> out;
        for (const auto& e : entries)
            if (!e.passed) out.push_back(e.id);
        return out;
    }
};

namespace detail {

template <class Fn>
void for_each_support(const SpectralVectorField& f, Fn&& fn) {
    const auto& g = f.grid();
    spectral::for_each_mode(g, [&](std::size_t i, const Wavevector& k, bool nyq) {
        if (nyq) return;
        for (int c = 0; c < 3; ++c)
            if (f.has_component(c) && f.component(c)[i] != cplx{}) {
                fn(k, c);
                return;
            }
    });
}

inline std::string fmt(double v) {
    std::ostringstream os;
    os.precision(10);
    os << v;
    return os.str();
}

}  // namespace detail

/// Checks (a) disjoint supports, (b) band containment, (c) plane constraints
/// and single velocity slot, (d) mean zero, (e) L² bounds, (f) the L³ bound on
/// component 3. Also reports whether the construction budgets are met.
inline ValidationReport validate_hypotheses(const OrthogonalData& d) {
    ValidationReport r;
    const auto& p = d.params;
    const FourierGrid g = d.common_grid();

    // (a)
    {
        std::vector<std::uint8_t> owner(g.size(), 0);
        long overlaps = 0;
        for (int i = 0; i < 3; ++i)
            detail::for_each_support(d.components[i], [&](const Wavevector& k, int) {
                auto& o = owner[*g.index_of(k)];
                if (o != 0 && o != i + 1) ++overlaps;
                o = static_cast<std::uint8_t>(i + 1);
            });
        r.entries.push_back({"a", "disjoint frequency supports", overlaps == 0, double(overlaps), 0.0,
                             std::to_string(overlaps) + " shared wavevectors"});
    }
    // (b) components 1, 2: |k_a| in their band on the active axes.
    {
        long outside = 0;
        for (int i = 0; i < 2; ++i) {
            const int lo = i == 0 ? p.N : p.M(), hi = 2 * lo;
            detail::for_each_support(d.components[i], [&](const Wavevector& k, int) {
                for (int a = 0; a < 3; ++a) {
                    if (a == i) continue;
                    if (std::abs(k[a]) < lo || std::abs(k[a]) > hi) {
                        ++outside;
                        return;
                    }
                }
            });
        }
        r.entries.push_back({"b", "band containment at scales N and N^(1+eps)", outside == 0, double(outside), 0.0,
                             "bands [" + std::to_string(p.N) + "," + std::to_string(2 * p.N) + "] and [" +
                                 std::to_string(p.M()) + "," + std::to_string(2 * p.M()) + "]; " +
                                 std::to_string(outside) + " modes outside"});
    }
    // (c)
    {
        long bad = 0;
        for (int i = 0; i < 3; ++i) {
            for (int c = 0; c < 3; ++c)
                if (c != i && d.components[i].has_component(c))
                    for (const auto& v : d.components[i].component(c))
                        if (v != cplx{}) {
                            ++bad;
                            break;
                        }
            detail::for_each_support(d.components[i], [&](const Wavevector& k, int) {
                if (k[i] != 0) ++bad;
            });
        }
        r.entries.push_back({"c", "plane constraints k_i = 0 and single velocity component", bad == 0, double(bad), 0.0,
                             std::to_string(bad) + " violations"});
    }
    // (d)
    {
        double zero = 0.0;
        for (int i = 0; i < 3; ++i)
            for (int c = 0; c < 3; ++c) zero = std::max(zero, std::abs(d.components[i].at(c, {0, 0, 0})));
        r.entries.push_back({"d", "mean zero", zero == 0.0, zero, 0.0, "max |zero-mode coefficient|"});
    }
    // (e)
    {
        const double bound = p.l2_bound();
        for (int i = 0; i < 3; ++i) {
            const double v = d.components[i].l2();
            r.entries.push_back({"e", "||u0^" + std::to_string(i + 1) + "||_L2 <= (C^-1 delta log N^(1+eps))^(1/2)",
                                 v <= bound * (1.0 + 1e-12), v, bound,
                                 detail::fmt(v) + (v <= bound * (1.0 + 1e-12) ? " <= " : " > ") + detail::fmt(bound)});
        }
    }
    // (f)
    {
        const double v = norms::lp_norm(d.components[2], 3.0);
        const double bound = p.l3_bound();
        r.entries.push_back({"f", "||u0^3||_L3 <= C^-1 N^(1/3-delta(1+eps)) (log N^(1+eps))^(-1/2)", v <= bound, v,
                             bound, detail::fmt(v) + (v <= bound ? " <= " : " > ") + detail::fmt(bound)});
    }
    // Construction budgets (informational).
    {
        const auto t = p.l2_targets();
        double worst = 0.0;
        for (int i = 0; i < 3; ++i) {
            const double v = d.components[i].l2();
            worst = std::max(worst, std::abs(v * v - t[i]) / t[i]);
        }
        r.entries.push_back({"budget", "construction L2 budgets met", worst <= 1e-12, worst, 1e-12,
                             "max relative defect of ||u0^i||^2 against its target"});
    }
    return r;
}

}  // namespace orthoflow::datagen
