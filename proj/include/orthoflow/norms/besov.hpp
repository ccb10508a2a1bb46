/// @file besov.hpp
/// @brief Littlewood–Paley projections and Besov norms, by dyadic shells or
/// through the heat semigroup.
///
/// Dyadic:  ‖f‖ = ‖ 2^{js} ‖Pⱼ f‖_p ‖_{ℓ^q_j}, Pⱼ the multiplier χ(|k|/2ʲ).
/// Heat:    ‖f‖ = ‖ t^{-s/2} ‖e^{tΔ} f‖_p ‖_{L^q(ℝ₊, dt/t)}, valid for s < 0.
#pragma once

#include <algorithm>
#include <string>

#include "orthoflow/norms/lp.hpp"
#include "orthoflow/norms/time_grid.hpp"
#include "orthoflow/spectral/dyadic.hpp"
#include "orthoflow/spectral/operators.hpp"

namespace orthoflow::norms {

using spectral::DyadicProfile;

enum class BesovMethod { dyadic, heat };

inline const char* to_string(BesovMethod m) { return m == BesovMethod::dyadic ? "dyadic" : "heat"; }

struct BesovSpec {
    double s = -1.0;
    double p = kInfinity;
    double q = kInfinity;
    BesovMethod method = BesovMethod::heat;

    bool operator==(const BesovSpec&) const = default;

    void validate() const {
        if (!(p >= 1.0) || !(q >= 1.0)) throw std::invalid_argument("BesovSpec needs p, q in [1, inf]");
        if (method == BesovMethod::heat && !(s < 0.0))
            throw std::invalid_argument("heat-method Besov norm requires s < 0");
    }
};

struct BesovResult {
    double value = 0.0;
    double head = 0.0;        // heat method: contribution or bound for t < t_min
    double tail_bound = 0.0;  // heat method: bound on the part beyond t_max
    double argmax_t = 0.0;    // heat method, q = ∞: maximizing time
    int evaluations = 0;
};

/// Pⱼ f.
inline SpectralVectorField littlewood_paley(const SpectralVectorField& f, int j, const DyadicProfile& profile = {}) {
    return spectral::detail::apply_scalar_multiplier(f, [&](const Wavevector& k) {
        return cplx{profile.shell(std::sqrt(spectral::norm2(k)), j), 0.0};
    });
}

namespace detail {

inline void require_mean_zero(const SparseSpectrum& f) {
    for (std::size_t m = 0; m < f.size(); ++m)
        if (f.k2[m] == 0.0)
            for (const auto& v : f.c)
                if (!v.empty() && v[m] != cplx{}) throw std::invalid_argument("besov_norm requires a mean-zero field");
}

inline BesovResult besov_dyadic(const SparseSpectrum& f, const BesovSpec& spec, const DyadicProfile& profile) {
    BesovResult r;
    const auto [jlo, jhi] = DyadicProfile::contributing_shells(std::sqrt(f.kmin2), std::sqrt(f.kmax2));
    double acc = 0.0;
    for (int j = jlo; j <= jhi; ++j) {
        auto shell = f.multiplied([&](double k2) { return profile.shell(std::sqrt(k2), j); });
        if (shell.empty()) continue;
        const double term = std::pow(2.0, j * spec.s) * lp_norm(shell, spec.p);
        ++r.evaluations;
        if (std::isinf(spec.q)) acc = std::max(acc, term);
        else acc += std::pow(term, spec.q);
    }
    r.value = std::isinf(spec.q) ? acc : std::pow(acc, 1.0 / spec.q);
    return r;
}

inline double l1_at(const SparseSpectrum& f, double t) {
    auto l1 = f.weighted_l1([t](double k2) { return std::exp(-t * k2); });
    return std::sqrt(l1[0] * l1[0] + l1[1] * l1[1] + l1[2] * l1[2]);
}

inline BesovResult besov_heat(const SparseSpectrum& f, const BesovSpec& spec, const TimeGrid& tg) {
    tg.validate();
    if (tg.t_min > 0.1 / f.kmax2 || tg.t_max < 10.0 / f.kmin2 || tg.points_per_decade < 32.0)
        throw std::invalid_argument("time grid does not cover the support scales [0.1/k_max^2, 10/k_min^2] "
                                    "at >= 32 points per decade");
    BesovResult r;
    const double a = -0.5 * spec.s;  // > 0
    auto g = [&](double t) { return std::pow(t, a) * heat_lp_norm(f, t, spec.p); };
    const auto ts = tg.points();
    std::vector<double> gs(ts.size());
    for (std::size_t i = 0; i < ts.size(); ++i) gs[i] = g(ts[i]);
    r.evaluations = static_cast<int>(ts.size());
    const double tmax = ts.back(), tmin = ts.front();
    const double Lq_tail = l1_at(f, tmax);
    if (std::isinf(spec.q)) {
        const auto it = std::max_element(gs.begin(), gs.end());
        const std::size_t i = static_cast<std::size_t>(it - gs.begin());
        r.value = *it;
        r.argmax_t = ts[i];
        if (i > 0 && i + 1 < ts.size()) {
            auto [lt, v] = golden_max([&](double lt) { return g(std::exp(lt)); }, std::log(ts[i - 1]),
                                      std::log(ts[i + 1]));
            r.evaluations += 80;
            if (v > r.value) {
                r.value = v;
                r.argmax_t = std::exp(lt);
            }
        }
        r.head = std::pow(tmin, a) * l1_at(f, 0.0);
        const double tpk = std::max(tmax, a / f.kmin2);
        r.tail_bound = std::pow(tpk, a) * std::exp(-(tpk - tmax) * f.kmin2) * Lq_tail;
        return r;
    }
    const double q = spec.q;
    std::vector<double> gq(gs.size());
    for (std::size_t i = 0; i < gs.size(); ++i) gq[i] = std::pow(gs[i], q);
    const double body = integrate_dlogt(ts, gq);
    r.head = gq.front() / (a * q);
    const double e = a * q - 1.0, b = q * f.kmin2;
    const double denom = e <= 0.0 ? b : b - e / tmax;
    r.tail_bound = denom > 0.0 ? std::pow(tmax, e) * std::pow(Lq_tail, q) / denom : kInfinity;
    r.value = std::pow(body + r.head, 1.0 / q);
    return r;
}

}  // namespace detail

inline BesovResult besov_norm_detailed(const SparseSpectrum& f, const BesovSpec& spec,
                                       std::optional<TimeGrid> tgrid = std::nullopt,
                                       const DyadicProfile& profile = {}) {
    spec.validate();
    detail::require_mean_zero(f);
    if (f.empty() || f.kmax2 == 0.0) return {};
    if (spec.method == BesovMethod::dyadic) return detail::besov_dyadic(f, spec, profile);
    const TimeGrid tg = tgrid ? *tgrid : TimeGrid::covering(f.kmin2, f.kmax2);
    return detail::besov_heat(f, spec, tg);
}

inline BesovResult besov_norm_detailed(const SpectralVectorField& f, const BesovSpec& spec,
                                       std::optional<TimeGrid> tgrid = std::nullopt,
                                       const DyadicProfile& profile = {}) {
    return besov_norm_detailed(SparseSpectrum::from(f), spec, tgrid, profile);
}

inline double besov_norm(const SpectralVectorField& f, const BesovSpec& spec,
                         std::optional<TimeGrid> tgrid = std::nullopt) {
    return besov_norm_detailed(f, spec, tgrid).value;
}

}  // namespace orthoflow::norms
