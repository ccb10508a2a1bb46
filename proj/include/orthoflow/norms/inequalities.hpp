/// @file inequalities.hpp
/// @brief Empirical checks of Bernstein's inequality and of Lᵖ→L^q heat smoothing.
#pragma once

#include <cstdint>
#include <random>

#include "orthoflow/norms/lp.hpp"

namespace orthoflow::norms {

struct FrequencyBand {
    double kmin = 1.0;
    double kmax = 1.0;
};

struct BernsteinReport {
    double lq = 0.0;
    double lp = 0.0;
    double scale = 0.0;  // kmax^{d(1/p - 1/q)}
    double ratio = 0.0;  // lq / (scale · lp)
};

inline double inv(double p) { return std::isinf(p) ? 0.0 : 1.0 / p; }

/// r = ‖f‖_q / (kmax^{d(1/p−1/q)} ‖f‖_p) for f supported in the annulus `band`.
inline BernsteinReport bernstein_check(const SpectralVectorField& f, FrequencyBand band, double p, double q,
                                       int effective_dim) {
    if (!(p >= 1.0) || !(q >= p)) throw std::invalid_argument("bernstein_check needs 1 <= p <= q");
    if (effective_dim != 2 && effective_dim != 3) throw std::invalid_argument("effective_dim must be 2 or 3");
    const auto s = SparseSpectrum::from(f);
    const bool has_mean = std::find(s.k2.begin(), s.k2.end(), 0.0) != s.k2.end();
    if (!s.empty() && (has_mean || std::sqrt(s.kmin2) < band.kmin * (1 - 1e-12) ||
                       std::sqrt(s.kmax2) > band.kmax * (1 + 1e-12)))
        throw std::invalid_argument("bernstein_check: support outside band");
    BernsteinReport r;
    r.lp = lp_norm(s, p);
    r.lq = q == p ? r.lp : lp_norm(s, q);
    r.scale = std::pow(band.kmax, effective_dim * (inv(p) - inv(q)));
    r.ratio = r.lp > 0.0 ? r.lq / (r.scale * r.lp) : 0.0;
    return r;
}

struct SmoothingFit {
    double exponent = 0.0;  // fitted slope of log sup‖|k|^s e^{tΔ}u‖_q/‖u‖_p vs log t
    double expected = 0.0;  // −s/2 − (3/2)(1/p − 1/q)
    double t_lo = 0.0, t_hi = 0.0;
    std::vector<double> t, ratio;
};

/// Least-squares slope of y against x.
inline double ls_slope(std::span<const double> x, std::span<const double> y) {
    const double n = static_cast<double>(x.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    const double den = n * sxx - sx * sx;
    if (den == 0.0) return std::numeric_limits<double>::quiet_NaN();
    return (n * sxy - sx * sy) / den;
}

/// Fits the algebraic smoothing rate of |k|^s e^{tΔ} from Lᵖ to L^q.
///
/// Trial fields are scalar, supported in the 3D annulus `band`, with positive
/// coefficients w·e^{−|k|²/λ²}, w uniform in [1/2, 1] and λ log-stratified over
/// [kmin/2, kmax]. The supremum over trials of the operator ratio is fitted on
/// t ∈ [4/kmax², 1/(8 kmin²)], where the rate is algebraic.
inline SmoothingFit heat_smoothing_fit(FrequencyBand band, double s, double p, double q, int trials,
                                       std::uint64_t seed = 1, int time_points = 16) {
    if (!(q >= p)) throw std::invalid_argument("heat_smoothing_fit requires q >= p");
    if (!(s >= 0.0)) throw std::invalid_argument("heat_smoothing_fit requires s >= 0");
    if (trials < 1 || time_points < 2) throw std::invalid_argument("heat_smoothing_fit needs trials >= 1");
    if (!(band.kmin >= 1.0) || !(band.kmax >= 4.0 * band.kmin))
        throw std::invalid_argument("heat_smoothing_fit needs 1 <= kmin and kmax >= 4 kmin");
    SmoothingFit fit;
    fit.expected = -0.5 * s - 1.5 * (inv(p) - inv(q));
    fit.t_lo = 4.0 / (band.kmax * band.kmax);
    fit.t_hi = 0.125 / (band.kmin * band.kmin);
    for (int i = 0; i < time_points; ++i)
        fit.t.push_back(fit.t_lo * std::pow(fit.t_hi / fit.t_lo, double(i) / (time_points - 1)));
    fit.ratio.assign(fit.t.size(), 0.0);

    // Mode list of the annulus, ± pairs adjacent.
    const int K = static_cast<int>(std::floor(band.kmax));
    SparseSpectrum base;
    for (int k1 = -K; k1 <= K; ++k1)
        for (int k2 = -K; k2 <= K; ++k2)
            for (int k3 = -K; k3 <= K; ++k3) {
                const double k2n = double(k1) * k1 + double(k2) * k2 + double(k3) * k3;
                if (k2n < band.kmin * band.kmin || k2n > band.kmax * band.kmax) continue;
                if (k1 < 0 || (k1 == 0 && (k2 < 0 || (k2 == 0 && k3 < 0)))) continue;
                base.k.push_back({k1, k2, k3});
                base.k.push_back({-k1, -k2, -k3});
                base.k2.insert(base.k2.end(), 2, k2n);
            }
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> w(0.5, 1.0), u(0.0, 1.0);
    for (int trial = 0; trial < trials; ++trial) {
        const double lambda = 0.5 * band.kmin * std::pow(2.0 * band.kmax / band.kmin, (trial + u(rng)) / trials);
        SparseSpectrum f = base;
        f.c[0].resize(f.size());
        for (std::size_t m = 0; m < f.size(); m += 2)
            f.c[0][m] = f.c[0][m + 1] = w(rng) * std::exp(-f.k2[m] / (lambda * lambda));
        f.finish();
        const double np = lp_norm(f, p, 2.0);
        for (std::size_t i = 0; i < fit.t.size(); ++i) {
            const double t = fit.t[i];
            const double nq = lp_norm(f, q, [t, s](double k2) { return std::pow(k2, 0.5 * s) * std::exp(-t * k2); }, 2.0);
            fit.ratio[i] = std::max(fit.ratio[i], nq / np);
        }
    }
    std::vector<double> lx(fit.t.size()), ly(fit.t.size());
    for (std::size_t i = 0; i < fit.t.size(); ++i) {
        lx[i] = std::log(fit.t[i]);
        ly[i] = std::log(fit.ratio[i]);
    }
    fit.exponent = ls_slope(lx, ly);
    return fit;
}

}  // namespace orthoflow::norms
