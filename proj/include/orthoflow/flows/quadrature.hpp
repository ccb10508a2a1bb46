/// @file quadrature.hpp
/// @brief ∫₀^∞ ‖·‖_{L³} dt of the forcing on a geometric time grid anchored at
/// K = N^{−2(1+ε)}, with an analytic tail bound.
#pragma once

#include <functional>

#include "orthoflow/flows/forcing.hpp"
#include "orthoflow/norms/time_grid.hpp"

namespace orthoflow::flows {

/// Tail fraction targeted when t_max is chosen automatically.
inline constexpr double kAutoTailFraction = 1e-4;
/// Largest tail fraction accepted for an explicit t_max.
inline constexpr double kMaxTailFraction = 1e-2;

struct ForcingQuadrature {
    norms::TimeGrid tgrid;  // anchored at K; tgrid.t_max is the truncation time
    bool auto_t_max = true;
    double tail_bound = 0.0;  // filled by forcing_l1l3

    double K() const { return tgrid.anchor ? *tgrid.anchor : tgrid.t_min; }
    double t_max() const { return tgrid.t_max; }

    /// Grid anchored at K from 1e-3·min(K, 1/k²max) to 10/(smallest pair rate).
    static ForcingQuadrature anchored(double K, const HeatFlows& h, double points_per_decade = 32.0) {
        if (!(K > 0.0)) throw std::invalid_argument("ForcingQuadrature needs K > 0");
        ForcingQuadrature q;
        const double k2 = std::max(1.0, h.max_k2());
        q.tgrid.anchor = K;
        q.tgrid.points_per_decade = points_per_decade;
        q.tgrid.t_min = 1e-3 * std::min(K, 1.0 / k2);
        const double rate = h.min_pair_rate();
        q.tgrid.t_max = std::max(10.0 * q.tgrid.t_min, rate > 0.0 ? 10.0 / rate : 10.0 * K);
        return q;
    }

    static double natural_K(const datagen::ConstructionParams& p) {
        return std::pow(double(p.N), -2.0 * (1.0 + p.eps));
    }

    static ForcingQuadrature for_data(const OrthogonalData& d, double points_per_decade = 32.0) {
        return anchored(natural_K(d.params), HeatFlows::from(d), points_per_decade);
    }
};

enum class ForcingMode { full, per_term };

inline const char* to_string(ForcingMode m) { return m == ForcingMode::full ? "full" : "per_term"; }

struct ForcingIntegral {
    double value = 0.0;       // head + trapezoid body
    double head = 0.0;        // t_min·f(t_min), standing in for ∫₀^{t_min}
    double tail_bound = 0.0;  // bound on ∫_{t_max}^∞
    double t_max = 0.0;
    std::size_t evaluations = 0;
    std::array<std::array<double, 3>, 3> per_term{};  // per_term mode: ∫‖vⁱ∂ᵢvʲ‖_{L³}
    ForcingMode mode = ForcingMode::per_term;
};

/// Integrates a vector of time profiles on the quadrature grid, extending t_max
/// (auto mode) until the analytic tail falls below kAutoTailFraction of the
/// integral of the first profile. `tail(t)` bounds ∫_t^∞ of that profile.
inline ForcingIntegral integrate_profiles(ForcingQuadrature& q, std::size_t width,
                                          const std::function<std::vector<double>(double)>& eval,
                                          const std::function<double(double)>& tail, std::vector<double>* totals) {
    q.tgrid.validate();
    std::vector<double> ts;
    std::vector<std::vector<double>> fs;
    ForcingIntegral r;
    const double step = std::pow(10.0, 0.5);
    for (int round = 0;; ++round) {
        const auto pts = q.tgrid.points();
        for (std::size_t i = ts.size(); i < pts.size(); ++i) {
            ts.push_back(pts[i]);
            fs.push_back(eval(pts[i]));
            if (fs.back().size() != width) throw std::logic_error("profile width mismatch");
        }
        std::vector<double> col(ts.size());
        totals->assign(width, 0.0);
        for (std::size_t w = 0; w < width; ++w) {
            for (std::size_t i = 0; i < ts.size(); ++i) col[i] = fs[i][w];
            (*totals)[w] = norms::integrate_dt(ts, col) + ts.front() * col.front();
        }
        r.head = ts.front() * fs.front()[0];
        r.value = (*totals)[0];
        r.t_max = ts.back();
        r.tail_bound = tail(r.t_max);
        r.evaluations = ts.size();
        const bool ok = r.tail_bound <= kAutoTailFraction * r.value || r.tail_bound == 0.0;
        if (ok) break;
        if (!q.auto_t_max) {
            if (r.tail_bound > kMaxTailFraction * r.value)
                throw std::invalid_argument("tail bound " + std::to_string(r.tail_bound) + " exceeds 1% of the integral " +
                                            std::to_string(r.value) + "; increase t_max beyond " +
                                            std::to_string(r.t_max));
            break;
        }
        if (round > 200) throw std::runtime_error("forcing quadrature: tail bound does not decay");
        q.tgrid.t_max *= step;
    }
    q.tail_bound = r.tail_bound;
    return r;
}

/// ∫₀^∞ ‖F(t)‖_{L³} dt (full) or Σ_{i≠j} ∫₀^∞ ‖vⁱ∂ᵢvʲ‖_{L³} dt (per_term).
inline ForcingIntegral forcing_l1l3(const HeatFlows& h, ForcingQuadrature& q, ForcingMode mode,
                                    PerTermPath path = PerTermPath::separable) {
    ForcingIntegral r;
    std::vector<double> totals;
    if (mode == ForcingMode::full) {
        const auto g = forcing_grid(h);
        auto eval = [&](double t) { return std::vector<double>{norms::lp_norm(forcing_F(h, t, g), 3.0)}; };
        r = integrate_profiles(q, 1, eval, [&](double t) { return h.tail_bound(t); }, &totals);
        r.mode = mode;
        return r;
    }
    if (!h.orthogonal) throw std::invalid_argument("per_term mode requires orthogonal data");
    auto eval = [&](double t) {
        std::vector<double> v(10, 0.0);
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) {
                if (i == j) continue;
                const double x = per_term_l3(h, i, j, t, path);
                v[1 + 3 * i + j] = x;
                v[0] += x;
            }
        return v;
    };
    r = integrate_profiles(q, 10, eval, [&](double t) { return h.tail_bound(t); }, &totals);
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) r.per_term[i][j] = totals[1 + 3 * i + j];
    r.mode = mode;
    return r;
}

inline ForcingIntegral forcing_l1l3(const OrthogonalData& d, ForcingQuadrature& q, ForcingMode mode,
                                    PerTermPath path = PerTermPath::separable) {
    return forcing_l1l3(HeatFlows::from(d), q, mode, path);
}

}  // namespace orthoflow::flows
