/// @file time_grid.hpp
/// @brief Geometric time grids and quadrature in log t.
#pragma once

#include <cmath>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

namespace orthoflow::norms {

/// Geometric grid t_k = anchor·ρ^k covering [t_min, t_max], ρ = 10^{1/points_per_decade}.
/// Without an anchor the grid starts at t_min.
struct TimeGrid {
    double t_min = 0.0;
    double t_max = 0.0;
    double points_per_decade = 32.0;
    std::optional<double> anchor;

    double ratio() const { return std::pow(10.0, 1.0 / points_per_decade); }

    void validate() const {
        if (!(t_min > 0.0) || !(t_max > t_min)) throw std::invalid_argument("TimeGrid needs 0 < t_min < t_max");
        if (!(points_per_decade > 0.0)) throw std::invalid_argument("TimeGrid needs points_per_decade > 0");
        if (anchor && !(*anchor > 0.0)) throw std::invalid_argument("TimeGrid anchor must be positive");
    }

    std::vector<double> points() const {
        validate();
        const double lr = std::log(ratio());
        const double base = anchor ? *anchor : t_min;
        const long lo = static_cast<long>(std::floor(std::log(t_min / base) / lr + 1e-9));
        const long hi = static_cast<long>(std::ceil(std::log(t_max / base) / lr - 1e-9));
        std::vector<double> t;
        t.reserve(static_cast<std::size_t>(hi - lo + 1));
        for (long i = lo; i <= hi; ++i) t.push_back(i == 0 ? base : base * std::exp(lr * double(i)));
        return t;
    }

    /// Grid spanning [lo_factor/k²max, hi_factor/k²min].
    static TimeGrid covering(double kmin2, double kmax2, double points_per_decade = 32.0,
                             double lo_factor = 1e-4, double hi_factor = 50.0) {
        TimeGrid g;
        g.t_min = lo_factor / kmax2;
        g.t_max = hi_factor / kmin2;
        g.points_per_decade = points_per_decade;
        return g;
    }
};

/// ∫ g(t) dt/t by the trapezoid rule in ln t.
inline double integrate_dlogt(std::span<const double> t, std::span<const double> g) {
    double s = 0.0;
    for (std::size_t i = 0; i + 1 < t.size(); ++i) s += 0.5 * (g[i] + g[i + 1]) * std::log(t[i + 1] / t[i]);
    return s;
}

/// ∫ f(t) dt on a geometric grid, via the trapezoid rule for f(t)·t in ln t.
inline double integrate_dt(std::span<const double> t, std::span<const double> f) {
    double s = 0.0;
    for (std::size_t i = 0; i + 1 < t.size(); ++i)
        s += 0.5 * (f[i] * t[i] + f[i + 1] * t[i + 1]) * std::log(t[i + 1] / t[i]);
    return s;
}

/// Golden-section maximization of a unimodal h on [a, b].
template <class F>
std::pair<double, double> golden_max(F&& h, double a, double b, int iters = 80) {
    const double r = 0.5 * (std::sqrt(5.0) - 1.0);
    double x1 = b - r * (b - a), x2 = a + r * (b - a);
    double f1 = h(x1), f2 = h(x2);
    for (int i = 0; i < iters && (b - a) > 1e-13 * (std::abs(a) + std::abs(b) + 1e-300); ++i) {
        if (f1 < f2) {
            a = x1; x1 = x2; f1 = f2;
            x2 = a + r * (b - a); f2 = h(x2);
        } else {
            b = x2; x2 = x1; f2 = f1;
            x1 = b - r * (b - a); f1 = h(x1);
        }
    }
    return f1 > f2 ? std::pair{x1, f1} : std::pair{x2, f2};
}

}  // namespace orthoflow::norms
