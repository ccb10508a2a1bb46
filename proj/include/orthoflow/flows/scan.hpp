/// @file scan.hpp
/// @brief N-sweeps of the per-term forcing norm against the N^{−2/3−2ε/3} rate.
#pragma once

#include <algorithm>
#include <atomic>
#include <future>
#include <optional>

#include "orthoflow/flows/quadrature.hpp"
#include "orthoflow/norms/inequalities.hpp"

namespace orthoflow::flows {

/// Runs fn(0..n-1) on up to `workers` threads; results come back in index order.
template <class Fn>
auto parallel_map(std::size_t n, int workers, Fn&& fn) -> std::vector<decltype(fn(std::size_t{}))> {
    using R = decltype(fn(std::size_t{}));
    std::vector<std::optional<R>> slots(n);
    const std::size_t w = static_cast<std::size_t>(std::max(1, workers));
    if (w == 1 || n < 2) {
        for (std::size_t i = 0; i < n; ++i) slots[i].emplace(fn(i));
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::future<void>> pool;
        for (std::size_t t = 0; t < std::min(w, n); ++t)
            pool.push_back(std::async(std::launch::async, [&] {
                for (std::size_t i = next++; i < n; i = next++) slots[i].emplace(fn(i));
            }));
        for (auto& f : pool) f.get();
    }
    std::vector<R> out;
    out.reserve(n);
    for (auto& s : slots) out.push_back(std::move(*s));
    return out;
}

struct ScanRow {
    int N = 0;
    double f_l1l3 = 0.0;             // Σ_{i≠j} ∫‖vⁱ∂ᵢvʲ‖_{L³}
    std::array<double, 3> u_l3{};    // ‖u₀ⁱ‖_{L³}
    double normalized = 0.0;         // Σ_{i≠j} I_ij / (‖u₀ⁱ‖₃‖u₀ʲ‖₃)
    double ratio = 0.0;              // normalized / N^{−2/3−2ε/3}
    double tail_bound = 0.0;
    std::size_t evaluations = 0;
    std::array<std::array<double, 3>, 3> per_term{};
};

/// Cross-check at the smallest N of a sweep.
struct ScanCrossCheck {
    int N = 0;
    double separable = 0.0;
    double full3d = 0.0;
    double rel_diff = 0.0;
    double projected = 0.0;  // ∫‖F‖_{L³} of the Leray-projected forcing
    double projected_over_terms = 0.0;
};

struct ScanOptions {
    std::vector<int> Ns{6, 10, 16};
    double eps = 0.25;
    double delta = 0.03;
    double C = 1.0;
    datagen::BandPolicy bands = datagen::BandPolicy::planar;
    double points_per_decade = 32.0;
    int workers = 1;
    bool cross_check = false;
    double cross_check_ppd = 16.0;
};

struct ScanReport {
    ScanOptions options;
    std::vector<ScanRow> rows;
    double bound_exponent = 0.0;  // −2/3 − 2ε/3
    double slope = std::numeric_limits<double>::quiet_NaN();
    double ratio_spread = 0.0;    // max r / min r
    bool ratio_non_increasing = true;
    std::optional<ScanCrossCheck> cross;

    static constexpr double kSlopeSlack = 0.1;
    static constexpr double kRatioFactor = 10.0;

    bool slope_ok() const { return std::isfinite(slope) && slope <= -2.0 / 3.0 + kSlopeSlack; }
    bool ratio_ok() const { return ratio_spread <= kRatioFactor; }
};

inline datagen::ConstructionParams scan_params(int N, const ScanOptions& o) {
    datagen::ConstructionParams p;
    p.N = N;
    p.eps = o.eps;
    p.delta = o.delta;
    p.C = o.C;
    p.bands = o.bands;
    return p;
}

inline ScanRow scan_row(int N, const ScanOptions& o) {
    const auto d = datagen::build_data(scan_params(N, o));
    const auto h = HeatFlows::from(d);
    auto q = ForcingQuadrature::anchored(ForcingQuadrature::natural_K(d.params), h, o.points_per_decade);
    const auto r = forcing_l1l3(h, q, ForcingMode::per_term);
    ScanRow row;
    row.N = N;
    row.f_l1l3 = r.value;
    row.tail_bound = r.tail_bound;
    row.evaluations = r.evaluations;
    row.per_term = r.per_term;
    for (int i = 0; i < 3; ++i) row.u_l3[i] = norms::lp_norm(h.u[i], 3.0);
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            if (i != j && row.u_l3[i] > 0.0 && row.u_l3[j] > 0.0)
                row.normalized += r.per_term[i][j] / (row.u_l3[i] * row.u_l3[j]);
    row.ratio = row.normalized / std::pow(double(N), -2.0 / 3.0 - 2.0 * o.eps / 3.0);
    return row;
}

inline ScanCrossCheck scan_cross_check(int N, const ScanOptions& o) {
    const auto d = datagen::build_data(scan_params(N, o));
    const auto h = HeatFlows::from(d);
    const double K = ForcingQuadrature::natural_K(d.params);
    ScanCrossCheck c;
    c.N = N;
    auto q1 = ForcingQuadrature::anchored(K, h, o.cross_check_ppd);
    c.separable = forcing_l1l3(h, q1, ForcingMode::per_term, PerTermPath::separable).value;
    auto q2 = ForcingQuadrature::anchored(K, h, o.cross_check_ppd);
    c.full3d = forcing_l1l3(h, q2, ForcingMode::per_term, PerTermPath::full3d).value;
    c.rel_diff = std::abs(c.separable - c.full3d) / c.full3d;
    auto q3 = ForcingQuadrature::anchored(K, h, o.cross_check_ppd);
    c.projected = forcing_l1l3(h, q3, ForcingMode::full).value;
    c.projected_over_terms = c.projected / c.separable;
    return c;
}

inline ScanReport forcing_scan(const ScanOptions& o) {
    if (o.Ns.empty()) throw std::invalid_argument("forcing_scan needs at least one N");
    ScanReport rep;
    rep.options = o;
    rep.options.Ns.clear();
    auto Ns = o.Ns;
    std::sort(Ns.begin(), Ns.end());
    Ns.erase(std::unique(Ns.begin(), Ns.end()), Ns.end());
    rep.options.Ns = Ns;
    for (int N : Ns) scan_params(N, o).validate();
    rep.rows = parallel_map(Ns.size(), o.workers, [&](std::size_t i) { return scan_row(Ns[i], o); });
    rep.bound_exponent = -2.0 / 3.0 - 2.0 * o.eps / 3.0;
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    for (std::size_t i = 0; i < rep.rows.size(); ++i) {
        lo = std::min(lo, rep.rows[i].ratio);
        hi = std::max(hi, rep.rows[i].ratio);
        if (i > 0 && rep.rows[i].ratio > rep.rows[i - 1].ratio) rep.ratio_non_increasing = false;
    }
    rep.ratio_spread = lo > 0.0 ? hi / lo : std::numeric_limits<double>::infinity();
    if (rep.rows.size() >= 2) {
        std::vector<double> x, y;
        for (const auto& r : rep.rows) {
            x.push_back(std::log(double(r.N)));
            y.push_back(std::log(r.normalized));
        }
        rep.slope = norms::ls_slope(x, y);
    }
    if (o.cross_check) rep.cross = scan_cross_check(Ns.front(), o);
    return rep;
}

}  // namespace orthoflow::flows
