/// @file evolution.hpp
/// @brief Integrating-factor Heun time stepping of the projected Navier–Stokes
/// equations u_t = Δu − P div(u⊗u) and of the residual system for
/// R = u − Σᵢ vⁱ, vⁱ(t) = e^{tΔ}u₀ⁱ:
///
///   R_t = ΔR − P div(R⊗R + v★⊗R + R⊗v★ + Σ_{i≠j} vⁱ⊗vʲ),  R(0) = 0.
///
/// The heat flows enter through exact multipliers at each stage time. One step:
///   k₁ = N(uₙ, tₙ),  ũ = E(uₙ + dt k₁),  k₂ = N(ũ, tₙ₊₁),
///   uₙ₊₁ = E(uₙ + dt/2 k₁) + dt/2 k₂,   E = e^{dtΔ}.
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>

#include "orthoflow/flows/forcing.hpp"
#include "orthoflow/norms/lp.hpp"

#if defined(__GLIBC__)
#include <malloc.h>
#endif

namespace orthoflow::solver {

using datagen::OrthogonalData;
using spectral::FftBuffer;
using spectral::FourierGrid;
using spectral::SpectralVectorField;
using spectral::SymmetricTensorSamples;

struct EvolutionConfig {
    double T = 0.1;
    double dt = 1e-3;
    int trace_stride = 10;
    bool linear = false;          // residual system only: drop R⊗R
    bool measure_plans = true;    // FFTW_MEASURE plans for the solver grid
    double l3_oversample = 2.0;   // sampling for the traced L³ norms

    bool operator==(const EvolutionConfig&) const = default;

    int steps() const { return static_cast<int>(std::llround(T / dt)); }

    void validate() const {
        if (!(dt > 0.0)) throw std::invalid_argument("EvolutionConfig: dt must be > 0");
        if (!(T >= dt)) throw std::invalid_argument("EvolutionConfig: T must be >= dt");
        if (std::abs(steps() * dt - T) > 1e-9 * T)
            throw std::invalid_argument("EvolutionConfig: T must be a whole number of steps dt");
        if (trace_stride < 1) throw std::invalid_argument("EvolutionConfig: trace_stride must be >= 1");
    }
};

/// dx / max|u| over the smallest grid spacing; the advisory advective step limit.
inline double advective_dt_limit(const SpectralVectorField& u0) {
    const double umax = norms::lp_norm(u0, norms::kInfinity);
    if (umax == 0.0) return std::numeric_limits<double>::infinity();
    int n = 0;
    for (int a = 0; a < 3; ++a) n = std::max(n, u0.grid().dim(a));
    return (2.0 * M_PI / n) / umax;
}

struct TraceSample {
    double t = 0.0;
    double l2 = 0.0;
    double grad_l2 = 0.0;
    double l3 = 0.0;
    double r_l3 = 0.0;           // residual runs only
    double div_residual = 0.0;
    double energy_defect = 0.0;  // cumulative, full runs only
    double defect = 0.0;         // decomposition runs only
};

struct TrajectoryTrace {
    std::vector<TraceSample> samples;
    bool halted = false;
    double halt_time = 0.0;
    std::string message;
    double energy_defect = 0.0;         // Σ per-step |Δ‖u‖² + dt(‖∇uₙ‖² + ‖∇uₙ₊₁‖²)|
    double energy_constant = 0.0;       // energy_defect / dt²
    double max_energy_increase = 0.0;   // max over steps of ‖uₙ₊₁‖₂ − ‖uₙ‖₂
    double max_div_residual = 0.0;
    int steps = 0;
};

struct SolveResult {
    TrajectoryTrace trace;
    SpectralVectorField state;
};

struct BlowUp : std::runtime_error {
    double t;
    BlowUp(double time, const std::string& what) : std::runtime_error(what), t(time) {}
};

inline double grad_l2(const SpectralVectorField& f) {
    double s = 0.0;
    for (int c = 0; c < 3; ++c) {
        if (!f.has_component(c)) continue;
        auto v = f.component(c);
        spectral::for_each_mode(f.grid(), [&](std::size_t i, const Wavevector& k, bool) {
            s += spectral::norm2(k) * std::norm(v[i]);
        });
    }
    return std::sqrt(s);
}

namespace detail {

// u_l u_m, l ≤ m.
inline void add_outer(SymmetricTensorSamples& s, const std::array<std::vector<double>, 3>& a,
                      const std::array<std::vector<double>, 3>& b, double w) {
    const std::size_t n = spectral::physical_size(s.dims);
    for (int l = 0; l < 3; ++l)
        for (int m = l; m < 3; ++m) {
            if (a[l].empty() || b[m].empty()) continue;
            auto& e = s.entry[SymmetricTensorSamples::slot(l, m)];
            if (e.empty()) e.assign(n, 0.0);
            for (std::size_t x = 0; x < n; ++x) e[x] += w * a[l][x] * b[m][x];
        }
}

}  // namespace detail

namespace detail {

// Keeps multi-megabyte scratch arrays on the heap between steps. With glibc's
// default policy each one is mmapped afresh, and the page faults cost more
// than the transforms.
inline void retain_large_allocations() {
#ifdef __GLIBC__
    static const bool once = [] {
        mallopt(M_MMAP_THRESHOLD, 1 << 30);
        mallopt(M_TRIM_THRESHOLD, 1 << 30);
        return true;
    }();
    (void)once;
#endif
}

}  // namespace detail

/// Shared machinery: the grid, e^{dtΔ} and the Heun step around a right-hand side.
class Stepper {
public:
    Stepper(const FourierGrid& g, double dt, bool measure) : g_(g), dt_(dt) {
        detail::retain_large_allocations();
        if (measure) spectral::FftPlans::instance().prepare(g.dims(), spectral::PlanRigor::measure);
        E_.resize(g.size());
        spectral::for_each_mode(g, [&](std::size_t i, const Wavevector& k, bool nyq) {
            E_[i] = nyq ? 0.0 : std::exp(-dt * spectral::norm2(k));
        });
    }

    const FourierGrid& grid() const { return g_; }
    double dt() const { return dt_; }

    void apply_heat(SpectralVectorField& f) const {
        for (int c = 0; c < 3; ++c) {
            if (!f.has_component(c)) continue;
            auto v = f.component_mut(c);
            for (std::size_t i = 0; i < v.size(); ++i) v[i] *= E_[i];
        }
    }

    using Rhs = std::function<SpectralVectorField(const SpectralVectorField&, double)>;

    SpectralVectorField heun(const SpectralVectorField& u, double t, const Rhs& rhs) const {
        const auto k1 = rhs(u, t);
        auto pred = u;
        pred.axpy(dt_, k1);
        apply_heat(pred);
        const auto k2 = rhs(pred, t + dt_);
        auto out = u;
        out.axpy(0.5 * dt_, k1);
        apply_heat(out);
        out.axpy(0.5 * dt_, k2);
        if (!out.all_finite())
            throw BlowUp(t + dt_, "non-finite state at t = " + std::to_string(t + dt_));
        return out;
    }

protected:
    FourierGrid g_;
    double dt_;
    std::vector<double> E_;
};

/// −P div(u⊗u) on the solver grid, 2/3-rule dealiased.
class NsStepper : public Stepper {
public:
    using Stepper::Stepper;

    SpectralVectorField rhs(const SpectralVectorField& u) {
        SymmetricTensorSamples s;
        s.dims = g_.dims();
        const auto p = spectral::sample_components(u, s.dims, buf_);
        detail::add_outer(s, p, p, 1.0);
        if (std::all_of(s.entry.begin(), s.entry.end(), [](const auto& e) { return e.empty(); }))
            return SpectralVectorField(g_, true);
        return flows::detail::minus_projected_divergence(s, g_, buf_);
    }

    SpectralVectorField step(const SpectralVectorField& u, double t) {
        return heun(u, t, [this](const SpectralVectorField& x, double) { return rhs(x); });
    }

private:
    FftBuffer buf_;
};

/// Right-hand side of the residual system with exact heat flows.
class ResidualStepper : public Stepper {
public:
    ResidualStepper(const OrthogonalData& d, const FourierGrid& g, double dt, bool measure, bool linear)
        : Stepper(g, dt, measure), linear_(linear) {
        for (int i = 0; i < 3; ++i) {
            u0_[i] = spectral::regrid(d.components[i], g);
            for (int c = 0; c < 3; ++c)
                if (c != i && u0_[i].has_component(c)) single_slot_ = false;
        }
    }

    /// v★(t) = Σ e^{tΔ}u₀ⁱ on the grid.
    SpectralVectorField vstar(double t) const {
        SpectralVectorField v(g_, true);
        for (const auto& c : u0_) v += c;
        return spectral::heat_semigroup(v, t);
    }

    SpectralVectorField rhs(const SpectralVectorField& R, double t) {
        SymmetricTensorSamples s;
        s.dims = g_.dims();
        const auto& w = vstar_samples(t);
        auto r = spectral::sample_components(R, s.dims, buf_);
        if (single_slot_) {
            // Σ_{i≠j} vⁱ⊗vʲ is the off-diagonal part of v★⊗v★, so
            // S_lm = (w+r)_l (w+r)_m for l ≠ m and S_ll = r_l (r_l + 2w_l).
            const std::size_t n = spectral::physical_size(s.dims);
            const bool r_zero = R.l2() == 0.0;
            for (auto& c : r)
                if (c.empty()) c.assign(n, 0.0);
            for (int l = 0; l < 3; ++l)
                for (int m = l; m < 3; ++m) {
                    if (w[l].empty() && w[m].empty() && r_zero) continue;
                    auto& e = s.entry[SymmetricTensorSamples::slot(l, m)];
                    e.resize(n);
                    const double* wl = w[l].empty() ? nullptr : w[l].data();
                    const double* wm = w[m].empty() ? nullptr : w[m].data();
                    const double* rl = r[l].data();
                    const double* rm = r[m].data();
                    for (std::size_t x = 0; x < n; ++x) {
                        const double a = wl ? wl[x] : 0.0, b = wm ? wm[x] : 0.0;
                        if (l == m)
                            e[x] = rl[x] * ((linear_ ? 0.0 : rl[x]) + 2.0 * a);
                        else
                            e[x] = linear_ ? a * b + a * rm[x] + rl[x] * b : (a + rl[x]) * (b + rm[x]);
                    }
                }
        } else {
            std::array<std::array<std::vector<double>, 3>, 3> v;
            for (int i = 0; i < 3; ++i)
                v[i] = spectral::sample_components(spectral::heat_semigroup(u0_[i], t), s.dims, buf_);
            for (int i = 0; i < 3; ++i)
                for (int j = 0; j < 3; ++j)
                    if (i != j) detail::add_outer(s, v[i], v[j], 1.0);
            if (!linear_) detail::add_outer(s, r, r, 1.0);
            detail::add_outer(s, w, r, 1.0);
            detail::add_outer(s, r, w, 1.0);
        }
        if (std::all_of(s.entry.begin(), s.entry.end(), [](const auto& e) { return e.empty(); }))
            return SpectralVectorField(g_, true);
        return flows::detail::minus_projected_divergence(s, g_, buf_);
    }

    SpectralVectorField step(const SpectralVectorField& R, double t) {
        return heun(R, t, [this](const SpectralVectorField& x, double tt) { return rhs(x, tt); });
    }

private:
    // Samples of v★(t). Heun's second stage time is the next step's first, so
    // the last sampling is kept.
    const std::array<std::vector<double>, 3>& vstar_samples(double t) {
        if (!(std::abs(t - w_t_) <= 1e-12 * std::max(1.0, std::abs(t)))) {
            w_ = spectral::sample_components(vstar(t), g_.dims(), buf_);
            w_t_ = t;
        }
        return w_;
    }

    bool linear_;
    bool single_slot_ = true;  // component i occupies velocity slot i only
    double w_t_ = std::numeric_limits<double>::quiet_NaN();
    std::array<std::vector<double>, 3> w_;
    std::array<SpectralVectorField, 3> u0_;
    FftBuffer buf_;
};

namespace detail {

inline TraceSample sample_state(double t, const SpectralVectorField& u, double l3_os) {
    TraceSample s;
    s.t = t;
    s.l2 = u.l2();
    s.grad_l2 = grad_l2(u);
    s.l3 = norms::lp_norm(u, 3.0, l3_os);
    s.div_residual = spectral::divergence_residual(u);
    return s;
}

}  // namespace detail

/// Integrates (NS) from u0 on u0's grid.
inline SolveResult solve_full_ns(const SpectralVectorField& u0, const EvolutionConfig& cfg) {
    cfg.validate();
    flows::detail::require_divergence_free(u0, "solve_full_ns: u0");
    SolveResult res{{}, u0};
    NsStepper st(u0.grid(), cfg.dt, cfg.measure_plans);
    auto& tr = res.trace;
    auto& u = res.state;
    tr.samples.push_back(detail::sample_state(0.0, u, cfg.l3_oversample));
    double e0 = u.l2(), g0 = grad_l2(u);
    for (int n = 0; n < cfg.steps(); ++n) {
        const double t = n * cfg.dt;
        try {
            u = st.step(u, t);
        } catch (const BlowUp& b) {
            tr.halted = true;
            tr.halt_time = b.t;
            tr.message = b.what();
            break;
        }
        const double e1 = u.l2(), g1 = grad_l2(u);
        tr.energy_defect += std::abs(e1 * e1 - e0 * e0 + cfg.dt * (g0 * g0 + g1 * g1));
        tr.max_energy_increase = std::max(tr.max_energy_increase, e1 - e0);
        e0 = e1;
        g0 = g1;
        tr.steps = n + 1;
        if ((n + 1) % cfg.trace_stride == 0 || n + 1 == cfg.steps()) {
            auto s = detail::sample_state((n + 1) * cfg.dt, u, cfg.l3_oversample);
            s.energy_defect = tr.energy_defect;
            tr.max_div_residual = std::max(tr.max_div_residual, s.div_residual);
            tr.samples.push_back(s);
        }
    }
    tr.energy_constant = tr.energy_defect / (cfg.dt * cfg.dt);
    return res;
}

/// Integrates the residual system from R(0) = 0 on grid g. Traced L²/L³ values
/// refer to the reconstructed u = v★ + R; r_l3 is ‖R‖_{L³}.
inline SolveResult solve_residual(const OrthogonalData& d, const FourierGrid& g, const EvolutionConfig& cfg) {
    cfg.validate();
    SolveResult res{{}, SpectralVectorField(g, true)};
    ResidualStepper st(d, g, cfg.dt, cfg.measure_plans, cfg.linear);
    auto& tr = res.trace;
    auto& R = res.state;
    auto sample = [&](double t) {
        auto s = detail::sample_state(t, st.vstar(t) + R, cfg.l3_oversample);
        s.r_l3 = norms::lp_norm(R, 3.0, cfg.l3_oversample);
        s.div_residual = std::max(s.div_residual, spectral::divergence_residual(R));
        return s;
    };
    tr.samples.push_back(sample(0.0));
    for (int n = 0; n < cfg.steps(); ++n) {
        try {
            R = st.step(R, n * cfg.dt);
        } catch (const BlowUp& b) {
            tr.halted = true;
            tr.halt_time = b.t;
            tr.message = b.what();
            break;
        }
        tr.steps = n + 1;
        if ((n + 1) % cfg.trace_stride == 0 || n + 1 == cfg.steps()) {
            tr.samples.push_back(sample((n + 1) * cfg.dt));
            tr.max_div_residual = std::max(tr.max_div_residual, tr.samples.back().div_residual);
        }
    }
    return res;
}

/// The solver grid used for constructed data: the common component grid, or
/// `dims` when given.
inline FourierGrid solver_grid(const OrthogonalData& d, std::optional<std::array<int, 3>> dims = std::nullopt) {
    return dims ? spectral::make_grid(*dims) : d.common_grid();
}

struct DecompositionResult {
    TrajectoryTrace full;
    TrajectoryTrace residual;
    std::vector<double> t;       // every step
    std::vector<double> defect;  // ‖u − v★ − R‖₂ / ‖u₀‖₂ per step
    double sup_defect = 0.0;
    SpectralVectorField u, R;
};

/// Runs (NS) on u₀ = Σu₀ⁱ and the residual system side by side on g.
inline DecompositionResult decomposition_check(const OrthogonalData& d, const FourierGrid& g,
                                               const EvolutionConfig& cfg) {
    cfg.validate();
    if (cfg.linear) throw std::invalid_argument("decomposition_check needs the nonlinear residual system");
    DecompositionResult out;
    const auto u0 = d.sum(g);
    const double scale = std::max(u0.l2(), 1e-300);
    NsStepper ns(g, cfg.dt, cfg.measure_plans);
    ResidualStepper rs(d, g, cfg.dt, false, false);
    out.u = u0;
    out.R = SpectralVectorField(g, true);
    auto record = [&](double t, bool trace) {
        const auto vs = rs.vstar(t);
        const double def = (out.u - vs - out.R).l2() / scale;
        out.t.push_back(t);
        out.defect.push_back(def);
        out.sup_defect = std::max(out.sup_defect, def);
        if (!trace) return;
        auto a = detail::sample_state(t, out.u, cfg.l3_oversample);
        a.defect = def;
        out.full.samples.push_back(a);
        auto b = detail::sample_state(t, vs + out.R, cfg.l3_oversample);
        b.r_l3 = norms::lp_norm(out.R, 3.0, cfg.l3_oversample);
        b.defect = def;
        out.residual.samples.push_back(b);
    };
    record(0.0, true);
    for (int n = 0; n < cfg.steps(); ++n) {
        const double t = n * cfg.dt;
        try {
            out.u = ns.step(out.u, t);
            out.R = rs.step(out.R, t);
        } catch (const BlowUp& b) {
            out.full.halted = out.residual.halted = true;
            out.full.halt_time = out.residual.halt_time = b.t;
            out.full.message = out.residual.message = b.what();
            break;
        }
        out.full.steps = out.residual.steps = n + 1;
        record((n + 1) * cfg.dt, (n + 1) % cfg.trace_stride == 0 || n + 1 == cfg.steps());
    }
    return out;
}

}  // namespace orthoflow::solver
