/// @file forcing.hpp
/// @brief Exact heat flows of orthogonal data, the symmetric form
/// Q(a,b) = P div(a⊗b + b⊗a), the forcing F = −Σ_{i<j} Q(vⁱ,vʲ) and the
/// per-term products vⁱ·∇vʲ.
#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

#include "orthoflow/datagen/construction.hpp"
#include "orthoflow/norms/lp.hpp"
#include "orthoflow/spectral/operators.hpp"
#include "orthoflow/spectral/sparse.hpp"

namespace orthoflow::flows {

using datagen::OrthogonalData;
using spectral::FftBuffer;
using spectral::FourierGrid;
using spectral::SpectralVectorField;
using spectral::PhysicalDims;
using spectral::SparseSpectrum;
using spectral::SymmetricTensorSamples;

/// How a product that exceeds the grid's 2/3-rule capacity is handled.
enum class ProductPolicy {
    exact,     // throw, naming the grid that would hold the product exactly
    truncate,  // Galerkin truncation by the 2/3 rule, as in the solver
};

namespace detail {

inline void require_divergence_free(const SpectralVectorField& f, const char* name) {
    const double r = spectral::divergence_residual(f);
    if (r > 1e-10)
        throw std::invalid_argument(std::string(name) + " is not divergence-free (residual " + std::to_string(r) +
                                    ")");
}

inline std::array<int, 3> add(const std::array<int, 3>& a, const std::array<int, 3>& b) {
    return {a[0] + b[0], a[1] + b[1], a[2] + b[2]};
}

// Adds a_l b_m + b_l a_m for l ≤ m into the tensor samples.
inline void accumulate_symmetric(SymmetricTensorSamples& s, const std::array<std::vector<double>, 3>& a,
                                 const std::array<std::vector<double>, 3>& b) {
    const std::size_t n = spectral::physical_size(s.dims);
    for (int l = 0; l < 3; ++l)
        for (int m = l; m < 3; ++m) {
            const bool t1 = !a[l].empty() && !b[m].empty();
            const bool t2 = !b[l].empty() && !a[m].empty();
            if (!t1 && !t2) continue;
            auto& e = s.entry[SymmetricTensorSamples::slot(l, m)];
            if (e.empty()) e.assign(n, 0.0);
            if (t1)
                for (std::size_t x = 0; x < n; ++x) e[x] += a[l][x] * b[m][x];
            if (t2)
                for (std::size_t x = 0; x < n; ++x) e[x] += b[l][x] * a[m][x];
        }
}

inline std::array<int, 3> capacity_need(const FourierGrid& g, const std::array<int, 3>& product_content) {
    std::array<int, 3> need{};
    for (int a = 0; a < 3; ++a) need[a] = std::max(g.dim(a), spectral::dealiased_size_for(product_content[a]));
    return need;
}

inline bool fits(const FourierGrid& g, const std::array<int, 3>& product_content) {
    for (int a = 0; a < 3; ++a)
        if (product_content[a] > g.dealias_cutoff(a)) return false;
    return true;
}

inline std::string dims_string(const std::array<int, 3>& d) {
    return std::to_string(d[0]) + "x" + std::to_string(d[1]) + "x" + std::to_string(d[2]);
}

// −P div S, dealiased on g.
inline SpectralVectorField minus_projected_divergence(const SymmetricTensorSamples& s, const FourierGrid& g,
                                                      FftBuffer& buf) {
    auto d = spectral::symmetric_tensor_divergence(s, g, buf);
    spectral::leray_project_in_place(d, -1.0);
    return d;
}

}  // namespace detail

/// Q(a,b) = P div(a⊗b + b⊗a), computed on a's grid.
inline SpectralVectorField bilinear_Q(const SpectralVectorField& a, const SpectralVectorField& b,
                                      ProductPolicy policy = ProductPolicy::exact) {
    if (!(a.grid() == b.grid())) throw std::invalid_argument("bilinear_Q: grid mismatch");
    detail::require_divergence_free(a, "bilinear_Q: a");
    detail::require_divergence_free(b, "bilinear_Q: b");
    const auto& g = a.grid();
    const auto ca = content_max_modes(a), cb = content_max_modes(b);
    const auto pc = detail::add(ca, cb);
    if (policy == ProductPolicy::exact && !detail::fits(g, pc))
        throw std::invalid_argument("bilinear_Q: bandwidth overflow, need dims >= " +
                                    detail::dims_string(detail::capacity_need(g, pc)) + ", have " + g.describe());
    SymmetricTensorSamples s;
    s.dims = g.dims();
    FftBuffer buf;
    const auto pa = spectral::sample_components(a, s.dims, buf);
    const auto pb = spectral::sample_components(b, s.dims, buf);
    detail::accumulate_symmetric(s, pa, pb);
    auto q = spectral::leray_project(spectral::symmetric_tensor_divergence(s, g, buf));
    return q;
}

/// Sparse spectra of the three components plus the constants that bound their
/// heat flows: vⁱ(t) has ℓ¹ norm ≤ e^{−t·kmin²ᵢ}·l1ᵢ.
struct HeatFlows {
    std::array<SparseSpectrum, 3> u;
    std::array<double, 3> l1{};       // Σ_k |ûⁱ(k)|
    std::array<double, 3> l1_grad{};  // Σ_k |k|·|ûⁱ(k)|
    std::array<double, 3> kmin2{};    // 0 for a zero component
    // Component i lives in velocity slot i and does not depend on xᵢ.
    bool orthogonal = true;
    // ∂ᵢ uʲ in slot j, for the per-term products (orthogonal data only).
    std::array<std::array<SparseSpectrum, 3>, 3> grad;

    static HeatFlows from(const OrthogonalData& d) {
        HeatFlows h;
        for (int i = 0; i < 3; ++i) {
            auto& s = h.u[i] = SparseSpectrum::from(d.components[i]);
            h.kmin2[i] = s.empty() ? 0.0 : s.kmin2;
            for (std::size_t m = 0; m < s.size(); ++m) {
                double mag2 = 0.0;
                for (const auto& c : s.c)
                    if (!c.empty()) mag2 += std::norm(c[m]);
                h.l1[i] += std::sqrt(mag2);
                h.l1_grad[i] += std::sqrt(mag2 * s.k2[m]);
            }
            for (int c = 0; c < 3; ++c)
                if (c != i && s.has_component(c)) h.orthogonal = false;
            if (s.content[i] != 0) h.orthogonal = false;
        }
        if (!h.orthogonal) return h;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) {
                if (i == j || h.u[j].empty()) continue;
                const auto& src = h.u[j];
                SparseSpectrum out;
                out.c[j].reserve(src.size());
                for (std::size_t m = 0; m < src.size(); ++m) {
                    if (src.k[m][i] == 0) continue;
                    out.k.push_back(src.k[m]);
                    out.k2.push_back(src.k2[m]);
                    out.c[j].push_back(mul_i(double(src.k[m][i]), src.c[j][m]));
                }
                if (out.k.empty()) out.c[j].clear();
                out.finish();
                h.grad[i][j] = std::move(out);
            }
        return h;
    }

    bool active(int i) const { return !u[i].empty(); }

    /// Per-axis content of the product vⁱ⊗vʲ, maximized over active pairs.
    std::array<int, 3> product_content() const {
        std::array<int, 3> c{0, 0, 0};
        for (int i = 0; i < 3; ++i)
            for (int j = i + 1; j < 3; ++j) {
                if (!active(i) || !active(j)) continue;
                const auto s = detail::add(u[i].content, u[j].content);
                for (int a = 0; a < 3; ++a) c[a] = std::max(c[a], s[a]);
            }
        return c;
    }

    /// Decay rate of the ℓ¹ bound on the product of components i and j.
    double pair_rate(int i, int j) const { return kmin2[i] + kmin2[j]; }

    /// ℓ¹ bound on vⁱ·∇vʲ at t = 0. Any L^p norm of the term is at most this times
    /// e^{−t·pair_rate(i,j)}.
    double pair_bound(int i, int j) const { return l1[i] * l1_grad[j]; }

    /// Σ over ordered active pairs of pair_bound·e^{−t·rate}; bounds ‖F(t)‖_∞ and
    /// the per-term sum.
    double sup_bound(double t) const {
        double s = 0.0;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j)
                if (i != j && active(i) && active(j)) s += pair_bound(i, j) * std::exp(-t * pair_rate(i, j));
        return s;
    }

    /// ∫_{t}^∞ sup_bound.
    double tail_bound(double t) const {
        double s = 0.0;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j)
                if (i != j && active(i) && active(j))
                    s += pair_bound(i, j) * std::exp(-t * pair_rate(i, j)) / pair_rate(i, j);
        return s;
    }

    /// Smallest pair decay rate over active pairs (0 when there are none).
    double min_pair_rate() const {
        double r = 0.0;
        for (int i = 0; i < 3; ++i)
            for (int j = i + 1; j < 3; ++j)
                if (active(i) && active(j)) r = r == 0.0 ? pair_rate(i, j) : std::min(r, pair_rate(i, j));
        return r;
    }

    double max_k2() const {
        double r = 0.0;
        for (const auto& s : u) r = std::max(r, s.kmax2);
        return r;
    }
};

/// Smallest grid on which every pairwise product is exact under the 2/3 rule.
inline FourierGrid forcing_grid(const HeatFlows& h) {
    const auto c = h.product_content();
    std::array<int, 3> d{};
    for (int a = 0; a < 3; ++a) d[a] = c[a] == 0 ? 4 : spectral::dealiased_size_for(c[a]);
    return spectral::make_grid(d);
}

inline FourierGrid forcing_grid(const OrthogonalData& d) { return forcing_grid(HeatFlows::from(d)); }

/// Physical samples of vⁱ(t) on dims n.
inline std::array<std::vector<double>, 3> sample_heat_flow(const SparseSpectrum& s, double t, const PhysicalDims& n,
                                                          FftBuffer& buf) {
    return s.sample([t](double k2) { return std::exp(-t * k2); }, n, buf);
}

/// F(t) = −Σ_{i<j} Q(vⁱ(t), vʲ(t)) on g.
inline SpectralVectorField forcing_F(const HeatFlows& h, double t, const FourierGrid& g,
                                     ProductPolicy policy = ProductPolicy::exact) {
    if (!(t >= 0.0)) throw std::invalid_argument("forcing_F requires t >= 0");
    const auto pc = h.product_content();
    if (policy == ProductPolicy::exact && !detail::fits(g, pc))
        throw std::invalid_argument("forcing_F: bandwidth overflow, need dims >= " +
                                    detail::dims_string(detail::capacity_need(g, pc)) + ", have " + g.describe());
    SymmetricTensorSamples s;
    s.dims = g.dims();
    FftBuffer buf;
    std::array<std::array<std::vector<double>, 3>, 3> v;
    auto paired = [&](int i) {
        for (int j = 0; j < 3; ++j)
            if (j != i && h.active(j)) return h.active(i);
        return false;
    };
    for (int i = 0; i < 3; ++i)
        if (paired(i)) v[i] = sample_heat_flow(h.u[i], t, s.dims, buf);
    for (int i = 0; i < 3; ++i)
        for (int j = i + 1; j < 3; ++j)
            if (h.active(i) && h.active(j)) detail::accumulate_symmetric(s, v[i], v[j]);
    if (std::all_of(s.entry.begin(), s.entry.end(), [](const auto& e) { return e.empty(); }))
        return SpectralVectorField(g, true);
    return detail::minus_projected_divergence(s, g, buf);
}

inline SpectralVectorField forcing_F(const OrthogonalData& d, double t, std::optional<FourierGrid> g = std::nullopt,
                                     ProductPolicy policy = ProductPolicy::exact) {
    const auto h = HeatFlows::from(d);
    return forcing_F(h, t, g ? *g : forcing_grid(h), policy);
}

/// How a per-term norm ‖vⁱ ∂ᵢ vʲ‖_{L³} is evaluated.
enum class PerTermPath {
    separable,  // two planar samplings joined along the shared coordinate
    full3d,     // direct sampling of the product on a 3D grid
};

namespace detail {

// mean over all axes but `keep` of |v|³, as a function of the kept coordinate.
inline std::vector<double> cube_profile(const std::vector<double>& v, const PhysicalDims& n, int keep) {
    std::vector<double> out(n[keep], 0.0);
    std::size_t idx = 0;
    for (int a = 0; a < n[0]; ++a)
        for (int b = 0; b < n[1]; ++b)
            for (int c = 0; c < n[2]; ++c, ++idx) {
                const int x = keep == 0 ? a : keep == 1 ? b : c;
                const double m = std::abs(v[idx]);
                out[x] += m * m * m;
            }
    const double w = static_cast<double>(n[keep]) / static_cast<double>(spectral::physical_size(n));
    for (auto& o : out) o *= w;
    return out;
}

}  // namespace detail

/// ‖vⁱ(t) ∂ᵢ vʲ(t)‖_{L³} for orthogonal data (i ≠ j). The term has the single
/// velocity component j.
inline double per_term_l3(const HeatFlows& h, int i, int j, double t, PerTermPath path = PerTermPath::separable,
                          double oversample = 3.0) {
    if (i == j || i < 0 || j < 0 || i > 2 || j > 2) throw std::invalid_argument("per_term_l3 needs i != j in 0..2");
    if (!h.orthogonal) throw std::invalid_argument("per_term_l3 requires orthogonal data");
    const auto& g = h.u[i];
    const auto& d = h.grad[i][j];
    if (g.empty() || d.empty()) return 0.0;
    auto heat = [t](double k2) { return std::exp(-t * k2); };
    FftBuffer buf;
    if (path == PerTermPath::full3d) {
        const auto n = spectral::sampling_dims(detail::add(g.content, d.content), oversample);
        const auto gs = g.sample(heat, n, buf);
        const auto ds = d.sample(heat, n, buf);
        const auto& a = gs[i];
        const auto& b = ds[j];
        double acc = 0.0;
        for (std::size_t x = 0; x < a.size(); ++x) {
            const double m = std::abs(a[x] * b[x]);
            acc += m * m * m;
        }
        return std::cbrt(acc / static_cast<double>(a.size()));
    }
    // g depends on (xⱼ, x_k), ∂ᵢvʲ on (xᵢ, x_k).
    const int k = 3 - i - j;
    auto ng = spectral::sampling_dims(g.content, oversample);
    auto nd = spectral::sampling_dims(d.content, oversample);
    const int nk = std::max(ng[k], nd[k]);
    ng[k] = nd[k] = nk;
    const auto G = detail::cube_profile(g.sample(heat, ng, buf)[i], ng, k);
    const auto H = detail::cube_profile(d.sample(heat, nd, buf)[j], nd, k);
    double acc = 0.0;
    for (int x = 0; x < nk; ++x) acc += G[x] * H[x];
    return std::cbrt(acc / nk);
}

}  // namespace orthoflow::flows
