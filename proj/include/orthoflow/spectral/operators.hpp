/// @file operators.hpp
/// @brief Exact Fourier multipliers and dealiased pseudo-spectral products.
#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

#include "orthoflow/spectral/fft.hpp"

namespace orthoflow::spectral {

namespace detail {

template <class Mult>
SpectralVectorField apply_scalar_multiplier(const SpectralVectorField& f, Mult&& m) {
    SpectralVectorField out(f.grid(), f.mean_zero());
    for (int c = 0; c < 3; ++c) {
        if (!f.has_component(c)) continue;
        auto src = f.component(c);
        auto dst = out.component_mut(c);
        for_each_mode(f.grid(), [&](std::size_t i, const Wavevector& k, bool nyq) {
            dst[i] = nyq ? cplx{} : m(k) * src[i];
        });
    }
    return out;
}

}  // namespace detail

/// ∂ₐ f: multiplies every coefficient by i·kₐ.
inline SpectralVectorField derivative(const SpectralVectorField& f, Axis axis) {
    const int a = axis_index(axis);
    return detail::apply_scalar_multiplier(f, [a](const Wavevector& k) { return cplx{0.0, double(k[a])}; });
}

inline SpectralScalarField derivative(const SpectralScalarField& f, Axis axis) {
    const int a = axis_index(axis);
    SpectralScalarField out(f.grid());
    for_each_mode(f.grid(), [&](std::size_t i, const Wavevector& k, bool nyq) {
        out[i] = nyq ? cplx{} : mul_i(double(k[a]), f[i]);
    });
    return out;
}

/// Multiplier |k|^s. Negative s needs a mean-zero field; the zero mode stays zero.
inline SpectralVectorField fractional_laplacian(const SpectralVectorField& f, double s) {
    if (s < 0.0) {
        for (int c = 0; c < 3; ++c)
            if (f.at(c, {0, 0, 0}) != cplx{})
                throw std::invalid_argument("fractional_laplacian with s < 0 requires a mean-zero field");
    }
    return detail::apply_scalar_multiplier(f, [s](const Wavevector& k) {
        const double k2 = norm2(k);
        return cplx{k2 == 0.0 ? 0.0 : std::pow(k2, 0.5 * s), 0.0};
    });
}

/// e^{tΔ}: multiplier e^{-t|k|²}.
inline SpectralVectorField heat_semigroup(const SpectralVectorField& f, double t) {
    if (!(t >= 0.0)) throw std::invalid_argument("heat_semigroup requires t >= 0");
    if (t == 0.0) return f;
    return detail::apply_scalar_multiplier(f, [t](const Wavevector& k) { return cplx{std::exp(-t * norm2(k)), 0.0}; });
}

/// Leray projection I − kkᵀ/|k|² per mode; the zero mode passes through.
/// f ← scale·Pf.
inline void leray_project_in_place(SpectralVectorField& f, double scale = 1.0) {
    std::array<std::span<cplx>, 3> v{f.component_mut(0), f.component_mut(1), f.component_mut(2)};
    for_each_mode(f.grid(), [&](std::size_t i, const Wavevector& k, bool nyq) {
        if (nyq) {
            for (auto& c : v) c[i] = {};
            return;
        }
        const double k2 = norm2(k);
        if (k2 == 0.0) {
            for (auto& c : v) c[i] *= scale;
            return;
        }
        const cplx kdotu = double(k[0]) * v[0][i] + double(k[1]) * v[1][i] + double(k[2]) * v[2][i];
        for (int c = 0; c < 3; ++c) v[c][i] = scale * (v[c][i] - double(k[c]) * kdotu / k2);
    });
}

inline SpectralVectorField leray_project(const SpectralVectorField& f) {
    SpectralVectorField out(f.grid(), f.mean_zero());
    std::array<std::span<const cplx>, 3> in{f.component(0), f.component(1), f.component(2)};
    std::array<std::span<cplx>, 3> dst{out.component_mut(0), out.component_mut(1), out.component_mut(2)};
    for_each_mode(f.grid(), [&](std::size_t i, const Wavevector& k, bool nyq) {
        if (nyq) {
            for (auto& d : dst) d[i] = {};
            return;
        }
        cplx u[3];
        for (int c = 0; c < 3; ++c) u[c] = in[c].empty() ? cplx{} : in[c][i];
        const double k2 = norm2(k);
        if (k2 == 0.0) {
            for (int c = 0; c < 3; ++c) dst[c][i] = u[c];
            return;
        }
        const cplx kdotu = double(k[0]) * u[0] + double(k[1]) * u[1] + double(k[2]) * u[2];
        for (int c = 0; c < 3; ++c) dst[c][i] = u[c] - double(k[c]) * kdotu / k2;
    });
    return out;
}

/// Spectral divergence Σₐ i kₐ ûₐ.
inline SpectralScalarField divergence(const SpectralVectorField& f) {
    SpectralScalarField out(f.grid());
    for (int c = 0; c < 3; ++c) {
        if (!f.has_component(c)) continue;
        auto src = f.component(c);
        for_each_mode(f.grid(), [&](std::size_t i, const Wavevector& k, bool nyq) {
            if (!nyq) out[i] += mul_i(double(k[c]), src[i]);
        });
    }
    return out;
}

/// max over modes of |k·û(k)| / |k|, relative to ‖f‖₂ (0 for the zero field).
inline double divergence_residual(const SpectralVectorField& f) {
    const double scale = f.l2();
    if (scale == 0.0) return 0.0;
    double worst = 0.0;
    for_each_mode(f.grid(), [&](std::size_t i, const Wavevector& k, bool nyq) {
        const double k2 = norm2(k);
        if (nyq || k2 == 0.0) return;
        cplx d{};
        for (int c = 0; c < 3; ++c)
            if (f.has_component(c)) d += double(k[c]) * f.component(c)[i];
        worst = std::max(worst, std::abs(d) / std::sqrt(k2));
    });
    return worst / scale;
}

/// Zeroes every mode with |kₐ| > ⌊nₐ/3⌋ on some axis (2/3 rule), in place.
inline void dealias_in_place(const FourierGrid& g, std::span<cplx> c) {
    if (c.empty()) return;
    for_each_mode(g, [&](std::size_t i, const Wavevector& k, bool nyq) {
        if (nyq || std::abs(k[0]) > g.dealias_cutoff(0) || std::abs(k[1]) > g.dealias_cutoff(1) ||
            std::abs(k[2]) > g.dealias_cutoff(2))
            c[i] = {};
    });
}

inline void dealias_in_place(SpectralVectorField& f) {
    for (int c = 0; c < 3; ++c)
        if (f.has_component(c)) dealias_in_place(f.grid(), f.component_mut(c));
}

/// Smallest even grid size whose 2/3 cutoff holds the given combined band limit.
inline int dealiased_size_for(int band_limit) {
    int n = std::max(4, 3 * band_limit);
    return n + (n % 2);
}

/// Throws with the required grid when products of content `ma` and `mb` exceed
/// the 2/3-rule capacity of `g`.
inline void require_product_capacity(const FourierGrid& g, const std::array<int, 3>& ma,
                                     const std::array<int, 3>& mb) {
    bool ok = true;
    std::array<int, 3> need{};
    for (int a = 0; a < 3; ++a) {
        need[a] = std::max(g.dim(a), dealiased_size_for(ma[a] + mb[a]));
        if (ma[a] + mb[a] > g.dealias_cutoff(a)) ok = false;
    }
    if (!ok)
        throw std::invalid_argument("grid too small for dealiased product: need dims >= " +
                                    std::to_string(need[0]) + "x" + std::to_string(need[1]) + "x" +
                                    std::to_string(need[2]) + ", have " + g.describe());
}

/// Pointwise product of two real scalar fields, exact on all retained modes.
inline SpectralScalarField dealiased_product(const SpectralScalarField& a, const SpectralScalarField& b) {
    if (!(a.grid() == b.grid())) throw std::invalid_argument("dealiased_product: grid mismatch");
    const auto& g = a.grid();
    require_product_capacity(g, content_max_modes(g, a.coeffs()), content_max_modes(g, b.coeffs()));
    const PhysicalDims n = g.dims();
    std::vector<double> pa, pb;
    FftBuffer buf;
    to_physical_pair(g, a.coeffs(), b.coeffs(), n, pa, pb, buf);
    for (std::size_t i = 0; i < pa.size(); ++i) pa[i] *= pb[i];
    SpectralScalarField out(g);
    from_physical_pair(pa, {}, n, g, out.coeffs(), {}, buf);
    dealias_in_place(g, out.coeffs());
    return out;
}

/// Physical samples of the three velocity components on a uniform grid.
struct PhysicalVectorField {
    PhysicalDims dims{};
    std::array<std::vector<double>, 3> comp;  // empty ⇒ identically zero
    double imaginary_residue = 0.0;
};

/// Samples on dims × oversample per axis. Throws when the imaginary residue of
/// the inverse transform exceeds 1e-12 × amplitude scale (non-Hermitian input).
inline PhysicalVectorField evaluate_physical(const SpectralVectorField& f, int oversample) {
    if (oversample < 1) throw std::invalid_argument("oversample must be >= 1");
    PhysicalVectorField out;
    const auto& d = f.grid().dims();
    out.dims = {d[0] * oversample, d[1] * oversample, d[2] * oversample};
    const long double bytes = static_cast<long double>(physical_size(out.dims)) * 16.0L;
    if (bytes > static_cast<long double>(memory_cap_bytes()))
        throw std::invalid_argument("evaluate_physical: oversampled grid exceeds memory cap");
    double amp = 0.0, resid = 0.0;
    FftBuffer buf;
    for (int c = 0; c < 3; ++c) {
        if (!f.has_component(c)) continue;
        for (const auto& v : f.component(c)) amp += std::abs(v);
        scatter_pair(f.grid(), f.component(c), {}, out.dims, buf);
        FftPlans::instance().backward(out.dims, buf);
        auto& dst = out.comp[c];
        dst.resize(buf.size());
        for (std::size_t i = 0; i < buf.size(); ++i) {
            dst[i] = buf[i].real();
            resid = std::max(resid, std::abs(buf[i].imag()));
        }
    }
    out.imaginary_residue = resid;
    if (resid > 1e-12 * std::max(amp, 1e-300))
        throw std::invalid_argument("evaluate_physical: input is not Hermitian (imaginary residue " +
                                    std::to_string(resid) + ")");
    return out;
}

/// Samples all components on dims `n` using paired transforms.
inline std::array<std::vector<double>, 3> sample_components(const SpectralVectorField& f, const PhysicalDims& n,
                                                           FftBuffer& buf) {
    std::array<std::vector<double>, 3> out;
    std::array<int, 3> present{};
    int np = 0;
    for (int c = 0; c < 3; ++c)
        if (f.has_component(c)) present[np++] = c;
    for (int j = 0; j < np; j += 2) {
        if (j + 1 < np) {
            to_physical_pair(f.grid(), f.component(present[j]), f.component(present[j + 1]), n, out[present[j]],
                             out[present[j + 1]], buf);
        } else {
            std::vector<double> dummy;
            to_physical_pair(f.grid(), f.component(present[j]), {}, n, out[present[j]], dummy, buf);
        }
    }
    return out;
}

/// Symmetric tensor stored as its six physical entries (11, 22, 33, 12, 13, 23).
struct SymmetricTensorSamples {
    PhysicalDims dims{};
    std::array<std::vector<double>, 6> entry;  // empty ⇒ zero

    static constexpr int slot(int l, int m) {
        if (l == m) return l;
        const int lo = l < m ? l : m, hi = l < m ? m : l;
        return lo == 0 ? (hi == 1 ? 3 : 4) : 5;
    }
    static constexpr std::array<int, 2> indices(int e) {
        constexpr int l[6] = {0, 1, 2, 0, 0, 1}, m[6] = {0, 1, 2, 1, 2, 2};
        return {l[e], m[e]};
    }
};

/// Spectral divergence (div S)_l = Σ_m ∂_m S_lm of a physical symmetric tensor,
/// gathered onto `g` and dealiased.
inline SpectralVectorField symmetric_tensor_divergence(const SymmetricTensorSamples& s, const FourierGrid& g,
                                                       FftBuffer& buf) {
    std::array<int, 6> present{};
    int np = 0;
    for (int e = 0; e < 6; ++e)
        if (!s.entry[e].empty()) present[np++] = e;
    SpectralVectorField out(g, true);
    if (np == 0) return out;
    std::array<cplx*, 3> dst{};
    for (int e = 0; e < 6; ++e) {
        if (s.entry[e].empty()) continue;
        const auto [l, m] = SymmetricTensorSamples::indices(e);
        if (!dst[l]) dst[l] = out.component_mut(l).data();
        if (!dst[m]) dst[m] = out.component_mut(m).data();
    }

    // Storage indices that survive dealiasing and fit the sampling grid, with
    // the physical slots of ±k.
    struct Axis {
        std::vector<int> i, k, pos, neg;
    };
    const auto& n = s.dims;
    std::array<Axis, 3> ax;
    for (int a = 0; a < 3; ++a) {
        const auto t = detail::slot_table(g, a, n[a]);
        for (int i = 0; i < g.dim(a); ++i) {
            const int k = g.wavenumber(a, i);
            if (t[i] < 0 || g.is_nyquist(a, i) || std::abs(k) > g.dealias_cutoff(a)) continue;
            ax[a].i.push_back(i);
            ax[a].k.push_back(k);
            ax[a].pos.push_back(t[i]);
            ax[a].neg.push_back(t[i] == 0 ? 0 : n[a] - t[i]);
        }
    }

    const std::size_t nphys = physical_size(n);
    const double scale = 1.0 / static_cast<double>(nphys);
    buf.resize(nphys);
    const auto& d = g.dims();
    for (int j = 0; j < np; j += 2) {
        const int ea = present[j];
        const int eb = j + 1 < np ? present[j + 1] : -1;
        const double* sa = s.entry[ea].data();
        const double* sb = eb >= 0 ? s.entry[eb].data() : nullptr;
        for (std::size_t x = 0; x < nphys; ++x) buf[x] = cplx{sa[x], sb ? sb[x] : 0.0};
        FftPlans::instance().forward(n, buf);
        const cplx* z = buf.data();
        const auto [la, ma] = SymmetricTensorSamples::indices(ea);
        std::array<int, 2> lb{-1, -1};
        if (eb >= 0) {
            const auto [l2, m2] = SymmetricTensorSamples::indices(eb);
            lb = {l2, m2};
        }
        for (std::size_t a1 = 0; a1 < ax[0].i.size(); ++a1)
            for (std::size_t a2 = 0; a2 < ax[1].i.size(); ++a2) {
                const std::size_t row = (static_cast<std::size_t>(ax[0].i[a1]) * d[1] + ax[1].i[a2]) * d[2];
                const std::size_t prow = (static_cast<std::size_t>(ax[0].pos[a1]) * n[1] + ax[1].pos[a2]) * n[2];
                const std::size_t nrow = (static_cast<std::size_t>(ax[0].neg[a1]) * n[1] + ax[1].neg[a2]) * n[2];
                for (std::size_t a3 = 0; a3 < ax[2].i.size(); ++a3) {
                    const std::size_t idx = row + ax[2].i[a3];
                    const Wavevector k{ax[0].k[a1], ax[1].k[a2], ax[2].k[a3]};
                    const cplx zp = z[prow + ax[2].pos[a3]];
                    cplx ha, hb;
                    if (sb) {
                        const cplx zc = std::conj(z[nrow + ax[2].neg[a3]]);
                        ha = 0.5 * scale * (zp + zc);
                        hb = mul_i(-0.5 * scale, zp - zc);
                    } else {
                        ha = zp * scale;
                    }
                    // S_lm feeds (div S)_l through ∂_m and, off the diagonal, (div S)_m through ∂_l.
                    dst[la][idx] += mul_i(double(k[ma]), ha);
                    if (la != ma) dst[ma][idx] += mul_i(double(k[la]), ha);
                    if (sb) {
                        dst[lb[0]][idx] += mul_i(double(k[lb[1]]), hb);
                        if (lb[0] != lb[1]) dst[lb[1]][idx] += mul_i(double(k[lb[0]]), hb);
                    }
                }
            }
    }
    return out;
}

}  // namespace orthoflow::spectral
