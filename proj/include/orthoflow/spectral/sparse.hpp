/// @file sparse.hpp
/// @brief Compact list of the nonzero modes of a field, for repeated evaluation
/// under radial multipliers (heat flow, |k|^s, dyadic shells) without
/// re-scanning the dense storage grid.
#pragma once

#include <algorithm>
#include <cmath>
#include <limits>

#include "orthoflow/spectral/fft.hpp"

namespace orthoflow::spectral {

struct SparseSpectrum {
    std::vector<Wavevector> k;
    std::vector<double> k2;
    std::array<std::vector<cplx>, 3> c;  // per mode; empty ⇒ zero component
    std::array<int, 3> content{0, 0, 0};
    double kmin2 = std::numeric_limits<double>::infinity();  // over nonzero k
    double kmax2 = 0.0;
    bool nonnegative_real = true;  // every coefficient real and ≥ 0

    std::size_t size() const { return k.size(); }
    bool empty() const { return k.empty(); }
    bool has_component(int comp) const { return !c[comp].empty(); }

    static SparseSpectrum from(const SpectralVectorField& f) {
        SparseSpectrum s;
        const auto& g = f.grid();
        for_each_mode(g, [&](std::size_t i, const Wavevector& kv, bool nyq) {
            if (nyq) return;
            bool any = false;
            for (int comp = 0; comp < 3; ++comp)
                if (f.has_component(comp) && f.component(comp)[i] != cplx{}) any = true;
            if (!any) return;
            s.k.push_back(kv);
            s.k2.push_back(norm2(kv));
        });
        for (int comp = 0; comp < 3; ++comp) {
            if (!f.has_component(comp)) continue;
            auto src = f.component(comp);
            bool nonzero = false;
            std::vector<cplx> v;
            v.reserve(s.k.size());
            for (const auto& kv : s.k) {
                const cplx x = src[*g.index_of(kv)];
                v.push_back(x);
                nonzero = nonzero || x != cplx{};
            }
            if (nonzero) s.c[comp] = std::move(v);
        }
        s.finish();
        return s;
    }

    static SparseSpectrum from_scalar(const FourierGrid& g, std::span<const cplx> data) {
        SpectralVectorField f(g, false);
        f.set_component(0, std::vector<cplx>(data.begin(), data.end()));
        return from(f);
    }

    void finish() {
        content = {0, 0, 0};
        kmin2 = std::numeric_limits<double>::infinity();
        kmax2 = 0.0;
        nonnegative_real = true;
        for (std::size_t m = 0; m < k.size(); ++m) {
            for (int a = 0; a < 3; ++a) content[a] = std::max(content[a], std::abs(k[m][a]));
            if (k2[m] > 0.0) kmin2 = std::min(kmin2, k2[m]);
            kmax2 = std::max(kmax2, k2[m]);
        }
        for (const auto& v : c)
            for (const auto& x : v)
                if (x.imag() != 0.0 || x.real() < 0.0) nonnegative_real = false;
    }

    /// Applies a real radial multiplier m(|k|²) and returns a new spectrum.
    /// Modes whose weight is exactly zero are dropped.
    template <class Mult>
    SparseSpectrum multiplied(Mult&& mult) const {
        SparseSpectrum out;
        for (int comp = 0; comp < 3; ++comp)
            if (!c[comp].empty()) out.c[comp].reserve(k.size());
        for (std::size_t m = 0; m < k.size(); ++m) {
            const double w = mult(k2[m]);
            if (w == 0.0) continue;
            out.k.push_back(k[m]);
            out.k2.push_back(k2[m]);
            for (int comp = 0; comp < 3; ++comp)
                if (!c[comp].empty()) out.c[comp].push_back(w * c[comp][m]);
        }
        out.finish();
        return out;
    }

    /// Σ over modes of |c|·m(|k|²) per component.
    template <class Mult>
    std::array<double, 3> weighted_l1(Mult&& mult) const {
        std::array<double, 3> s{0, 0, 0};
        for (int comp = 0; comp < 3; ++comp) {
            if (c[comp].empty()) continue;
            for (std::size_t m = 0; m < k.size(); ++m) s[comp] += std::abs(c[comp][m]) * mult(k2[m]);
        }
        return s;
    }

    /// Scatters components (ca, cb) times m(|k|²) into buf on physical dims n
    /// as ca + i·cb; ca or cb may be -1 for "none".
    template <class Mult>
    void scatter_pair(int ca, int cb, Mult&& mult, const PhysicalDims& n, FftBuffer& buf) const {
        buf.resize(physical_size(n));
        buf.zero();
        const bool ha = ca >= 0 && has_component(ca), hb = cb >= 0 && has_component(cb);
        for (std::size_t m = 0; m < k.size(); ++m) {
            const int s0 = detail::physical_slot(k[m][0], n[0]);
            const int s1 = detail::physical_slot(k[m][1], n[1]);
            const int s2 = detail::physical_slot(k[m][2], n[2]);
            if (s0 < 0 || s1 < 0 || s2 < 0)
                throw std::invalid_argument("physical sampling grid too coarse for spectrum content");
            const double w = mult(k2[m]);
            cplx v{};
            if (ha) v += w * c[ca][m];
            if (hb) v += mul_i(1.0, w * c[cb][m]);
            buf[(static_cast<std::size_t>(s0) * n[1] + s1) * n[2] + s2] = v;
        }
    }

    /// Physical samples of every present component, times m(|k|²).
    template <class Mult>
    std::array<std::vector<double>, 3> sample(Mult&& mult, const PhysicalDims& n, FftBuffer& buf) const {
        std::array<std::vector<double>, 3> out;
        std::array<int, 3> present{};
        int np = 0;
        for (int comp = 0; comp < 3; ++comp)
            if (has_component(comp)) present[np++] = comp;
        for (int j = 0; j < np; j += 2) {
            const int ca = present[j], cb = j + 1 < np ? present[j + 1] : -1;
            scatter_pair(ca, cb, mult, n, buf);
            FftPlans::instance().backward(n, buf);
            out[ca].resize(buf.size());
            for (std::size_t i = 0; i < buf.size(); ++i) out[ca][i] = buf[i].real();
            if (cb >= 0) {
                out[cb].resize(buf.size());
                for (std::size_t i = 0; i < buf.size(); ++i) out[cb][i] = buf[i].imag();
            }
        }
        return out;
    }
};

inline constexpr auto unit_multiplier = [](double) { return 1.0; };

}  // namespace orthoflow::spectral
