// Fourier-side machinery: cached FFTW plans per grid, forward/inverse
// real-to-complex transforms, and the spectral operators (gradient,
// divergence, laplacian, Lame operator, mean-zero inverse laplacian,
// 2/3-rule dealiasing, Sobolev norms).
//
// Conventions. Forward transforms are unnormalized; the inverse divides by
// the point count, so unit-amplitude Fourier coefficients correspond to
// f(x) = sum_k fhat_k exp(2 pi i k.x/L). First-derivative symbols are zeroed
// at the Nyquist index (the derivative of the sawtooth mode is not
// representable on the grid), and every operator is built from the same
// symbol tables so composition identities hold to roundoff.
//
// Plans are created with FFTW_ESTIMATE: plan choice is then a pure function
// of the transform shape, which keeps runs bit-reproducible across processes.
#pragma once

#include <fftw3.h>

#include <complex>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <vector>

#include "dragflow/field.hpp"

namespace dragflow {

using cplx = std::complex<double>;

namespace detail {

struct SpectralPlan {
    int dim = 0;
    std::array<std::int64_t, 3> n{1, 1, 1};        // real extents
    std::array<std::int64_t, 3> nc{1, 1, 1};       // complex extents (last axis halved)
    std::int64_t nreal = 0, ncplx = 0;
    std::array<std::vector<double>, 3> kap;        // first-derivative symbol, Nyquist zeroed
    std::array<std::vector<std::int64_t>, 3> kint; // signed integer mode per index
    fftw_plan fwd = nullptr, inv = nullptr;

    ~SpectralPlan() {
        if (fwd) fftw_destroy_plan(fwd);
        if (inv) fftw_destroy_plan(inv);
    }
};

inline const SpectralPlan& plan_for(const Grid& g) {
    static std::mutex mtx;
    static std::map<std::tuple<int, std::int64_t, std::int64_t, std::int64_t, double, double, double>,
                    std::unique_ptr<SpectralPlan>>
        registry;
    std::lock_guard<std::mutex> lock(mtx);
    auto key = std::make_tuple(g.dim(), g.n(0), g.n(1), g.n(2), g.length(0), g.length(1),
                               g.length(2));
    auto it = registry.find(key);
    if (it != registry.end()) return *it->second;

    auto p = std::make_unique<SpectralPlan>();
    p->dim = g.dim();
    for (int a = 0; a < 3; ++a) p->n[a] = g.n(a);
    p->nc = p->n;
    p->nc[g.dim() - 1] = p->n[g.dim() - 1] / 2 + 1;
    p->nreal = p->n[0] * p->n[1] * p->n[2];
    p->ncplx = p->nc[0] * p->nc[1] * p->nc[2];

    for (int a = 0; a < g.dim(); ++a) {
        const std::int64_t na = p->n[a];
        const std::int64_t ca = p->nc[a];
        const double scale = 2.0 * M_PI / g.length(a);
        p->kint[a].resize((std::size_t)ca);
        p->kap[a].resize((std::size_t)ca);
        for (std::int64_t i = 0; i < ca; ++i) {
            std::int64_t k = (a == g.dim() - 1) ? i : (i < na / 2 ? i : i - na);
            p->kint[a][(std::size_t)i] = (i == na / 2 && a != g.dim() - 1) ? -na / 2 : k;
            const bool nyquist = (std::abs(p->kint[a][(std::size_t)i]) == na / 2);
            p->kap[a][(std::size_t)i] = nyquist ? 0.0 : scale * (double)p->kint[a][(std::size_t)i];
        }
    }
    for (int a = g.dim(); a < 3; ++a) {
        p->kint[a].assign(1, 0);
        p->kap[a].assign(1, 0.0);
    }

    // Seed buffers are only used at plan time; execution goes through the
    // new-array interface with FFTW_UNALIGNED so caller buffers are fine.
    std::vector<double> rbuf((std::size_t)p->nreal);
    std::vector<cplx> cbuf((std::size_t)p->ncplx);
    int nint[3];
    for (int a = 0; a < g.dim(); ++a) nint[a] = (int)p->n[a];
    p->fwd = fftw_plan_dft_r2c(g.dim(), nint, rbuf.data(),
                               reinterpret_cast<fftw_complex*>(cbuf.data()),
                               FFTW_ESTIMATE | FFTW_UNALIGNED);
    p->inv = fftw_plan_dft_c2r(g.dim(), nint, reinterpret_cast<fftw_complex*>(cbuf.data()),
                               rbuf.data(), FFTW_ESTIMATE | FFTW_UNALIGNED);
    if (!p->fwd || !p->inv) throw Error("fftw plan creation failed for grid " + g.describe());

    auto& slot = registry[key];
    slot = std::move(p);
    return *slot;
}

}  // namespace detail

// Unnormalized forward transform of grid samples.
inline void fft_forward(const Grid& g, const std::vector<double>& in, std::vector<cplx>& out) {
    const auto& p = detail::plan_for(g);
    out.resize((std::size_t)p.ncplx);
    // FFTW's r2c does not modify its input, but the signature is non-const.
    fftw_execute_dft_r2c(p.fwd, const_cast<double*>(in.data()),
                         reinterpret_cast<fftw_complex*>(out.data()));
}

// Inverse transform with 1/size normalization. Destroys `work`.
inline void fft_inverse(const Grid& g, std::vector<cplx>& work, std::vector<double>& out) {
    const auto& p = detail::plan_for(g);
    out.resize((std::size_t)p.nreal);
    fftw_execute_dft_c2r(p.inv, reinterpret_cast<fftw_complex*>(work.data()), out.data());
    const double s = 1.0 / (double)p.nreal;
    for (double& x : out) x *= s;
}

// Visit every retained complex mode: f(flat, i0, i1, i2) with per-axis table
// indices usable against plan.kap / plan.kint.
template <class F>
inline void for_each_mode(const detail::SpectralPlan& p, F&& f) {
    std::int64_t flat = 0;
    for (std::int64_t i0 = 0; i0 < p.nc[0]; ++i0)
        for (std::int64_t i1 = 0; i1 < p.nc[1]; ++i1)
            for (std::int64_t i2 = 0; i2 < p.nc[2]; ++i2, ++flat) f(flat, i0, i1, i2);
}

// --- operators ---

// Zero every mode with any |k_a| > n_a/3 (the 2/3 rule). Acting twice equals
// acting once; band-limited fields pass through unchanged.
inline void dealias_spectrum(const Grid& g, std::vector<cplx>& sp) {
    const auto& p = detail::plan_for(g);
    for_each_mode(p, [&](std::int64_t flat, std::int64_t i0, std::int64_t i1, std::int64_t i2) {
        const std::int64_t k0 = std::abs(p.kint[0][(std::size_t)i0]);
        const std::int64_t k1 = std::abs(p.kint[1][(std::size_t)i1]);
        const std::int64_t k2 = std::abs(p.kint[2][(std::size_t)i2]);
        if (3 * k0 > p.n[0] || 3 * k1 > p.n[1] || 3 * k2 > p.n[2]) sp[(std::size_t)flat] = 0.0;
    });
}

inline ScalarField dealias(const ScalarField& f) {
    require_finite(f, "dealias");
    std::vector<cplx> sp;
    fft_forward(f.grid, f.v, sp);
    dealias_spectrum(f.grid, sp);
    ScalarField out(f.grid);
    fft_inverse(f.grid, sp, out.v);
    return out;
}

inline VectorField dealias(const VectorField& f) {
    require_finite(f, "dealias");
    VectorField out(f.grid);
    std::vector<cplx> sp;
    for (int a = 0; a < f.grid.dim(); ++a) {
        fft_forward(f.grid, f.comp[a], sp);
        dealias_spectrum(f.grid, sp);
        fft_inverse(f.grid, sp, out.comp[a]);
    }
    return out;
}

inline VectorField gradient(const ScalarField& f) {
    require_finite(f, "gradient");
    const auto& p = detail::plan_for(f.grid);
    std::vector<cplx> sp, work((std::size_t)p.ncplx);
    fft_forward(f.grid, f.v, sp);
    VectorField out(f.grid);
    for (int a = 0; a < f.grid.dim(); ++a) {
        for_each_mode(p, [&](std::int64_t flat, std::int64_t i0, std::int64_t i1, std::int64_t i2) {
            const std::int64_t ia = a == 0 ? i0 : (a == 1 ? i1 : i2);
            work[(std::size_t)flat] = sp[(std::size_t)flat] * cplx(0.0, p.kap[a][(std::size_t)ia]);
        });
        fft_inverse(f.grid, work, out.comp[a]);
    }
    return out;
}

inline ScalarField divergence(const VectorField& f) {
    require_finite(f, "divergence");
    const auto& p = detail::plan_for(f.grid);
    std::vector<cplx> acc((std::size_t)p.ncplx, cplx(0.0, 0.0)), sp;
    for (int a = 0; a < f.grid.dim(); ++a) {
        fft_forward(f.grid, f.comp[a], sp);
        for_each_mode(p, [&](std::int64_t flat, std::int64_t i0, std::int64_t i1, std::int64_t i2) {
            const std::int64_t ia = a == 0 ? i0 : (a == 1 ? i1 : i2);
            acc[(std::size_t)flat] += sp[(std::size_t)flat] * cplx(0.0, p.kap[a][(std::size_t)ia]);
        });
    }
    ScalarField out(f.grid);
    fft_inverse(f.grid, acc, out.v);
    return out;
}

inline ScalarField laplacian(const ScalarField& f) {
    require_finite(f, "laplacian");
    const auto& p = detail::plan_for(f.grid);
    std::vector<cplx> sp;
    fft_forward(f.grid, f.v, sp);
    for_each_mode(p, [&](std::int64_t flat, std::int64_t i0, std::int64_t i1, std::int64_t i2) {
        const double k0 = p.kap[0][(std::size_t)i0];
        const double k1 = p.kap[1][(std::size_t)i1];
        const double k2 = p.kap[2][(std::size_t)i2];
        sp[(std::size_t)flat] *= -(k0 * k0 + k1 * k1 + k2 * k2);
    });
    ScalarField out(f.grid);
    fft_inverse(f.grid, sp, out.v);
    return out;
}

// L v = -mu lap(v) - (mu+lambda) grad(div v); in Fourier space the symbol is
// mu |k|^2 delta_ab + (mu+lambda) k_a k_b.
inline VectorField lame(const VectorField& f, double mu, double lambda) {
    if (!(mu > 0.0))
        throw ConfigError("viscosity must satisfy mu > 0 (got " + std::to_string(mu) + ")");
    if (!(lambda + 2.0 * mu > 0.0))
        throw ConfigError("viscosities must satisfy lambda + 2mu > 0 (got lambda = " +
                          std::to_string(lambda) + ", mu = " + std::to_string(mu) + ")");
    require_finite(f, "lame");
    const int d = f.grid.dim();
    const auto& p = detail::plan_for(f.grid);
    std::array<std::vector<cplx>, 3> sp;
    for (int a = 0; a < d; ++a) fft_forward(f.grid, f.comp[a], sp[a]);
    VectorField out(f.grid);
    std::vector<cplx> work((std::size_t)p.ncplx);
    for (int a = 0; a < d; ++a) {
        for_each_mode(p, [&](std::int64_t flat, std::int64_t i0, std::int64_t i1, std::int64_t i2) {
            const double k[3] = {p.kap[0][(std::size_t)i0], p.kap[1][(std::size_t)i1],
                                 p.kap[2][(std::size_t)i2]};
            const double k2 = k[0] * k[0] + k[1] * k[1] + k[2] * k[2];
            cplx s = mu * k2 * sp[a][(std::size_t)flat];
            for (int b = 0; b < d; ++b)
                s += (mu + lambda) * k[a] * k[b] * sp[b][(std::size_t)flat];
            work[(std::size_t)flat] = s;
        });
        fft_inverse(f.grid, work, out.comp[a]);
    }
    return out;
}

// Solve lap(phi) = f for the unique mean-zero phi; requires mean(f) ~ 0.
// Modes whose full symbol vanishes (the zero mode, and Nyquist-only modes
// outside the derivative band) are mapped to zero.
inline ScalarField invert_laplacian_mean_zero(const ScalarField& f) {
    require_finite(f, "invert_laplacian_mean_zero");
    const double m = mean(f);
    double l2 = 0.0;
    for (double x : f.v) l2 += x * x;
    l2 = std::sqrt(l2 * f.grid.cell_volume());
    if (std::abs(m) * f.grid.volume() > 1e-12 * std::max(l2, 1e-300))
        throw PreconditionError(
            "invert_laplacian_mean_zero: input must have zero mean (residual mean " +
            std::to_string(m) + ")");
    const auto& p = detail::plan_for(f.grid);
    std::vector<cplx> sp;
    fft_forward(f.grid, f.v, sp);
    for_each_mode(p, [&](std::int64_t flat, std::int64_t i0, std::int64_t i1, std::int64_t i2) {
        const double k0 = p.kap[0][(std::size_t)i0];
        const double k1 = p.kap[1][(std::size_t)i1];
        const double k2 = p.kap[2][(std::size_t)i2];
        const double ksq = k0 * k0 + k1 * k1 + k2 * k2;
        sp[(std::size_t)flat] = ksq > 0.0 ? sp[(std::size_t)flat] / (-ksq) : cplx(0.0, 0.0);
    });
    ScalarField out(f.grid);
    fft_inverse(f.grid, sp, out.v);
    return out;
}

// ||f||_{H^s}^2 = |Omega| sum_k (1 + |kappa_k|^2)^s |fhat_k|^2 with unit
// Fourier coefficients; s = 0 recovers the L2 norm by Parseval.
inline double sobolev_norm(const ScalarField& f, double s) {
    require_finite(f, "sobolev_norm");
    const auto& p = detail::plan_for(f.grid);
    std::vector<cplx> sp;
    fft_forward(f.grid, f.v, sp);
    const double inv_n = 1.0 / (double)p.nreal;
    const std::int64_t nlast = p.n[f.grid.dim() - 1];
    double acc = 0.0;
    for_each_mode(p, [&](std::int64_t flat, std::int64_t i0, std::int64_t i1, std::int64_t i2) {
        const std::int64_t ilast = f.grid.dim() == 1 ? i0 : (f.grid.dim() == 2 ? i1 : i2);
        // r2c keeps half the spectrum; interior k_last planes stand for a
        // conjugate pair.
        const double w = (ilast == 0 || 2 * ilast == nlast) ? 1.0 : 2.0;
        const double k0 = p.kap[0][(std::size_t)i0];
        const double k1 = p.kap[1][(std::size_t)i1];
        const double k2 = p.kap[2][(std::size_t)i2];
        const double ksq = k0 * k0 + k1 * k1 + k2 * k2;
        const double a = std::norm(sp[(std::size_t)flat]) * inv_n * inv_n;
        acc += w * std::pow(1.0 + ksq, s) * a;
    });
    return std::sqrt(acc * f.grid.volume());
}

inline double sobolev_norm(const VectorField& f, double s) {
    double acc = 0.0;
    for (int a = 0; a < f.grid.dim(); ++a) {
        ScalarField c;
        c.grid = f.grid;
        c.v = f.comp[a];
        const double na = sobolev_norm(c, s);
        acc += na * na;
    }
    return std::sqrt(acc);
}

inline double l2_norm(const ScalarField& f) { return sobolev_norm(f, 0.0); }

}  // namespace dragflow
