// The coupled two-phase model: a pressureless-viscosity-free isothermal
// Euler phase (density rho, velocity u, pressure = rho) and an isentropic
// Navier-Stokes phase (density n, velocity v, pressure n^gamma, Lame
// viscosity), exchanging momentum through the drag rho (u - v).
//
// Two equivalent formulations are supported:
//   primitive    slots hold (rho, u, n, v) with physical densities;
//   log_density  slots hold (h = ln rho, u, n - 1, v), i.e. the Euler
//                density is stored as its log and the NS density as a
//                perturbation around 1.
//
// Right-hand sides evaluate velocity-form equations pseudo-spectrally with
// 2/3-rule dealiasing applied to every nonlinear slot. Linear terms are left
// untouched; since the dealiased slots keep the state band-limited, this
// dealiases quadratic products exactly.
#pragma once

#include <cmath>
#include <sstream>

#include "dragflow/field.hpp"
#include "dragflow/spectral.hpp"

namespace dragflow {

struct FluidParams {
    double gamma = 2.0;   // NS pressure exponent, > 1
    double mu = 0.1;      // shear viscosity, > 0
    double lambda = 0.0;  // bulk-related viscosity, lambda + 2mu > 0
    double vacuum_floor = 1e-8;

    static FluidParams make(double gamma, double mu, double lambda,
                            double vacuum_floor = 1e-8) {
        if (!(gamma > 1.0)) {
            std::ostringstream os;
            os << "pressure exponent must satisfy gamma > 1 (got " << gamma << ")";
            throw ConfigError(os.str());
        }
        if (!(mu > 0.0)) {
            std::ostringstream os;
            os << "viscosity must satisfy mu > 0 (got " << mu << ")";
            throw ConfigError(os.str());
        }
        if (!(lambda + 2.0 * mu > 0.0)) {
            std::ostringstream os;
            os << "viscosities must satisfy lambda + 2mu > 0 (got lambda = " << lambda
               << ", mu = " << mu << ")";
            throw ConfigError(os.str());
        }
        if (!(vacuum_floor > 0.0)) throw ConfigError("vacuum_floor must be positive");
        FluidParams p;
        p.gamma = gamma;
        p.mu = mu;
        p.lambda = lambda;
        p.vacuum_floor = vacuum_floor;
        return p;
    }
};

enum class Formulation { primitive, log_density };

inline const char* to_string(Formulation f) {
    return f == Formulation::primitive ? "primitive" : "log_density";
}

// Time plus the four unknowns. Slot meaning depends on `form`; see header
// comment. density_e/velocity_e are the Euler phase, density_ns/velocity_ns
// the Navier-Stokes phase.
struct FluidState {
    Formulation form = Formulation::primitive;
    double time = 0.0;
    ScalarField density_e;
    VectorField velocity_e;
    ScalarField density_ns;
    VectorField velocity_ns;

    const Grid& grid() const { return density_e.grid; }

    static FluidState equilibrium(const Grid& g, Formulation form = Formulation::primitive) {
        FluidState s;
        s.form = form;
        s.density_e = ScalarField(g, form == Formulation::primitive ? 1.0 : 0.0);
        s.velocity_e = VectorField(g);
        s.density_ns = ScalarField(g, form == Formulation::primitive ? 1.0 : 0.0);
        s.velocity_ns = VectorField(g);
        return s;
    }
};

// Slot-aligned time derivatives.
struct FluidRhs {
    ScalarField d_density_e;
    VectorField d_velocity_e;
    ScalarField d_density_ns;
    VectorField d_velocity_ns;
};

// Physical densities regardless of formulation: (rho, u, N, v) with
// rho = exp(h) and N = n + 1 in the log form. Velocities are shared.
struct PrimitiveView {
    ScalarField rho;
    const VectorField* u;
    ScalarField n;
    const VectorField* v;
};

inline PrimitiveView primitive_view(const FluidState& s) {
    PrimitiveView pv;
    pv.u = &s.velocity_e;
    pv.v = &s.velocity_ns;
    if (s.form == Formulation::primitive) {
        pv.rho = s.density_e;
        pv.n = s.density_ns;
    } else {
        pv.rho = ScalarField(s.grid());
        pv.n = ScalarField(s.grid());
        for (std::int64_t i = 0; i < s.grid().size(); ++i) {
            pv.rho[i] = std::exp(s.density_e[i]);
            pv.n[i] = s.density_ns[i] + 1.0;
        }
    }
    return pv;
}

inline FluidState to_log(const FluidState& s) {
    if (s.form == Formulation::log_density) return s;
    FluidState out = s;
    out.form = Formulation::log_density;
    for (std::int64_t i = 0; i < s.grid().size(); ++i) {
        if (!(s.density_e[i] > 0.0))
            throw VacuumError("to_log: nonpositive Euler density", s.density_e[i], i);
        out.density_e[i] = std::log(s.density_e[i]);
        out.density_ns[i] = s.density_ns[i] - 1.0;
    }
    return out;
}

inline FluidState to_primitive(const FluidState& s) {
    if (s.form == Formulation::primitive) return s;
    FluidState out = s;
    out.form = Formulation::primitive;
    for (std::int64_t i = 0; i < s.grid().size(); ++i) {
        out.density_e[i] = std::exp(s.density_e[i]);
        out.density_ns[i] = s.density_ns[i] + 1.0;
    }
    return out;
}

// p(n) = n^gamma, elementwise. Requires positive density.
inline ScalarField pressure(const ScalarField& n, double gamma) {
    require_finite(n, "pressure");
    std::int64_t bad = -1;
    double worst = 0.0;
    for (std::int64_t i = 0; i < n.size(); ++i)
        if (!(n[i] > 0.0) && (bad < 0 || n[i] < worst)) {
            bad = i;
            worst = n[i];
        }
    if (bad >= 0) {
        std::ostringstream os;
        os << "pressure: nonpositive density " << worst << " at index " << bad;
        throw VacuumError(os.str(), worst, bad);
    }
    ScalarField p(n.grid);
    for (std::int64_t i = 0; i < n.size(); ++i) p[i] = std::pow(n[i], gamma);
    return p;
}

// rho (u - v), the momentum exchanged between the phases.
inline VectorField drag(const ScalarField& rho, const VectorField& u, const VectorField& v) {
    require_same_grid(rho.grid, u.grid, "drag");
    require_same_grid(rho.grid, v.grid, "drag");
    require_finite(rho, "drag");
    require_finite(u, "drag");
    require_finite(v, "drag");
    VectorField out(rho.grid);
    for (int a = 0; a < rho.grid.dim(); ++a)
        for (std::int64_t i = 0; i < rho.size(); ++i)
            out.comp[a][(std::size_t)i] = rho[i] * (u.comp[a][(std::size_t)i] - v.comp[a][(std::size_t)i]);
    return out;
}

namespace detail {

inline void check_floor(const std::vector<double>& dens, double floor, const char* which) {
    std::int64_t arg = 0;
    const double m = min_value(dens, &arg);
    if (!(m >= floor)) {
        std::ostringstream os;
        os << which << " density " << m << " at index " << arg << " below vacuum floor "
           << floor;
        throw VacuumError(os.str(), m, arg);
    }
}

// n^{gamma-2}, with the common gamma = 2 case short-circuited.
inline double dens_pow(double n, double gamma) {
    if (gamma == 2.0) return 1.0;
    return std::pow(n, gamma - 2.0);
}

struct RhsWorkspace {
    const Grid& g;
    const detail::SpectralPlan& p;
    const int d;
    const std::int64_t sz;
    std::vector<cplx> spec, acc;
    explicit RhsWorkspace(const Grid& grid)
        : g(grid), p(detail::plan_for(grid)), d(grid.dim()), sz(grid.size()),
          spec((std::size_t)p.ncplx), acc((std::size_t)p.ncplx) {}

    // inverse transform of i kappa_a * spectrum
    void deriv(const std::vector<cplx>& sp, int a, std::vector<double>& out) {
        for_each_mode(p, [&](std::int64_t flat, std::int64_t i0, std::int64_t i1, std::int64_t i2) {
            const std::int64_t ia = a == 0 ? i0 : (a == 1 ? i1 : i2);
            spec[(std::size_t)flat] = sp[(std::size_t)flat] * cplx(0.0, p.kap[a][(std::size_t)ia]);
        });
        fft_inverse(g, spec, out);
    }

    // -div of the dealiased transform of the product fields w_a (in place of
    // forming the product's physical-space dealiasing separately).
    void neg_div_dealiased(const std::array<std::vector<double>, 3>& w, std::vector<double>& out) {
        std::fill(acc.begin(), acc.end(), cplx(0.0, 0.0));
        for (int a = 0; a < d; ++a) {
            fft_forward(g, w[a], spec);
            for_each_mode(p, [&](std::int64_t flat, std::int64_t i0, std::int64_t i1, std::int64_t i2) {
                const std::int64_t ia = a == 0 ? i0 : (a == 1 ? i1 : i2);
                acc[(std::size_t)flat] -= spec[(std::size_t)flat] * cplx(0.0, p.kap[a][(std::size_t)ia]);
            });
        }
        dealias_spectrum(g, acc);
        fft_inverse(g, acc, out);
    }

    void dealias_inplace(std::vector<double>& f) {
        fft_forward(g, f, spec);
        dealias_spectrum(g, spec);
        fft_inverse(g, spec, f);
    }

    // Lame operator applied through the spectra of v's components.
    void lame_comp(const std::array<std::vector<cplx>, 3>& vh, double mu, double lambda, int a,
                   std::vector<double>& out) {
        for_each_mode(p, [&](std::int64_t flat, std::int64_t i0, std::int64_t i1, std::int64_t i2) {
            const double k[3] = {p.kap[0][(std::size_t)i0], p.kap[1][(std::size_t)i1],
                                 p.kap[2][(std::size_t)i2]};
            const double k2 = k[0] * k[0] + k[1] * k[1] + k[2] * k[2];
            cplx s = mu * k2 * vh[a][(std::size_t)flat];
            for (int b = 0; b < d; ++b) s += (mu + lambda) * k[a] * k[b] * vh[b][(std::size_t)flat];
            spec[(std::size_t)flat] = s;
        });
        fft_inverse(g, spec, out);
    }
};

}  // namespace detail

// Velocity-form primitive equations:
//   dt rho = -div(rho u)
//   dt u   = -(u.grad) u - grad(rho)/rho - (u - v)
//   dt n   = -div(n v)
//   dt v   = -(v.grad) v - grad(p(n))/n - (L v)/n + (rho/n)(u - v)
// The pressure term is evaluated as gamma n^{gamma-2} grad n.
inline FluidRhs rhs_primitive(const FluidState& s, const FluidParams& par) {
    if (s.form != Formulation::primitive)
        throw PreconditionError("rhs_primitive: state is not in primitive form");
    const Grid& g = s.grid();
    require_same_grid(g, s.density_ns.grid, "rhs_primitive");
    require_same_grid(g, s.velocity_e.grid, "rhs_primitive");
    require_same_grid(g, s.velocity_ns.grid, "rhs_primitive");
    require_finite(s.density_e, "rhs_primitive");
    require_finite(s.velocity_e, "rhs_primitive");
    require_finite(s.density_ns, "rhs_primitive");
    require_finite(s.velocity_ns, "rhs_primitive");
    detail::check_floor(s.density_e.v, par.vacuum_floor, "Euler");
    detail::check_floor(s.density_ns.v, par.vacuum_floor, "NS");

    detail::RhsWorkspace w(g);
    const int d = w.d;
    const std::int64_t sz = w.sz;
    const auto& rho = s.density_e.v;
    const auto& n = s.density_ns.v;
    const auto& u = s.velocity_e.comp;
    const auto& v = s.velocity_ns.comp;

    std::vector<cplx> rho_h, n_h;
    std::array<std::vector<cplx>, 3> u_h, v_h;
    fft_forward(g, rho, rho_h);
    fft_forward(g, n, n_h);
    for (int a = 0; a < d; ++a) {
        fft_forward(g, u[a], u_h[a]);
        fft_forward(g, v[a], v_h[a]);
    }

    std::array<std::vector<double>, 3> grad_rho, grad_n, lame_v;
    std::array<std::array<std::vector<double>, 3>, 3> grad_u, grad_v;
    for (int a = 0; a < d; ++a) {
        w.deriv(rho_h, a, grad_rho[a]);
        w.deriv(n_h, a, grad_n[a]);
        w.lame_comp(v_h, par.mu, par.lambda, a, lame_v[a]);
        for (int b = 0; b < d; ++b) {
            w.deriv(u_h[a], b, grad_u[a][b]);
            w.deriv(v_h[a], b, grad_v[a][b]);
        }
    }

    FluidRhs r;
    r.d_density_e = ScalarField(g);
    r.d_density_ns = ScalarField(g);
    r.d_velocity_e = VectorField(g);
    r.d_velocity_ns = VectorField(g);

    std::array<std::vector<double>, 3> prod;
    for (int a = 0; a < d; ++a) prod[a].resize((std::size_t)sz);

    for (int a = 0; a < d; ++a)
        for (std::int64_t i = 0; i < sz; ++i)
            prod[a][(std::size_t)i] = rho[(std::size_t)i] * u[a][(std::size_t)i];
    w.neg_div_dealiased(prod, r.d_density_e.v);

    for (int a = 0; a < d; ++a)
        for (std::int64_t i = 0; i < sz; ++i)
            prod[a][(std::size_t)i] = n[(std::size_t)i] * v[a][(std::size_t)i];
    w.neg_div_dealiased(prod, r.d_density_ns.v);

    for (int a = 0; a < d; ++a) {
        auto& slot = r.d_velocity_e.comp[a];
        slot.resize((std::size_t)sz);
        for (std::int64_t i = 0; i < sz; ++i) {
            double adv = 0.0;
            for (int b = 0; b < d; ++b) adv += u[b][(std::size_t)i] * grad_u[a][b][(std::size_t)i];
            slot[(std::size_t)i] = -adv - grad_rho[a][(std::size_t)i] / rho[(std::size_t)i];
        }
        w.dealias_inplace(slot);
        // drag is linear in the band-limited state; keep it exact
        for (std::int64_t i = 0; i < sz; ++i)
            slot[(std::size_t)i] -= u[a][(std::size_t)i] - v[a][(std::size_t)i];
    }

    for (int a = 0; a < d; ++a) {
        auto& slot = r.d_velocity_ns.comp[a];
        slot.resize((std::size_t)sz);
        for (std::int64_t i = 0; i < sz; ++i) {
            const double ni = n[(std::size_t)i];
            double adv = 0.0;
            for (int b = 0; b < d; ++b) adv += v[b][(std::size_t)i] * grad_v[a][b][(std::size_t)i];
            slot[(std::size_t)i] = -adv - par.gamma * detail::dens_pow(ni, par.gamma) * grad_n[a][(std::size_t)i]
                                   - lame_v[a][(std::size_t)i] / ni
                                   + (rho[(std::size_t)i] / ni) *
                                         (u[a][(std::size_t)i] - v[a][(std::size_t)i]);
        }
        w.dealias_inplace(slot);
    }
    return r;
}

// Log-density form:
//   dt h = -u.grad h - div u
//   dt u = -(u.grad) u - grad h - (u - v)
//   dt n = -div((n+1) v)
//   dt v = -(v.grad) v - gamma (n+1)^{gamma-2} grad n - (L v)/(n+1)
//          + e^h (u - v)/(n+1)
inline FluidRhs rhs_log(const FluidState& s, const FluidParams& par) {
    if (s.form != Formulation::log_density)
        throw PreconditionError("rhs_log: state is not in log_density form");
    const Grid& g = s.grid();
    require_finite(s.density_e, "rhs_log");
    require_finite(s.velocity_e, "rhs_log");
    require_finite(s.density_ns, "rhs_log");
    require_finite(s.velocity_ns, "rhs_log");

    detail::RhsWorkspace w(g);
    const int d = w.d;
    const std::int64_t sz = w.sz;
    const auto& h = s.density_e.v;
    const auto& n = s.density_ns.v;  // perturbation; physical density n+1
    const auto& u = s.velocity_e.comp;
    const auto& v = s.velocity_ns.comp;

    {
        // physical NS density must stay above the floor; h is floor-safe by
        // construction but must stay finite (checked above)
        std::vector<double> nn((std::size_t)sz);
        for (std::int64_t i = 0; i < sz; ++i) nn[(std::size_t)i] = n[(std::size_t)i] + 1.0;
        detail::check_floor(nn, par.vacuum_floor, "NS");
    }

    std::vector<cplx> h_h, n_h;
    std::array<std::vector<cplx>, 3> u_h, v_h;
    fft_forward(g, h, h_h);
    fft_forward(g, n, n_h);
    for (int a = 0; a < d; ++a) {
        fft_forward(g, u[a], u_h[a]);
        fft_forward(g, v[a], v_h[a]);
    }

    std::array<std::vector<double>, 3> grad_h, grad_n, lame_v;
    std::array<std::array<std::vector<double>, 3>, 3> grad_u, grad_v;
    for (int a = 0; a < d; ++a) {
        w.deriv(h_h, a, grad_h[a]);
        w.deriv(n_h, a, grad_n[a]);
        w.lame_comp(v_h, par.mu, par.lambda, a, lame_v[a]);
        for (int b = 0; b < d; ++b) {
            w.deriv(u_h[a], b, grad_u[a][b]);
            w.deriv(v_h[a], b, grad_v[a][b]);
        }
    }

    FluidRhs r;
    r.d_density_e = ScalarField(g);
    r.d_density_ns = ScalarField(g);
    r.d_velocity_e = VectorField(g);
    r.d_velocity_ns = VectorField(g);

    // dt h: nonlinear advection dealiased, linear -div u kept exact (trace of
    // the velocity gradient is already available).
    {
        auto& slot = r.d_density_e.v;
        for (std::int64_t i = 0; i < sz; ++i) {
            double adv = 0.0;
            for (int b = 0; b < d; ++b) adv += u[b][(std::size_t)i] * grad_h[b][(std::size_t)i];
            slot[(std::size_t)i] = -adv;
        }
        w.dealias_inplace(slot);
        for (std::int64_t i = 0; i < sz; ++i) {
            double divu = 0.0;
            for (int b = 0; b < d; ++b) divu += grad_u[b][b][(std::size_t)i];
            slot[(std::size_t)i] -= divu;
        }
    }

    std::array<std::vector<double>, 3> prod;
    for (int a = 0; a < d; ++a) prod[a].resize((std::size_t)sz);
    for (int a = 0; a < d; ++a)
        for (std::int64_t i = 0; i < sz; ++i)
            prod[a][(std::size_t)i] = (n[(std::size_t)i] + 1.0) * v[a][(std::size_t)i];
    w.neg_div_dealiased(prod, r.d_density_ns.v);

    for (int a = 0; a < d; ++a) {
        auto& slot = r.d_velocity_e.comp[a];
        slot.resize((std::size_t)sz);
        for (std::int64_t i = 0; i < sz; ++i) {
            double adv = 0.0;
            for (int b = 0; b < d; ++b) adv += u[b][(std::size_t)i] * grad_u[a][b][(std::size_t)i];
            slot[(std::size_t)i] = -adv;
        }
        w.dealias_inplace(slot);
        for (std::int64_t i = 0; i < sz; ++i)
            slot[(std::size_t)i] -=
                grad_h[a][(std::size_t)i] + u[a][(std::size_t)i] - v[a][(std::size_t)i];
    }

    for (int a = 0; a < d; ++a) {
        auto& slot = r.d_velocity_ns.comp[a];
        slot.resize((std::size_t)sz);
        for (std::int64_t i = 0; i < sz; ++i) {
            const double ni = n[(std::size_t)i] + 1.0;
            double adv = 0.0;
            for (int b = 0; b < d; ++b) adv += v[b][(std::size_t)i] * grad_v[a][b][(std::size_t)i];
            slot[(std::size_t)i] = -adv - par.gamma * detail::dens_pow(ni, par.gamma) * grad_n[a][(std::size_t)i]
                                   - lame_v[a][(std::size_t)i] / ni
                                   + std::exp(h[(std::size_t)i]) *
                                         (u[a][(std::size_t)i] - v[a][(std::size_t)i]) / ni;
        }
        w.dealias_inplace(slot);
    }
    return r;
}

inline FluidRhs rhs(const FluidState& s, const FluidParams& par) {
    return s.form == Formulation::primitive ? rhs_primitive(s, par) : rhs_log(s, par);
}

}  // namespace dragflow
