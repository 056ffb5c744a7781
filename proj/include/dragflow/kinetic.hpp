// Particle discretization of the kinetic phase: ensembles of (X, xi)
// samples transported by dX = xi dt and relaxed by drag toward the NS
// velocity, local alignment toward the deposited mean velocity u_f at rate
// 1/eps, and noise of matching strength sqrt(2/eps). Cloud-in-cell
// deposition supplies the moments and the momentum exchanged with the NS
// fluid. run_limit_sweep co-integrates this system against the drag-coupled
// two-phase model it approaches as eps -> 0.
#pragma once

#include <cstdint>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

#include "dragflow/integrator.hpp"
#include "dragflow/model.hpp"
#include "dragflow/rng.hpp"

namespace dragflow {

struct ParticleEnsemble {
    Grid grid;  // deposition grid; positions live in its box
    std::array<std::vector<double>, 3> position;
    std::array<std::vector<double>, 3> velocity;
    double weight = 0.0;  // common statistical weight; weight * count = kinetic mass
    std::uint64_t rng_seed = 0;
    double epsilon = 1.0;
    std::int64_t step_count = 0;  // advances the per-particle noise streams

    std::int64_t count() const { return (std::int64_t)position[0].size(); }
};

struct KineticMoments {
    ScalarField rho_f;          // deposited mass per unit volume
    VectorField u_f;            // mass-averaged velocity; zero below the floor
    ScalarField second_moment;  // trace of the velocity covariance per unit mass
    std::vector<std::uint8_t> below_floor;
    std::int64_t floored = 0;
    double mass_floor = 1e-10;
};

namespace detail {

// Multilinear (cloud-in-cell) stencil: base cell index and fractional offset
// per axis. The 2^dim corner weights partition unity.
struct CicStencil {
    std::int64_t base[3] = {0, 0, 0};
    double frac[3] = {0.0, 0.0, 0.0};
};

inline CicStencil cic_stencil(const Grid& g, const double* x) {
    CicStencil st;
    for (int a = 0; a < g.dim(); ++a) {
        const double s = x[a] / g.dx(a);
        double fl = std::floor(s);
        double fr = s - fl;
        std::int64_t i = (std::int64_t)fl % g.n(a);
        if (i < 0) i += g.n(a);
        if (i >= g.n(a)) i -= g.n(a);
        st.base[a] = i;
        st.frac[a] = fr;
    }
    return st;
}

template <class F>
inline void for_each_corner(const Grid& g, const CicStencil& st, F&& f) {
    const int d = g.dim();
    const int corners = 1 << d;
    for (int c = 0; c < corners; ++c) {
        std::int64_t idx[3] = {st.base[0], st.base[1], st.base[2]};
        double w = 1.0;
        for (int a = 0; a < d; ++a) {
            if (c & (1 << a)) {
                idx[a] = idx[a] + 1 == g.n(a) ? 0 : idx[a] + 1;
                w *= st.frac[a];
            } else {
                w *= 1.0 - st.frac[a];
            }
        }
        std::int64_t flat = idx[0];
        if (d > 1) flat = flat * g.n(1) + idx[1];
        if (d > 2) flat = flat * g.n(2) + idx[2];
        f(flat, w);
    }
}

inline double interp_cell_values(const Grid& g, const std::vector<double>& field,
                                 const CicStencil& st) {
    double acc = 0.0;
    for_each_corner(g, st, [&](std::int64_t flat, double w) { acc += w * field[(std::size_t)flat]; });
    return acc;
}

inline double wrap_coord(double x, double L) {
    x = std::fmod(x, L);
    if (x < 0.0) x += L;
    if (x >= L) x -= L;
    return x;
}

}  // namespace detail

// Draw `count` particles with positions distributed as rho0/mass(rho0)
// (rejection against the multilinearly interpolated field) and velocities
// u0(X) plus a unit-covariance Maxwellian. weight = mass(rho0)/count.
// Identical seeds give identical ensembles.
inline ParticleEnsemble sample_ensemble(const ScalarField& rho0, const VectorField& u0,
                                        std::int64_t count, double epsilon,
                                        std::uint64_t seed) {
    require_same_grid(rho0.grid, u0.grid, "sample_ensemble");
    require_finite(rho0, "sample_ensemble");
    require_finite(u0, "sample_ensemble");
    if (count < 1) throw ConfigError("sample_ensemble: count must be at least 1");
    if (!(epsilon > 0.0)) throw ConfigError("sample_ensemble: epsilon must be positive");
    const Grid& g = rho0.grid;
    const int d = g.dim();
    std::int64_t arg = 0;
    if (!(min_value(rho0.v, &arg) >= 0.0))
        throw PreconditionError("sample_ensemble: density must be nonnegative");
    const double rho_max = max_abs(rho0.v);
    if (!(rho_max > 0.0)) throw PreconditionError("sample_ensemble: density is identically zero");

    ParticleEnsemble e;
    e.grid = g;
    e.rng_seed = seed;
    e.epsilon = epsilon;
    e.weight = integral(rho0) / (double)count;
    for (int a = 0; a < d; ++a) {
        e.position[a].resize((std::size_t)count);
        e.velocity[a].resize((std::size_t)count);
    }

    const std::uint64_t pos_seed = splitmix64(seed ^ 0x706f736974696f6eULL);
    const std::uint64_t vel_seed = splitmix64(seed ^ 0x76656c6f63697479ULL);
    for (std::int64_t p = 0; p < count; ++p) {
        double x[3] = {0.0, 0.0, 0.0};
        bool accepted = false;
        for (std::uint64_t attempt = 0; attempt < 100000; ++attempt) {
            for (int a = 0; a < d; ++a)
                x[a] = uniform_open(pos_seed, (std::uint64_t)p, attempt, (std::uint64_t)a) *
                       g.length(a);
            const double gate = uniform_open(pos_seed, (std::uint64_t)p, attempt, (std::uint64_t)d);
            const detail::CicStencil st = detail::cic_stencil(g, x);
            if (gate * rho_max <= detail::interp_cell_values(g, rho0.v, st)) {
                accepted = true;
                break;
            }
        }
        if (!accepted)
            throw PreconditionError("sample_ensemble: rejection sampling failed to accept");
        const detail::CicStencil st = detail::cic_stencil(g, x);
        for (int a = 0; a < d; ++a) e.position[a][(std::size_t)p] = x[a];
        for (int a = 0; a < d; a += 2) {
            double z0, z1;
            normal_pair(vel_seed, (std::uint64_t)p, 0, (std::uint64_t)a, z0, z1);
            e.velocity[a][(std::size_t)p] =
                detail::interp_cell_values(g, u0.comp[a], st) + z0;
            if (a + 1 < d)
                e.velocity[a + 1][(std::size_t)p] =
                    detail::interp_cell_values(g, u0.comp[a + 1], st) + z1;
        }
    }
    return e;
}

// Cloud-in-cell deposition of mass, momentum, and |xi|^2; the velocity and
// covariance fields are formed only where the deposited mass clears
// mass_floor, other cells are zeroed and flagged. Deposition partitions
// unity, so integral(rho_f) = weight * count exactly.
inline KineticMoments deposit_moments(const ParticleEnsemble& e, const Grid& g,
                                      double mass_floor = 1e-10) {
    if (e.count() < 1) throw PreconditionError("deposit_moments: empty ensemble");
    if (e.grid != g) throw PreconditionError("deposit_moments: ensemble grid differs");
    const int d = g.dim();
    KineticMoments m;
    m.mass_floor = mass_floor;
    m.rho_f = ScalarField(g);
    m.u_f = VectorField(g);
    m.second_moment = ScalarField(g);
    m.below_floor.assign((std::size_t)g.size(), 0);

    std::array<std::vector<double>, 3> mom;
    std::vector<double> energy((std::size_t)g.size(), 0.0);
    for (int a = 0; a < d; ++a) mom[a].assign((std::size_t)g.size(), 0.0);

    const double inv_cv = 1.0 / g.cell_volume();
    for (std::int64_t p = 0; p < e.count(); ++p) {
        double x[3] = {0.0, 0.0, 0.0};
        double xi[3] = {0.0, 0.0, 0.0};
        double xi2 = 0.0;
        for (int a = 0; a < d; ++a) {
            x[a] = e.position[a][(std::size_t)p];
            xi[a] = e.velocity[a][(std::size_t)p];
            xi2 += xi[a] * xi[a];
        }
        const detail::CicStencil st = detail::cic_stencil(g, x);
        detail::for_each_corner(g, st, [&](std::int64_t flat, double w) {
            const double q = e.weight * w * inv_cv;
            m.rho_f[flat] += q;
            for (int a = 0; a < d; ++a) mom[a][(std::size_t)flat] += q * xi[a];
            energy[(std::size_t)flat] += q * xi2;
        });
    }

    for (std::int64_t i = 0; i < g.size(); ++i) {
        if (m.rho_f[i] > mass_floor) {
            double u2 = 0.0;
            for (int a = 0; a < d; ++a) {
                const double ua = mom[a][(std::size_t)i] / m.rho_f[i];
                m.u_f.comp[a][(std::size_t)i] = ua;
                u2 += ua * ua;
            }
            m.second_moment[i] = energy[(std::size_t)i] / m.rho_f[i] - u2;
        } else {
            m.below_floor[(std::size_t)i] = 1;
            ++m.floored;
        }
    }
    return m;
}

// Momentum the kinetic phase hands to the NS fluid: rho_f (u_f - v),
// evaluated as deposited momentum minus rho_f v so cells below the mass
// floor export exactly zero.
inline VectorField coupling_source(const KineticMoments& m, const VectorField& v) {
    require_same_grid(m.rho_f.grid, v.grid, "coupling_source");
    const Grid& g = m.rho_f.grid;
    VectorField out(g);
    for (int a = 0; a < g.dim(); ++a)
        for (std::int64_t i = 0; i < g.size(); ++i) {
            if (m.below_floor[(std::size_t)i]) continue;
            out.comp[a][(std::size_t)i] =
                m.rho_f[i] * (m.u_f.comp[a][(std::size_t)i] - v.comp[a][(std::size_t)i]);
        }
    return out;
}

inline VectorField coupling_source(const ParticleEnsemble& e, const VectorField& v,
                                   const Grid& g, double mass_floor = 1e-10) {
    return coupling_source(deposit_moments(e, g, mass_floor), v);
}

// Per-cell deposition of the alignment drift u_f - xi with the deposition
// kernel: identically zero up to roundoff, because u_f is the deposited
// mean. This is the discrete statement that local alignment exchanges no
// momentum.
inline VectorField alignment_deposit(const ParticleEnsemble& e, const KineticMoments& m) {
    const Grid& g = m.rho_f.grid;
    const int d = g.dim();
    VectorField out(g);
    const double inv_cv = 1.0 / g.cell_volume();
    for (std::int64_t p = 0; p < e.count(); ++p) {
        double x[3] = {0.0, 0.0, 0.0};
        for (int a = 0; a < d; ++a) x[a] = e.position[a][(std::size_t)p];
        const detail::CicStencil st = detail::cic_stencil(g, x);
        detail::for_each_corner(g, st, [&](std::int64_t flat, double w) {
            if (m.below_floor[(std::size_t)flat]) return;
            const double q = e.weight * w * inv_cv;
            for (int a = 0; a < d; ++a)
                out.comp[a][(std::size_t)flat] +=
                    q * (m.u_f.comp[a][(std::size_t)flat] - e.velocity[a][(std::size_t)p]);
        });
    }
    return out;
}

// Euler-Maruyama update of all particles against precomputed step-start
// moments:
//   xi' = xi + dt (v(X) - xi) + dt (u_f(X) - xi)/eps + sqrt(2 dt/eps) eta,
//   X'  = X + dt xi  (the pre-update velocity), wrapped into the box.
// Requires dt <= eps/4 so the stiff alignment drift is resolved. Noise can
// be disabled to test the deterministic drift alone.
inline void step_particles_inplace(ParticleEnsemble& e, const VectorField& v,
                                   const KineticMoments& m, double dt, bool with_noise = true) {
    const Grid& g = e.grid;
    require_same_grid(g, v.grid, "step_particles");
    if (!(dt > 0.0)) throw PreconditionError("step_particles: dt must be positive");
    if (!(dt <= e.epsilon / 4.0)) {
        std::ostringstream os;
        os << "step_particles: dt = " << dt << " violates dt <= eps/4 = " << e.epsilon / 4.0;
        throw PreconditionError(os.str());
    }
    const int d = g.dim();
    const double noise_scale = with_noise ? std::sqrt(2.0 * dt / e.epsilon) : 0.0;
    const double inv_eps = 1.0 / e.epsilon;

    for (std::int64_t p = 0; p < e.count(); ++p) {
        double x[3] = {0.0, 0.0, 0.0};
        for (int a = 0; a < d; ++a) x[a] = e.position[a][(std::size_t)p];
        const detail::CicStencil st = detail::cic_stencil(g, x);
        double eta[3] = {0.0, 0.0, 0.0};
        for (int a = 0; a < d; a += 2) {
            double z0, z1;
            normal_pair(e.rng_seed, (std::uint64_t)p, (std::uint64_t)e.step_count,
                        (std::uint64_t)a, z0, z1);
            eta[a] = z0;
            if (a + 1 < d) eta[a + 1] = z1;
        }
        for (int a = 0; a < d; ++a) {
            const double xi_old = e.velocity[a][(std::size_t)p];
            const double vv = detail::interp_cell_values(g, v.comp[a], st);
            const double uu = detail::interp_cell_values(g, m.u_f.comp[a], st);
            e.velocity[a][(std::size_t)p] =
                xi_old + dt * ((vv - xi_old) + inv_eps * (uu - xi_old)) + noise_scale * eta[a];
            e.position[a][(std::size_t)p] = detail::wrap_coord(x[a] + dt * xi_old, g.length(a));
        }
    }
    ++e.step_count;
}

inline ParticleEnsemble step_particles(const ParticleEnsemble& e, const VectorField& v,
                                       double dt, bool with_noise = true) {
    ParticleEnsemble out = e;
    const KineticMoments m = deposit_moments(out, out.grid);
    step_particles_inplace(out, v, m, dt, with_noise);
    return out;
}

namespace detail {

// NS phase driven by a frozen kinetic momentum source:
//   dt n = -div(n v),  dt v = -(v.grad)v - gamma n^{gamma-2} grad n
//                             - (L v)/n + g/n.
inline void ns_rhs_with_source(const ScalarField& n, const VectorField& v,
                               const VectorField& g_src, const FluidParams& par,
                               ScalarField& dn, VectorField& dv) {
    const Grid& g = n.grid;
    RhsWorkspace w(g);
    const int d = w.d;
    const std::int64_t sz = w.sz;
    check_floor(n.v, par.vacuum_floor, "NS");

    std::vector<cplx> n_h;
    std::array<std::vector<cplx>, 3> v_h;
    fft_forward(g, n.v, n_h);
    for (int a = 0; a < d; ++a) fft_forward(g, v.comp[a], v_h[a]);

    std::array<std::vector<double>, 3> grad_n, lame_v;
    std::array<std::array<std::vector<double>, 3>, 3> grad_v;
    for (int a = 0; a < d; ++a) {
        w.deriv(n_h, a, grad_n[a]);
        w.lame_comp(v_h, par.mu, par.lambda, a, lame_v[a]);
        for (int b = 0; b < d; ++b) w.deriv(v_h[a], b, grad_v[a][b]);
    }

    dn = ScalarField(g);
    dv = VectorField(g);
    std::array<std::vector<double>, 3> prod;
    for (int a = 0; a < d; ++a) {
        prod[a].resize((std::size_t)sz);
        for (std::int64_t i = 0; i < sz; ++i)
            prod[a][(std::size_t)i] = n[i] * v.comp[a][(std::size_t)i];
    }
    w.neg_div_dealiased(prod, dn.v);

    for (int a = 0; a < d; ++a) {
        auto& slot = dv.comp[a];
        for (std::int64_t i = 0; i < sz; ++i) {
            const double ni = n[i];
            double adv = 0.0;
            for (int b = 0; b < d; ++b) adv += v.comp[b][(std::size_t)i] * grad_v[a][b][(std::size_t)i];
            slot[(std::size_t)i] = -adv - par.gamma * dens_pow(ni, par.gamma) * grad_n[a][(std::size_t)i]
                                   - lame_v[a][(std::size_t)i] / ni +
                                   g_src.comp[a][(std::size_t)i] / ni;
        }
        w.dealias_inplace(slot);
    }
}

inline void rk4_ns_with_source(ScalarField& n, VectorField& v, const VectorField& g_src,
                               const FluidParams& par, double dt) {
    const Grid& g = n.grid;
    auto shift = [&](const ScalarField& n0, const VectorField& v0, double a,
                     const ScalarField& dn, const VectorField& dv, ScalarField& n1,
                     VectorField& v1) {
        n1 = n0;
        v1 = v0;
        for (std::int64_t i = 0; i < g.size(); ++i) n1[i] += a * dn[i];
        for (int c = 0; c < g.dim(); ++c)
            for (std::int64_t i = 0; i < g.size(); ++i)
                v1.comp[c][(std::size_t)i] += a * dv.comp[c][(std::size_t)i];
    };
    ScalarField k1n, k2n, k3n, k4n, tn;
    VectorField k1v, k2v, k3v, k4v, tv;
    ns_rhs_with_source(n, v, g_src, par, k1n, k1v);
    shift(n, v, 0.5 * dt, k1n, k1v, tn, tv);
    ns_rhs_with_source(tn, tv, g_src, par, k2n, k2v);
    shift(n, v, 0.5 * dt, k2n, k2v, tn, tv);
    ns_rhs_with_source(tn, tv, g_src, par, k3n, k3v);
    shift(n, v, dt, k3n, k3v, tn, tv);
    ns_rhs_with_source(tn, tv, g_src, par, k4n, k4v);
    const double w = dt / 6.0;
    for (std::int64_t i = 0; i < g.size(); ++i)
        n[i] += w * (k1n[i] + 2.0 * k2n[i] + 2.0 * k3n[i] + k4n[i]);
    for (int c = 0; c < g.dim(); ++c)
        for (std::int64_t i = 0; i < g.size(); ++i)
            v.comp[c][(std::size_t)i] += w * (k1v.comp[c][(std::size_t)i] +
                                              2.0 * k2v.comp[c][(std::size_t)i] +
                                              2.0 * k3v.comp[c][(std::size_t)i] +
                                              k4v.comp[c][(std::size_t)i]);
}

}  // namespace detail

// Stationary per-component velocity variance of the spatially uniform case
// (v = u_f = 0): each component is an Ornstein-Uhlenbeck process with drift
// rate 1 + 1/eps and squared diffusion 2/eps, so the exact stationary
// variance is 1/(1+eps). Starts the ensemble in the stationary law and
// returns the time-averaged sample variance.
inline double uniform_stationary_variance(double eps, double dt, double t_end,
                                          std::int64_t count, std::uint64_t seed) {
    if (!(eps > 0.0) || !(dt > 0.0) || !(t_end > 0.0) || count < 2)
        throw ConfigError("uniform_stationary_variance: invalid arguments");
    if (!(dt <= eps / 4.0))
        throw PreconditionError("uniform_stationary_variance: dt must satisfy dt <= eps/4");
    const std::int64_t nsteps = (std::int64_t)std::llround(t_end / dt);
    const double sd0 = std::sqrt(1.0 / (1.0 + eps));
    const std::uint64_t init_seed = splitmix64(seed ^ 0x756e69666f726dULL);
    const std::uint64_t step_seed = splitmix64(seed ^ 0x6f752d7374657073ULL);
    std::vector<double> xi((std::size_t)count);
    for (std::int64_t p = 0; p < count; ++p)
        xi[(std::size_t)p] = sd0 * normal_one(init_seed, (std::uint64_t)p, 0, 0);

    const double r = 1.0 + 1.0 / eps;
    const double noise = std::sqrt(2.0 * dt / eps);
    double var_acc = 0.0;
    for (std::int64_t s = 0; s < nsteps; ++s) {
        for (std::int64_t p = 0; p < count; ++p) {
            const double z = normal_one(step_seed, (std::uint64_t)p, (std::uint64_t)s, 0);
            xi[(std::size_t)p] += -dt * r * xi[(std::size_t)p] + noise * z;
        }
        double mean_xi = 0.0;
        for (double x : xi) mean_xi += x;
        mean_xi /= (double)count;
        double var = 0.0;
        for (double x : xi) var += (x - mean_xi) * (x - mean_xi);
        var /= (double)(count - 1);
        var_acc += var;
    }
    return var_acc / (double)nsteps;
}

struct SweepConfig {
    std::int64_t n_cells = 32;
    double length = 1.0;
    std::int64_t particles = 100000;
    std::vector<double> eps_list{1.0, 0.3, 0.1, 0.03};
    std::uint64_t seed = 12345;
    double t_end = 1.5;
    double dt = 4.8e-4;
    std::int64_t sample_every = 40;
    double amplitude = 0.2;
    int mode = 1;
    double u_mean = 0.05;
    double u_amplitude = 0.05;
    double gamma = 2.0;
    double mu = 0.1;
    double lambda = 0.0;
    double variance_t_end = 1.0;
    double mass_floor = 1e-10;
};

struct SweepRow {
    double eps = 0.0;
    double err_rho = 0.0;       // sup over samples of the L2 error of rho_f
    double err_u = 0.0;         // sup over samples of the L2 error of u_f
    double err_moments = 0.0;   // sqrt(err_rho^2 + err_u^2)
    double var_dev1 = 0.0;      // sup over samples of |mean cell variance - 1|
    double uniform_var = 0.0;   // measured stationary variance, uniform case
    double uniform_var_expected = 0.0;  // 1/(1+eps)
    double uniform_var_rel_dev = 0.0;
};

struct SweepReport {
    std::vector<SweepRow> rows;
    bool monotone_ok = false;   // err_moments strictly decreases along eps_list
    bool variance_ok = false;   // every uniform_var within 2% of 1/(1+eps)
    double variance_tolerance = 0.02;

    std::string table() const {
        std::ostringstream os;
        os << std::left << std::setw(10) << "eps" << std::setw(13) << "err_rho"
           << std::setw(13) << "err_u" << std::setw(13) << "err_moments" << std::setw(13)
           << "var_dev1" << std::setw(14) << "uniform_var" << std::setw(14) << "expected"
           << std::setw(12) << "rel_dev" << '\n';
        os << std::string(102, '-') << '\n';
        os << std::setprecision(5) << std::fixed;
        for (const SweepRow& r : rows) {
            os << std::setw(10) << r.eps << std::setw(13) << r.err_rho << std::setw(13)
               << r.err_u << std::setw(13) << r.err_moments << std::setw(13) << r.var_dev1
               << std::setw(14) << r.uniform_var << std::setw(14) << r.uniform_var_expected
               << std::setw(12) << r.uniform_var_rel_dev << '\n';
        }
        os << '\n';
        os << "monotone decrease of moment error: " << (monotone_ok ? "yes" : "no") << '\n';
        os << "uniform-case variance within " << std::setprecision(0)
           << variance_tolerance * 100.0 << "% of 1/(1+eps): " << (variance_ok ? "yes" : "no")
           << '\n';
        return os.str();
    }
};

// For each eps: integrate the particle ensemble coupled to the NS fluid and,
// from matched initial data with identical noise, the limit two-phase model;
// record the worst-over-time L2 moment errors and variance deviation, then
// measure the uniform-case stationary variance separately.
inline SweepReport run_limit_sweep(const SweepConfig& cfg) {
    if (cfg.eps_list.empty()) throw ConfigError("kinetic sweep: eps list must not be empty");
    if (cfg.particles < 2) throw ConfigError("kinetic sweep: need at least 2 particles");
    if (!(cfg.dt > 0.0) || !(cfg.t_end > 0.0))
        throw ConfigError("kinetic sweep: dt and t_end must be positive");
    if (cfg.sample_every < 1) throw ConfigError("kinetic sweep: sample_every must be >= 1");
    for (double eps : cfg.eps_list)
        if (!(cfg.dt <= eps / 4.0)) {
            std::ostringstream os;
            os << "kinetic sweep: dt = " << cfg.dt << " violates dt <= eps/4 for eps = " << eps;
            throw ConfigError(os.str());
        }
    const FluidParams par = FluidParams::make(cfg.gamma, cfg.mu, cfg.lambda);
    const Grid g = Grid::make(1, {cfg.n_cells}, {cfg.length});
    const std::int64_t nsteps = (std::int64_t)std::llround(cfg.t_end / cfg.dt);
    const double dt = cfg.t_end / (double)nsteps;

    // shared macroscopic initial data
    ScalarField rho0(g), n0(g);
    VectorField u0(g), v0(g);
    const double tau = 2.0 * M_PI * cfg.mode;
    for (std::int64_t i = 0; i < g.size(); ++i) {
        const double x = g.coords(i)[0] / cfg.length;
        rho0[i] = 1.0 + cfg.amplitude * std::cos(tau * x);
        n0[i] = 1.0 + cfg.amplitude * std::cos(tau * x);
        u0.comp[0][(std::size_t)i] = cfg.u_mean + cfg.u_amplitude * std::sin(tau * x);
    }

    SweepReport report;
    for (double eps : cfg.eps_list) {
        ParticleEnsemble e = sample_ensemble(rho0, u0, cfg.particles, eps, cfg.seed);
        ScalarField n = n0;
        VectorField v = v0;
        FluidState limit = FluidState::equilibrium(g, Formulation::primitive);
        limit.density_e = rho0;
        limit.velocity_e = u0;
        limit.density_ns = n0;
        limit.velocity_ns = v0;

        SweepRow row;
        row.eps = eps;
        for (std::int64_t s = 0; s < nsteps; ++s) {
            const KineticMoments m = deposit_moments(e, g, cfg.mass_floor);
            if (s % cfg.sample_every == 0) {
                double er = 0.0, eu = 0.0, vbar = 0.0;
                std::int64_t cells = 0;
                for (std::int64_t i = 0; i < g.size(); ++i) {
                    const double dr = m.rho_f[i] - limit.density_e[i];
                    const double du =
                        m.u_f.comp[0][(std::size_t)i] - limit.velocity_e.comp[0][(std::size_t)i];
                    er += dr * dr;
                    eu += du * du;
                    if (!m.below_floor[(std::size_t)i]) {
                        vbar += m.second_moment[i];
                        ++cells;
                    }
                }
                er = std::sqrt(er / (double)g.size());
                eu = std::sqrt(eu / (double)g.size());
                row.err_rho = std::max(row.err_rho, er);
                row.err_u = std::max(row.err_u, eu);
                if (cells > 0)
                    row.var_dev1 = std::max(row.var_dev1, std::fabs(vbar / (double)cells - 1.0));
            }
            const VectorField src = coupling_source(m, v);
            detail::rk4_ns_with_source(n, v, src, par, dt);
            limit = step_rk4(limit, par, dt);
            step_particles_inplace(e, v, m, dt);
        }
        row.err_moments = std::sqrt(row.err_rho * row.err_rho + row.err_u * row.err_u);
        row.uniform_var_expected = 1.0 / (1.0 + eps);
        row.uniform_var = uniform_stationary_variance(eps, dt, cfg.variance_t_end,
                                                      cfg.particles, cfg.seed);
        row.uniform_var_rel_dev =
            std::fabs(row.uniform_var - row.uniform_var_expected) / row.uniform_var_expected;
        report.rows.push_back(row);
    }

    report.monotone_ok = report.rows.size() >= 1;
    for (std::size_t i = 1; i < report.rows.size(); ++i)
        if (!(report.rows[i].err_moments < report.rows[i - 1].err_moments))
            report.monotone_ok = false;
    report.variance_ok = true;
    for (const SweepRow& r : report.rows)
        if (!(r.uniform_var_rel_dev <= report.variance_tolerance)) report.variance_ok = false;
    return report;
}

}  // namespace dragflow
