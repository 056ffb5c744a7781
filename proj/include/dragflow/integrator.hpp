// Time advancement: classical RK4 with a combined advective/viscous step
// bound, exact landing on requested sample times, and blow-up guards.
#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>

#include "dragflow/model.hpp"

namespace dragflow {

struct StepControl {
    double cfl = 0.4;
    double dt_max = 0.01;
    double t_end = 1.0;
    double viscous_safety = 0.25;

    void validate() const {
        if (!(cfl > 0.0 && cfl <= 1.0)) throw ConfigError("cfl must be in (0, 1]");
        if (!(viscous_safety > 0.0 && viscous_safety <= 1.0))
            throw ConfigError("viscous_safety must be in (0, 1]");
        if (!(dt_max > 0.0)) throw ConfigError("dt_max must be positive");
        if (!(t_end >= 0.0)) throw ConfigError("t_end must be nonnegative");
    }
};

// dt = min(dt_max, cfl dx/(V_max + C_max), viscous_safety dx^2/(2 dim nu_max)).
// V_max is the largest velocity component of either phase, C_max the largest
// acoustic speed (1 on the isothermal side since pressure = rho, and
// sqrt(gamma n^{gamma-1}) on the NS side), nu_max = (2 mu + lambda)/min(n).
// Throws once the bound underflows 1e-12, which only happens on blow-up.
inline double stable_dt(const FluidState& s, const FluidParams& par, const StepControl& c) {
    c.validate();
    const PrimitiveView pv = primitive_view(s);
    const Grid& g = s.grid();

    double vmax = 0.0;
    for (int a = 0; a < g.dim(); ++a) {
        vmax = std::max(vmax, max_abs(pv.u->comp[a]));
        vmax = std::max(vmax, max_abs(pv.v->comp[a]));
    }
    double nmin = pv.n[0], nmax = pv.n[0];
    for (std::int64_t i = 1; i < pv.n.size(); ++i) {
        nmin = std::min(nmin, pv.n[i]);
        nmax = std::max(nmax, pv.n[i]);
    }
    if (!(nmin > 0.0)) {
        std::int64_t arg = 0;
        min_value(pv.n.v, &arg);
        throw VacuumError("stable_dt: nonpositive NS density", nmin, arg);
    }
    const double cmax = std::max(1.0, std::sqrt(par.gamma * std::pow(nmax, par.gamma - 1.0)));
    const double numax = (2.0 * par.mu + par.lambda) / nmin;
    const double dx = g.min_dx();

    const double adv = c.cfl * dx / (vmax + cmax);
    const double visc = c.viscous_safety * dx * dx / (2.0 * g.dim() * numax);
    const double dt = std::min({c.dt_max, adv, visc});
    if (!(dt > 1e-12)) {
        std::ostringstream os;
        os << "stable step size underflow: dt = " << dt << " at t = " << s.time;
        throw BlowupError(os.str(), s.time);
    }
    return dt;
}

namespace detail {

inline void axpy_state(FluidState& y, double a, const FluidRhs& r) {
    const Grid& g = y.grid();
    for (std::int64_t i = 0; i < g.size(); ++i) {
        y.density_e[i] += a * r.d_density_e[i];
        y.density_ns[i] += a * r.d_density_ns[i];
    }
    for (int c = 0; c < g.dim(); ++c)
        for (std::int64_t i = 0; i < g.size(); ++i) {
            y.velocity_e.comp[c][(std::size_t)i] += a * r.d_velocity_e.comp[c][(std::size_t)i];
            y.velocity_ns.comp[c][(std::size_t)i] += a * r.d_velocity_ns.comp[c][(std::size_t)i];
        }
}

inline FluidState shifted(const FluidState& s, double a, const FluidRhs& r) {
    FluidState y = s;
    axpy_state(y, a, r);
    return y;
}

}  // namespace detail

// One classical RK4 step. The input is untouched, so on failure the caller
// still holds the last valid state; the thrown error records the failure
// time. Validity (finiteness, density floors) is enforced by the stage RHS
// evaluations and re-checked on the result.
inline FluidState step_rk4(const FluidState& s, const FluidParams& par, double dt) {
    if (!(dt > 0.0) || !std::isfinite(dt))
        throw PreconditionError("step_rk4: dt must be positive and finite");
    try {
        const FluidRhs k1 = rhs(s, par);
        const FluidRhs k2 = rhs(detail::shifted(s, 0.5 * dt, k1), par);
        const FluidRhs k3 = rhs(detail::shifted(s, 0.5 * dt, k2), par);
        FluidState s4 = detail::shifted(s, dt, k3);
        const FluidRhs k4 = rhs(s4, par);

        FluidState out = s;
        const double w = dt / 6.0;
        detail::axpy_state(out, w, k1);
        detail::axpy_state(out, 2.0 * w, k2);
        detail::axpy_state(out, 2.0 * w, k3);
        detail::axpy_state(out, w, k4);
        out.time = s.time + dt;

        require_finite(out.density_e, "step_rk4");
        require_finite(out.velocity_e, "step_rk4");
        require_finite(out.density_ns, "step_rk4");
        require_finite(out.velocity_ns, "step_rk4");
        if (out.form == Formulation::primitive) {
            detail::check_floor(out.density_e.v, par.vacuum_floor, "Euler");
            detail::check_floor(out.density_ns.v, par.vacuum_floor, "NS");
        } else {
            std::vector<double> nn(out.density_ns.v);
            for (double& x : nn) x += 1.0;
            detail::check_floor(nn, par.vacuum_floor, "NS");
        }
        return out;
    } catch (const VacuumError& e) {
        std::ostringstream os;
        os << "step_rk4 failed at t = " << s.time << ": " << e.what();
        throw BlowupError(os.str(), s.time);
    } catch (const PreconditionError& e) {
        std::ostringstream os;
        os << "step_rk4 failed at t = " << s.time << ": " << e.what();
        throw BlowupError(os.str(), s.time);
    }
}

// Advance the state to exactly t_target: full stable steps, with the final
// step clamped so the state lands on the target to roundoff.
inline void advance_to(FluidState& s, const FluidParams& par, const StepControl& c,
                       double t_target) {
    const double scale = std::max(1.0, std::fabs(t_target));
    while (t_target - s.time > 1e-13 * scale) {
        const double dt = std::min(stable_dt(s, par, c), t_target - s.time);
        s = step_rk4(s, par, dt);
    }
    s.time = t_target;
}

using SampleObserver = std::function<void(const FluidState&)>;

// Integrate from the state's current time to c.t_end, invoking `observer`
// at the n_samples+1 uniform sample times j t_end / n_samples (j = 0 ..
// n_samples), starting with the initial state. When resuming from t > 0 only
// the remaining sample times fire, landing on the same absolute instants as
// an uninterrupted run.
inline FluidState run(FluidState s, const FluidParams& par, const StepControl& c,
                      std::int64_t n_samples, const SampleObserver& observer) {
    c.validate();
    if (n_samples < 1) throw ConfigError("n_samples must be at least 1");
    if (s.time > c.t_end + 1e-13)
        throw PreconditionError("run: state time is already past t_end");
    if (observer) observer(s);
    if (c.t_end <= 0.0) return s;
    for (std::int64_t j = 1; j <= n_samples; ++j) {
        const double t_j = c.t_end * (double)j / (double)n_samples;
        if (t_j <= s.time + 1e-13 * std::max(1.0, t_j)) continue;
        advance_to(s, par, c, t_j);
        if (observer) observer(s);
    }
    return s;
}

}  // namespace dragflow
