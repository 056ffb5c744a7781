// Right-hand sides of the two-phase system in both formulations, checked
// against hand-expanded tendencies for band-limited states. Products of
// low modes stay inside the dealiased band on these grids, so the expected
// fields are exact up to roundoff; accuracy tolerances are 1e-12.
#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <functional>
#include <numbers>

#include "dragflow/initial.hpp"
#include "dragflow/model.hpp"
#include "dragflow/spectral.hpp"

using namespace dragflow;

namespace {

constexpr double tau = 2.0 * std::numbers::pi;

Grid grid1d(std::int64_t n) { return Grid(1, {n, 1, 1}, {1.0, 1.0, 1.0}); }

double max_diff(const std::vector<double>& got, const std::vector<double>& want) {
    double m = 0.0;
    for (std::size_t i = 0; i < got.size(); ++i) m = std::max(m, std::fabs(got[i] - want[i]));
    return m;
}

double max_diff_fn(const Grid& g, const std::vector<double>& got,
                   const std::function<double(double)>& want) {
    double m = 0.0;
    for (std::int64_t i = 0; i < g.size(); ++i)
        m = std::max(m, std::fabs(got[(std::size_t)i] - want(g.coords(i)[0])));
    return m;
}

}  // namespace

TEST_CASE("fluid params validate their ranges") {
    CHECK_THROWS_AS(FluidParams::make(1.0, 0.1, 0.0), ConfigError);
    CHECK_THROWS_AS(FluidParams::make(2.0, 0.0, 0.1), ConfigError);
    CHECK_THROWS_AS(FluidParams::make(2.0, 0.1, -0.3), ConfigError);
    CHECK_THROWS_AS(FluidParams::make(2.0, 0.1, 0.0, 0.0), ConfigError);
    CHECK_NOTHROW(FluidParams::make(1.4, 0.05, -0.05));
}

TEST_CASE("formulation conversions invert each other") {
    const Grid g = grid1d(32);
    SingleModeParams p;
    p.amplitude = 0.2;
    const FluidState s = single_mode(g, p);
    const FluidState back = to_primitive(to_log(s));
    CHECK(max_diff(back.density_e.v, s.density_e.v) < 1e-15);
    CHECK(max_diff(back.density_ns.v, s.density_ns.v) < 1e-15);
    CHECK(max_diff(back.velocity_e.comp[0], s.velocity_e.comp[0]) == 0.0);

    FluidState vac = s;
    vac.density_e[5] = -0.1;
    CHECK_THROWS_AS(to_log(vac), VacuumError);
}

TEST_CASE("primitive continuity tendency matches the expanded product rule") {
    // rho = 1 + a cos(tau x), u = b sin(tau x):
    //   dt rho = -(rho u)' = -2 pi b cos(tau x) - 2 pi a b cos(2 tau x).
    const Grid g = grid1d(32);
    const double a = 0.2, b = 0.3;
    FluidState s = FluidState::equilibrium(g);
    for (std::int64_t i = 0; i < g.size(); ++i) {
        const double x = g.coords(i)[0];
        s.density_e[i] = 1.0 + a * std::cos(tau * x);
        s.velocity_e.comp[0][(std::size_t)i] = b * std::sin(tau * x);
    }
    const FluidRhs r = rhs(s, FluidParams::make(2.0, 0.1, 0.0));
    CHECK(max_diff_fn(g, r.d_density_e.v, [&](double x) {
              return -tau * b * std::cos(tau * x) - tau * a * b * std::cos(2.0 * tau * x);
          }) < 1e-12);
    // The NS phase is at rest in equilibrium, so its density is frozen.
    CHECK(max_abs(r.d_density_ns.v) < 1e-14);
}

TEST_CASE("isothermal pressure gradient follows grad log density") {
    // rho = exp(eps cos(tau x)) makes grad(rho)/rho band limited:
    // dt u = eps tau sin(tau x) when u = v = 0 (no drag, no advection).
    const Grid g = grid1d(64);
    const double eps = 0.05;
    FluidState s = FluidState::equilibrium(g);
    for (std::int64_t i = 0; i < g.size(); ++i)
        s.density_e[i] = std::exp(eps * std::cos(tau * g.coords(i)[0]));
    const FluidRhs r = rhs(s, FluidParams::make(2.0, 0.1, 0.0));
    CHECK(max_diff_fn(g, r.d_velocity_e.comp[0],
                      [&](double x) { return eps * tau * std::sin(tau * x); }) < 1e-12);
}

TEST_CASE("drag exchanges momentum with the density as weight") {
    const Grid g = grid1d(32);
    const double a = 0.05, b = 0.1;
    ScalarField rho(g);
    VectorField u(g), v(g);
    for (std::int64_t i = 0; i < g.size(); ++i) {
        const double x = g.coords(i)[0];
        rho[i] = 1.0 + a * std::cos(tau * x);
        u.comp[0][(std::size_t)i] = b * std::sin(tau * x);
    }
    const VectorField d = drag(rho, u, v);
    CHECK(max_diff_fn(g, d.comp[0], [&](double x) {
              return b * std::sin(tau * x) + 0.5 * a * b * std::sin(2.0 * tau * x);
          }) < 1e-13);
}

TEST_CASE("log-form tendencies match hand expansions mode by mode") {
    const Grid g = grid1d(32);
    const FluidParams par = FluidParams::make(2.0, 0.1, 0.05);
    const double twomu_lam = 2.0 * par.mu + par.lambda;

    SECTION("euler phase: h = a cos, u = b sin") {
        const double a = 0.08, b = 0.06;
        FluidState s = FluidState::equilibrium(g, Formulation::log_density);
        for (std::int64_t i = 0; i < g.size(); ++i) {
            const double x = g.coords(i)[0];
            s.density_e[i] = a * std::cos(tau * x);
            s.velocity_e.comp[0][(std::size_t)i] = b * std::sin(tau * x);
        }
        const FluidRhs r = rhs(s, par);
        // dt h = -u h' - u' = a b tau sin^2 - b tau cos
        CHECK(max_diff_fn(g, r.d_density_e.v, [&](double x) {
                  const double st = std::sin(tau * x);
                  return a * b * tau * st * st - b * tau * std::cos(tau * x);
              }) < 1e-12);
        // dt u = -u u' - h' - (u - v)
        CHECK(max_diff_fn(g, r.d_velocity_e.comp[0], [&](double x) {
                  return -0.5 * b * b * tau * std::sin(2.0 * tau * x) +
                         (a * tau - b) * std::sin(tau * x);
              }) < 1e-12);
        CHECK(max_abs(r.d_density_ns.v) < 1e-13);
    }

    SECTION("ns pressure alone: n - 1 = c cos, gamma = 2") {
        const double c = 0.07;
        FluidState s = FluidState::equilibrium(g, Formulation::log_density);
        for (std::int64_t i = 0; i < g.size(); ++i)
            s.density_ns[i] = c * std::cos(tau * g.coords(i)[0]);
        const FluidRhs r = rhs(s, par);
        // gamma N^{gamma-2} grad N = 2 grad n for gamma = 2.
        CHECK(max_diff_fn(g, r.d_velocity_ns.comp[0],
                          [&](double x) { return 2.0 * c * tau * std::sin(tau * x); }) < 1e-12);
        CHECK(max_abs(r.d_density_ns.v) < 1e-13);
        CHECK(max_abs(r.d_velocity_e.comp[0]) < 1e-13);
        CHECK(max_abs(r.d_density_e.v) < 1e-13);
    }

    SECTION("drag pulls the ns phase toward the euler velocity") {
        const double b = 0.09;
        FluidState s = FluidState::equilibrium(g, Formulation::log_density);
        for (std::int64_t i = 0; i < g.size(); ++i)
            s.velocity_e.comp[0][(std::size_t)i] = b * std::sin(tau * g.coords(i)[0]);
        const FluidRhs r = rhs(s, par);
        // dt v = e^h (u - v)/N = b sin at h = 0, N = 1.
        CHECK(max_diff_fn(g, r.d_velocity_ns.comp[0],
                          [&](double x) { return b * std::sin(tau * x); }) < 1e-12);
        // dt u = -u u' - (u - v)
        CHECK(max_diff_fn(g, r.d_velocity_e.comp[0], [&](double x) {
                  return -0.5 * b * b * tau * std::sin(2.0 * tau * x) - b * std::sin(tau * x);
              }) < 1e-12);
        // dt h = -div u
        CHECK(max_diff_fn(g, r.d_density_e.v,
                          [&](double x) { return -b * tau * std::cos(tau * x); }) < 1e-12);
    }

    SECTION("ns momentum: advection, lame friction, and drag on v = d sin") {
        const double d = 0.04;
        FluidState s = FluidState::equilibrium(g, Formulation::log_density);
        for (std::int64_t i = 0; i < g.size(); ++i)
            s.velocity_ns.comp[0][(std::size_t)i] = d * std::sin(tau * g.coords(i)[0]);
        const FluidRhs r = rhs(s, par);
        CHECK(max_diff_fn(g, r.d_velocity_ns.comp[0], [&](double x) {
                  return -0.5 * d * d * tau * std::sin(2.0 * tau * x) -
                         (twomu_lam * tau * tau + 1.0) * d * std::sin(tau * x);
              }) < 1e-12);
        CHECK(max_diff_fn(g, r.d_velocity_e.comp[0],
                          [&](double x) { return d * std::sin(tau * x); }) < 1e-12);
        CHECK(max_diff_fn(g, r.d_density_ns.v,
                          [&](double x) { return -d * tau * std::cos(tau * x); }) < 1e-12);
        CHECK(max_abs(r.d_density_e.v) < 1e-13);
    }
}

TEST_CASE("2d tendencies respect the axis structure") {
    const Grid g(2, {32, 32, 1}, {1.0, 1.0, 1.0});
    const FluidParams par = FluidParams::make(2.0, 0.1, 0.0);

    // v = d sin(tau y) e_x is divergence free and advection free; the Lame
    // term reduces to -mu lap v and drag mirrors v into dt u.
    const double d = 0.05;
    FluidState s = FluidState::equilibrium(g);
    for (std::int64_t i = 0; i < g.size(); ++i)
        s.velocity_ns.comp[0][(std::size_t)i] = d * std::sin(tau * g.coords(i)[1]);
    const FluidRhs r = rhs(s, par);
    double worst = 0.0, worst_u = 0.0;
    for (std::int64_t i = 0; i < g.size(); ++i) {
        const double sy = d * std::sin(tau * g.coords(i)[1]);
        worst = std::max(worst, std::fabs(r.d_velocity_ns.comp[0][(std::size_t)i] -
                                          (-(par.mu * tau * tau + 1.0) * sy)));
        worst_u = std::max(worst_u, std::fabs(r.d_velocity_e.comp[0][(std::size_t)i] - sy));
    }
    CHECK(worst < 1e-12);
    CHECK(worst_u < 1e-12);
    CHECK(max_abs(r.d_density_ns.v) < 1e-13);
    CHECK(max_abs(r.d_velocity_ns.comp[1]) < 1e-13);
}

TEST_CASE("uniform states reduce to the drag ode in both formulations") {
    const Grid g = grid1d(16);
    const double rho0 = 1.25, n0 = 0.8, u0 = 0.3, v0 = -0.1;
    FluidState s = FluidState::equilibrium(g);
    s.density_e = ScalarField(g, rho0);
    s.density_ns = ScalarField(g, n0);
    s.velocity_e = VectorField(g, u0);
    s.velocity_ns = VectorField(g, v0);

    for (const FluidState& st : {s, to_log(s)}) {
        const FluidRhs r = rhs(st, FluidParams::make(1.4, 0.2, 0.1));
        CHECK(max_diff(r.d_velocity_e.comp[0], std::vector<double>(16, -(u0 - v0))) < 1e-13);
        CHECK(max_diff(r.d_velocity_ns.comp[0],
                       std::vector<double>(16, rho0 / n0 * (u0 - v0))) < 1e-13);
        CHECK(max_abs(r.d_density_e.v) < 1e-13);
        CHECK(max_abs(r.d_density_ns.v) < 1e-13);
    }
}

TEST_CASE("formulation tendencies agree cubically in the amplitude") {
    // The two formulations discretize the same dynamics differently; their
    // velocity tendencies on matched states differ by a residual that
    // shrinks like amplitude^3 on grids where quadratic products are exact.
    const Grid g = grid1d(32);
    const FluidParams par = FluidParams::make(2.0, 0.1, 0.0);
    auto residual = [&](double amp) {
        RandomSmoothParams p;
        p.amplitude = amp;
        p.k_max = 4;
        p.seed = 5150;
        const FluidState prim = random_smooth(g, p);
        const FluidRhs rp = rhs(prim, par);
        const FluidRhs rl = rhs(to_log(prim), par);
        double m = 0.0;
        m = std::max(m, max_diff(rp.d_velocity_e.comp[0], rl.d_velocity_e.comp[0]));
        m = std::max(m, max_diff(rp.d_velocity_ns.comp[0], rl.d_velocity_ns.comp[0]));
        return m;
    };
    const double r1 = residual(5e-3);
    const double r2 = residual(5e-4);
    REQUIRE(r1 > 0.0);
    REQUIRE(r2 > 0.0);
    const double order = std::log10(r1 / r2);
    CHECK(order > 2.5);
    CHECK(order < 3.5);
}

TEST_CASE("vacuum and non-finite states are rejected") {
    const Grid g = grid1d(16);
    const FluidParams par = FluidParams::make(2.0, 0.1, 0.0);
    FluidState s = FluidState::equilibrium(g);
    s.density_ns[3] = 1e-12;  // below the vacuum floor
    CHECK_THROWS_AS(rhs(s, par), VacuumError);

    FluidState t = FluidState::equilibrium(g);
    t.velocity_e.comp[0][2] = std::nan("");
    CHECK_THROWS_AS(rhs(t, par), PreconditionError);

    FluidState wrong = FluidState::equilibrium(g, Formulation::log_density);
    CHECK_THROWS_AS(rhs_primitive(wrong, par), PreconditionError);
    CHECK_THROWS_AS(rhs_log(FluidState::equilibrium(g), par), PreconditionError);

    CHECK_THROWS_AS(pressure(ScalarField(g, -1.0), 2.0), VacuumError);
}

TEST_CASE("single mode initial data places the requested fields") {
    const Grid g(2, {32, 32, 1}, {1.0, 1.0, 1.0});
    SingleModeParams p;
    p.amplitude = 0.1;
    p.velocity_amplitude = 0.02;
    p.ns_amplitude = 0.03;
    p.u_mean = 0.05;
    p.mode = {1, 0, 0};
    p.ns_mode = {{0, 2, 0}};
    p.direction = 1;
    const FluidState s = single_mode(g, p);
    double worst = 0.0;
    for (std::int64_t i = 0; i < g.size(); ++i) {
        const auto x = g.coords(i);
        worst = std::max(worst, std::fabs(s.density_e[i] - (1.0 + 0.1 * std::cos(tau * x[0]))));
        worst = std::max(worst, std::fabs(s.density_ns[i] -
                                          (1.0 + 0.03 * std::cos(2.0 * tau * x[1]))));
        worst = std::max(worst, std::fabs(s.velocity_e.comp[1][(std::size_t)i] -
                                          (0.05 + 0.02 * std::sin(tau * x[0]))));
    }
    CHECK(worst < 1e-14);
    CHECK(max_abs(s.velocity_e.comp[0]) == 0.0);
    CHECK(max_abs(s.velocity_ns.comp[0]) == 0.0);

    SingleModeParams bad = p;
    bad.direction = 2;
    CHECK_THROWS_AS(single_mode(g, bad), ConfigError);
    bad = p;
    bad.amplitude = 1.0;  // density touches zero
    CHECK_THROWS_AS(single_mode(g, bad), ConfigError);
}
