// Particle phase: cloud-in-cell deposition identities, seeded determinism,
// the Ornstein-Uhlenbeck stationary variance against its closed form, the
// no-momentum-exchange property of local alignment, and the Monte Carlo and
// relaxation behavior of the coupled sweep on reduced sizes.
#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

#include "dragflow/kinetic.hpp"

using namespace dragflow;

namespace {

constexpr double tau = 2.0 * std::numbers::pi;

Grid grid1d(std::int64_t n) { return Grid(1, {n, 1, 1}, {1.0, 1.0, 1.0}); }

ParticleEnsemble two_particles(const Grid& g, double x0, double xi0, double x1, double xi1,
                               double weight) {
    ParticleEnsemble e;
    e.grid = g;
    e.weight = weight;
    e.epsilon = 1.0;
    e.rng_seed = 1;
    e.position[0] = {x0, x1};
    e.velocity[0] = {xi0, xi1};
    return e;
}

}  // namespace

TEST_CASE("cloud-in-cell deposition splits mass by the fractional offset") {
    const Grid g = grid1d(8);
    const double dx = g.dx(0);

    // A particle exactly on a node deposits into that cell alone.
    ParticleEnsemble on_node = two_particles(g, 3.0 * dx, 0.0, 5.0 * dx, 0.0, 0.25);
    const KineticMoments m1 = deposit_moments(on_node, g, 0.0);
    CHECK(m1.rho_f[3] == Catch::Approx(0.25 / dx).epsilon(1e-14));
    CHECK(m1.rho_f[5] == Catch::Approx(0.25 / dx).epsilon(1e-14));
    CHECK(m1.rho_f[4] == 0.0);

    // A particle at a cell midpoint splits evenly, wrapping at the boundary.
    ParticleEnsemble split = two_particles(g, 2.5 * dx, 0.0, 7.5 * dx, 0.0, 0.5);
    const KineticMoments m2 = deposit_moments(split, g, 0.0);
    CHECK(m2.rho_f[2] == Catch::Approx(0.25 / dx).epsilon(1e-14));
    CHECK(m2.rho_f[3] == Catch::Approx(0.25 / dx).epsilon(1e-14));
    CHECK(m2.rho_f[7] == Catch::Approx(0.25 / dx).epsilon(1e-14));
    CHECK(m2.rho_f[0] == Catch::Approx(0.25 / dx).epsilon(1e-14));
}

TEST_CASE("deposition conserves mass and momentum exactly") {
    const Grid g = grid1d(16);
    const ScalarField rho0(g, 1.0);
    VectorField u0(g);
    for (std::int64_t i = 0; i < g.size(); ++i)
        u0.comp[0][(std::size_t)i] = 0.3 * std::sin(tau * g.coords(i)[0]);
    const ParticleEnsemble e = sample_ensemble(rho0, u0, 20000, 1.0, 42);

    const KineticMoments m = deposit_moments(e, g);
    CHECK(m.floored == 0);
    CHECK(integral(m.rho_f) == Catch::Approx(e.weight * (double)e.count()).epsilon(1e-14));

    // Cell-summed deposited momentum equals the particle sum.
    KahanSum particle_momentum;
    for (double xi : e.velocity[0]) particle_momentum.add(e.weight * xi);
    KahanSum cell_momentum;
    for (std::int64_t i = 0; i < g.size(); ++i)
        cell_momentum.add(m.rho_f[i] * m.u_f.comp[0][(std::size_t)i] * g.cell_volume());
    CHECK(cell_momentum.value() ==
          Catch::Approx(particle_momentum.value()).margin(1e-12));
}

TEST_CASE("sampling is seeded and matches the requested law") {
    const Grid g = grid1d(32);
    ScalarField rho0(g);
    VectorField u0(g);
    for (std::int64_t i = 0; i < g.size(); ++i) {
        const double x = g.coords(i)[0];
        rho0[i] = 1.0 + 0.2 * std::cos(tau * x);
        u0.comp[0][(std::size_t)i] = 0.05 * std::sin(tau * x);
    }
    const ParticleEnsemble a = sample_ensemble(rho0, u0, 50000, 0.5, 7);
    const ParticleEnsemble b = sample_ensemble(rho0, u0, 50000, 0.5, 7);
    const ParticleEnsemble c = sample_ensemble(rho0, u0, 50000, 0.5, 8);
    CHECK(a.position[0] == b.position[0]);
    CHECK(a.velocity[0] == b.velocity[0]);
    CHECK(a.position[0] != c.position[0]);
    CHECK(a.weight == Catch::Approx(integral(rho0) / 50000.0).epsilon(1e-14));

    // Deposited density tracks rho0 and velocities are u0 plus unit noise.
    const KineticMoments m = deposit_moments(a, g);
    double l2 = 0.0;
    for (std::int64_t i = 0; i < g.size(); ++i)
        l2 += std::pow(m.rho_f[i] - rho0[i], 2) * g.cell_volume();
    CHECK(std::sqrt(l2) < 0.05);

    KahanSum vsum, vsq;
    for (double xi : a.velocity[0]) vsum.add(xi);
    const double vmean = vsum.value() / (double)a.count();
    for (double xi : a.velocity[0]) vsq.add((xi - vmean) * (xi - vmean));
    CHECK(std::fabs(vmean) < 0.02);
    CHECK(vsq.value() / (double)(a.count() - 1) == Catch::Approx(1.0).epsilon(0.03));

    CHECK_THROWS_AS(sample_ensemble(rho0, u0, 0, 1.0, 1), ConfigError);
    CHECK_THROWS_AS(sample_ensemble(rho0, u0, 10, -1.0, 1), ConfigError);
    CHECK_THROWS_AS(sample_ensemble(ScalarField(g, 0.0), u0, 10, 1.0, 1), PreconditionError);
}

TEST_CASE("alignment toward the deposited mean exchanges no momentum") {
    const Grid g = grid1d(16);
    ScalarField rho0(g);
    VectorField u0(g);
    for (std::int64_t i = 0; i < g.size(); ++i) {
        const double x = g.coords(i)[0];
        rho0[i] = 1.0 + 0.3 * std::cos(tau * x);
        u0.comp[0][(std::size_t)i] = 0.1 * std::sin(tau * x);
    }
    const ParticleEnsemble e = sample_ensemble(rho0, u0, 30000, 1.0, 99);
    const KineticMoments m = deposit_moments(e, g);
    const VectorField dep = alignment_deposit(e, m);
    CHECK(max_abs(dep.comp[0]) < 1e-12);
}

TEST_CASE("uniform ornstein-uhlenbeck variance matches the discrete fixed point") {
    const double eps = 0.5;
    const double dt = eps / 64.0;
    const double var = uniform_stationary_variance(eps, dt, 8.0, 20000, 4321);

    // Continuous limit 1/(1+eps), Euler-Maruyama fixed point
    // (2/eps) dt / (1 - (1 - r dt)^2) with r = 1 + 1/eps.
    const double r = 1.0 + 1.0 / eps;
    const double var_em = (2.0 / eps) * dt / (1.0 - std::pow(1.0 - r * dt, 2));
    CHECK(var == Catch::Approx(var_em).epsilon(0.01));
    CHECK(var == Catch::Approx(1.0 / (1.0 + eps)).epsilon(0.02));

    CHECK_THROWS_AS(uniform_stationary_variance(0.1, 0.05, 1.0, 100, 1), PreconditionError);
    CHECK_THROWS_AS(uniform_stationary_variance(-1.0, 0.01, 1.0, 100, 1), ConfigError);
}

TEST_CASE("noise-free aligned particles advect without velocity change") {
    const Grid g = grid1d(16);
    const double c = 0.25;
    ParticleEnsemble e;
    e.grid = g;
    e.weight = 1.0 / 1000.0;
    e.epsilon = 0.8;
    e.rng_seed = 5;
    for (int p = 0; p < 1000; ++p) {
        e.position[0].push_back((double)p / 1000.0);
        e.velocity[0].push_back(c);
    }
    const VectorField v(g, c);
    const KineticMoments m = deposit_moments(e, g);
    ParticleEnsemble stepped = e;
    step_particles_inplace(stepped, v, m, 0.1, false);
    for (int p = 0; p < 1000; p += 97) {
        CHECK(stepped.velocity[0][(std::size_t)p] == Catch::Approx(c).margin(1e-13));
        const double want = std::fmod(e.position[0][(std::size_t)p] + 0.1 * c, 1.0);
        CHECK(stepped.position[0][(std::size_t)p] == Catch::Approx(want).margin(1e-13));
    }
    CHECK(stepped.step_count == e.step_count + 1);

    CHECK_THROWS_AS(step_particles_inplace(stepped, v, m, 0.5, true), PreconditionError);
}

TEST_CASE("particle stepping is bitwise deterministic") {
    const Grid g = grid1d(16);
    const ScalarField rho0(g, 1.0);
    const VectorField u0(g);
    const VectorField v(g, 0.1);
    auto advance = [&]() {
        ParticleEnsemble e = sample_ensemble(rho0, u0, 5000, 0.4, 2718);
        for (int k = 0; k < 10; ++k) {
            const KineticMoments m = deposit_moments(e, g);
            step_particles_inplace(e, v, m, 0.05, true);
        }
        return e;
    };
    const ParticleEnsemble a = advance();
    const ParticleEnsemble b = advance();
    CHECK(a.position[0] == b.position[0]);
    CHECK(a.velocity[0] == b.velocity[0]);
}

TEST_CASE("coupling source pushes the ns phase toward the kinetic mean") {
    const Grid g = grid1d(8);
    // Velocity pairs +1/-1 in every cell: u_f = 0 and the source reduces to
    // -rho_f v.
    ParticleEnsemble e;
    e.grid = g;
    e.weight = 1.0 / 16.0;
    e.epsilon = 1.0;
    e.rng_seed = 3;
    for (std::int64_t i = 0; i < g.size(); ++i) {
        const double x = (double)i * g.dx(0);
        e.position[0].insert(e.position[0].end(), {x, x});
        e.velocity[0].insert(e.velocity[0].end(), {1.0, -1.0});
    }
    const VectorField v(g, 0.3);
    const VectorField src = coupling_source(e, v, g, 0.0);
    for (std::int64_t i = 0; i < g.size(); ++i)
        CHECK(src.comp[0][(std::size_t)i] == Catch::Approx(-0.3).epsilon(1e-12));
}

TEST_CASE("monte carlo error halves when the particle count quadruples") {
    // Small eps keeps the deterministic closure gap well below the Monte
    // Carlo noise, so quadrupling the count should halve the error.
    SweepConfig base;
    base.n_cells = 32;
    base.eps_list = {0.1};
    base.t_end = 0.4;
    base.sample_every = 25;
    base.particles = 4000;
    const SweepReport r1 = run_limit_sweep(base);
    base.particles = 16000;
    const SweepReport r2 = run_limit_sweep(base);
    REQUIRE(r1.rows.size() == 1);
    REQUIRE(r2.rows.size() == 1);
    const double ratio = r1.rows[0].err_moments / r2.rows[0].err_moments;
    CHECK(ratio > 1.4);
    CHECK(ratio < 2.9);
}

TEST_CASE("moment errors shrink with eps at fixed particle count") {
    SweepConfig cfg;
    cfg.n_cells = 32;
    cfg.eps_list = {1.0, 0.1};
    cfg.t_end = 1.0;
    cfg.particles = 20000;
    const SweepReport rep = run_limit_sweep(cfg);
    REQUIRE(rep.rows.size() == 2);
    CHECK(rep.rows[1].err_moments < rep.rows[0].err_moments);
    CHECK(rep.monotone_ok);
    CHECK(rep.variance_ok);
    for (const SweepRow& row : rep.rows)
        CHECK(row.uniform_var ==
              Catch::Approx(1.0 / (1.0 + row.eps)).epsilon(0.02));
}
