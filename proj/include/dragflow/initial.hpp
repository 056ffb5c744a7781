// Built-in initial data families. Both construct primitive-form states and
// verify density positivity before any stepping happens.
#pragma once

#include <cmath>
#include <optional>
#include <random>

#include "dragflow/model.hpp"
#include "dragflow/rng.hpp"

namespace dragflow {

// rho = 1 + a cos(2 pi k.x), u = (u_mean + b sin(2 pi k.x)) e,
// n = 1 + a' cos(2 pi k'.x), v = 0, with e a coordinate direction.
// b, a' and u_mean default to a; a nonzero u_mean opens an initial gap
// between the phase momenta so their exponential alignment is visible.
struct SingleModeParams {
    double amplitude = 0.05;
    std::optional<double> velocity_amplitude;
    std::optional<double> ns_amplitude;
    std::optional<double> u_mean;
    std::array<int, 3> mode{1, 0, 0};
    std::optional<std::array<int, 3>> ns_mode;
    int direction = 0;
};

namespace detail {

inline void check_positive_initial(const FluidState& s, double floor) {
    std::int64_t arg = 0;
    const double mr = min_value(s.density_e.v, &arg);
    if (!(mr >= floor)) {
        std::ostringstream os;
        os << "initial Euler density " << mr << " is below the vacuum floor " << floor
           << "; reduce the amplitude";
        throw ConfigError(os.str());
    }
    const double mn = min_value(s.density_ns.v, &arg);
    if (!(mn >= floor)) {
        std::ostringstream os;
        os << "initial NS density " << mn << " is below the vacuum floor " << floor
           << "; reduce the amplitude";
        throw ConfigError(os.str());
    }
}

inline double mode_phase(const Grid& g, std::int64_t flat, const std::array<int, 3>& mode) {
    const auto x = g.coords(flat);
    double s = 0.0;
    for (int a = 0; a < g.dim(); ++a) s += mode[a] * x[a] / g.length(a);
    return 2.0 * M_PI * s;
}

}  // namespace detail

inline FluidState single_mode(const Grid& g, const SingleModeParams& p,
                              double vacuum_floor = 1e-8) {
    if (p.direction < 0 || p.direction >= g.dim())
        throw ConfigError("single_mode: direction must name a grid axis");
    const double a = p.amplitude;
    const double b = p.velocity_amplitude.value_or(a);
    const double ap = p.ns_amplitude.value_or(a);
    const double um = p.u_mean.value_or(a);
    const std::array<int, 3> kp = p.ns_mode.value_or(p.mode);

    FluidState s = FluidState::equilibrium(g, Formulation::primitive);
    for (std::int64_t i = 0; i < g.size(); ++i) {
        const double ph = detail::mode_phase(g, i, p.mode);
        const double php = detail::mode_phase(g, i, kp);
        s.density_e[i] = 1.0 + a * std::cos(ph);
        s.velocity_e.comp[p.direction][(std::size_t)i] = um + b * std::sin(ph);
        s.density_ns[i] = 1.0 + ap * std::cos(php);
    }
    detail::check_positive_initial(s, vacuum_floor);
    return s;
}

// Seeded mean-zero noise supported on modes with every |k_a| <= k_max,
// rescaled so its grid max-norm equals `amplitude`. Identical seeds give
// identical fields.
inline ScalarField random_band_limited(const Grid& g, std::uint64_t seed, int k_max,
                                       double amplitude) {
    if (k_max < 1) throw ConfigError("random field k_max must be at least 1");
    for (int a = 0; a < g.dim(); ++a)
        if (3 * k_max > g.n(a))
            throw ConfigError("random field k_max exceeds the dealiased band; raise n_points");
    std::mt19937_64 gen(seed);
    std::uniform_real_distribution<double> amp(-1.0, 1.0);
    std::uniform_real_distribution<double> phase(0.0, 2.0 * M_PI);

    // enumerate half of the mode lattice (the other half is implied by
    // realness); each retained mode contributes amp cos(2 pi k.x + phase)
    std::vector<std::array<int, 3>> modes;
    const int k1 = g.dim() > 1 ? k_max : 0;
    const int k2 = g.dim() > 2 ? k_max : 0;
    for (int m0 = -k_max; m0 <= k_max; ++m0)
        for (int m1 = -k1; m1 <= k1; ++m1)
            for (int m2 = -k2; m2 <= k2; ++m2) {
                if (m0 == 0 && m1 == 0 && m2 == 0) continue;
                if (m0 < 0 || (m0 == 0 && (m1 < 0 || (m1 == 0 && m2 < 0)))) continue;
                modes.push_back({m0, m1, m2});
            }

    ScalarField f(g);
    for (const auto& m : modes) {
        const double c = amp(gen);
        const double ph = phase(gen);
        for (std::int64_t i = 0; i < g.size(); ++i)
            f[i] += c * std::cos(detail::mode_phase(g, i, m) + ph);
    }
    const double mx = max_abs(f.v);
    if (mx > 0.0) {
        const double s = amplitude / mx;
        for (std::int64_t i = 0; i < g.size(); ++i) f[i] *= s;
    }
    return f;
}

struct RandomSmoothParams {
    double amplitude = 0.01;
    int k_max = 4;
    std::uint64_t seed = 12345;
};

// Equilibrium plus independent band-limited noise in every unknown.
inline FluidState random_smooth(const Grid& g, const RandomSmoothParams& p,
                                double vacuum_floor = 1e-8) {
    FluidState s = FluidState::equilibrium(g, Formulation::primitive);
    std::uint64_t stream = p.seed;
    auto next = [&stream]() { return splitmix64(stream++); };
    ScalarField noise = random_band_limited(g, next(), p.k_max, p.amplitude);
    for (std::int64_t i = 0; i < g.size(); ++i) s.density_e[i] = 1.0 + noise[i];
    noise = random_band_limited(g, next(), p.k_max, p.amplitude);
    for (std::int64_t i = 0; i < g.size(); ++i) s.density_ns[i] = 1.0 + noise[i];
    for (int a = 0; a < g.dim(); ++a) {
        noise = random_band_limited(g, next(), p.k_max, p.amplitude);
        s.velocity_e.comp[a] = noise.v;
        noise = random_band_limited(g, next(), p.k_max, p.amplitude);
        s.velocity_ns.comp[a] = noise.v;
    }
    detail::check_positive_initial(s, vacuum_floor);
    return s;
}

}  // namespace dragflow
