#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "safeinit/reachability.hpp"
#include "safeinit/rng.hpp"
#include "test_support.hpp"

using namespace safeinit;

namespace {

// Exhaustive max-min over turn-rate lattices. The payoff is linear in each
// turn rate, so a lattice containing the interval endpoints finds the exact
// game value.
double lattice_hamiltonian(const RelativeState& r, const Vec3& p, double speed,
                           double omega_bar, int points) {
    double best_i = -std::numeric_limits<double>::infinity();
    for (int a = 0; a < points; ++a) {
        const double wi = -omega_bar + 2.0 * omega_bar * a / (points - 1);
        double worst_j = std::numeric_limits<double>::infinity();
        for (int b = 0; b < points; ++b) {
            const double wj = -omega_bar + 2.0 * omega_bar * b / (points - 1);
            const Vec3 f = relative_derivative(r, wi, wj, speed);
            worst_j = std::min(worst_j, p[0] * f[0] + p[1] * f[1] + p[2] * f[2]);
        }
        best_i = std::max(best_i, worst_j);
    }
    return best_i;
}

ValueGrid linear_value_grid(double cx, double cy, double ct) {
    const GridSpec spec = GridSpec::default_relative(20.0, 21, 16);
    ValueGrid g;
    g.spec = spec;
    g.converged = true;
    g.params = {5.0, 1.0, 5.0};
    g.values.resize(spec.node_count());
    for (std::size_t it = 0; it < spec.dims[2]; ++it)
        for (std::size_t iy = 0; iy < spec.dims[1]; ++iy)
            for (std::size_t ix = 0; ix < spec.dims[0]; ++ix)
                g.at(ix, iy, it) = cx * spec.node_coord(0, ix) + cy * spec.node_coord(1, iy) +
                                   ct * spec.node_coord(2, it);
    return g;
}

}  // namespace

TEST_CASE("closed-form hamiltonian matches the control-lattice game") {
    Rng rng(2024);
    for (int trial = 0; trial < 400; ++trial) {
        const RelativeState r{rng.uniform(-20, 20), rng.uniform(-20, 20),
                              rng.uniform(-kPi, kPi)};
        const Vec3 p{rng.uniform(-3, 3), rng.uniform(-3, 3), rng.uniform(-3, 3)};
        const double closed = hamiltonian(r, p, 5.0, 1.0);
        const double brute = lattice_hamiltonian(r, p, 5.0, 1.0, 41);
        CHECK(closed == doctest::Approx(brute).epsilon(1e-10).scale(1.0));
    }
}

TEST_CASE("dissipation bounds dominate the flow field") {
    const GridSpec spec = GridSpec::default_relative(20.0, 41, 31);
    const Vec3 alpha = dissipation_bounds(spec, 5.0, 1.0);
    Rng rng(31337);
    Vec3 seen{0.0, 0.0, 0.0};
    for (int trial = 0; trial < 20000; ++trial) {
        const RelativeState r{rng.uniform(-20, 20), rng.uniform(-20, 20),
                              rng.uniform(-kPi, kPi)};
        const double wi = rng.uniform01() < 0.5 ? -1.0 : 1.0;
        const double wj = rng.uniform01() < 0.5 ? -1.0 : 1.0;
        const Vec3 f = relative_derivative(r, wi, wj, 5.0);
        for (int k = 0; k < 3; ++k) {
            CHECK(std::abs(f[k]) <= alpha[k] + 1e-12);
            seen[k] = std::max(seen[k], std::abs(f[k]));
        }
    }
    // Corner probes show the bounds are tight, not just safe.
    const Vec3 corner = relative_derivative({0.0, 20.0, -kPi}, 1.0, 1.0, 5.0);
    seen[0] = std::max(seen[0], std::abs(corner[0]));
    const Vec3 corner2 = relative_derivative({20.0, 0.0, kPi / 2.0}, -1.0, 1.0, 5.0);
    seen[1] = std::max(seen[1], std::abs(corner2[1]));
    const Vec3 corner3 = relative_derivative({0.0, 0.0, 0.0}, -1.0, 1.0, 5.0);
    seen[2] = std::max(seen[2], std::abs(corner3[2]));
    for (int k = 0; k < 3; ++k) CHECK(seen[k] >= 0.8 * alpha[k]);
}

TEST_CASE("cfl timestep is half the tightest cell crossing time") {
    const GridSpec spec = GridSpec::default_relative(20.0, 41, 31);
    const Vec3 alpha = dissipation_bounds(spec, 5.0, 1.0);
    const double limit = cfl_limit(spec, 5.0, 1.0);
    double expect = std::numeric_limits<double>::infinity();
    for (int k = 0; k < 3; ++k) expect = std::min(expect, spec.cell_size(k) / alpha[k]);
    CHECK(limit == doctest::Approx(expect));
    CHECK(cfl_timestep(spec, 5.0, 1.0) == doctest::Approx(0.5 * expect));
}

TEST_CASE("sweeping above the cfl limit throws") {
    ValueGrid g = signed_distance_init(GridSpec::default_relative(20.0, 21, 16), 5.0);
    g.params = {5.0, 1.0, 5.0};
    const double limit = cfl_limit(g.spec, 5.0, 1.0);
    CHECK_THROWS_AS(lax_friedrichs_sweep(g, 5.0, 1.0, limit * 1.01), std::invalid_argument);
    CHECK_NOTHROW(lax_friedrichs_sweep(g, 5.0, 1.0, limit * 0.5));
}

TEST_CASE("a sweep never raises any node") {
    const GridSpec spec = GridSpec::default_relative(20.0, 21, 16);
    ValueGrid g = signed_distance_init(spec, 5.0);
    g.params = {5.0, 1.0, 5.0};
    Rng rng(8);
    for (double& v : g.values) v += rng.uniform(-2.0, 2.0);
    const std::vector<double> before = g.values;
    const double residual = lax_friedrichs_sweep(g, 5.0, 1.0, cfl_timestep(spec, 5.0, 1.0));
    CHECK(residual > 0.0);
    double max_change = 0.0;
    for (std::size_t i = 0; i < g.values.size(); ++i) {
        CHECK(g.values[i] <= before[i]);
        max_change = std::max(max_change, before[i] - g.values[i]);
    }
    CHECK(residual == doctest::Approx(max_change));
}

TEST_CASE("the solved coarse grid converges onto a floored, contained set") {
    const ValueGrid& g = testsupport::coarse_grid();
    CHECK(g.converged);
    CHECK(g.residual < 1e-3);
    CHECK(g.params.speed == 5.0);
    CHECK(g.params.capture_radius == 5.0);

    const ValueGrid init = signed_distance_init(g.spec, 5.0);
    double min_v = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < g.values.size(); ++i) {
        CHECK(g.values[i] <= init.values[i]);  // solving only grows the unsafe set
        min_v = std::min(min_v, g.values[i]);
    }
    // The deepest value is the floor -Rc, attained where vehicles coincide.
    CHECK(min_v >= -5.0 - 1e-9);
    CHECK(min_v == doctest::Approx(-5.0).epsilon(1e-9));

    // Danger disk containment: at or inside Rc the value is nonpositive.
    for (std::size_t it = 0; it < g.spec.dims[2]; ++it)
        for (std::size_t iy = 0; iy < g.spec.dims[1]; ++iy)
            for (std::size_t ix = 0; ix < g.spec.dims[0]; ++ix) {
                const double x = g.spec.node_coord(0, ix), y = g.spec.node_coord(1, iy);
                if (std::sqrt(x * x + y * y) <= 5.0) CHECK(g.at(ix, iy, it) <= 0.0);
            }

    // A same-heading tail chase far outside the disk stays safe.
    CHECK(value_at(g, {15.0, 0.0, 0.0}) > 3.0);
    // Head-on just outside the disk is already doomed.
    CHECK(value_at(g, {5.5, 0.0, -kPi}) < 0.0);
}

TEST_CASE("the solved values inherit the reflection symmetry of the game") {
    const ValueGrid& g = testsupport::coarse_grid();
    const std::size_t nx = g.spec.dims[0], ny = g.spec.dims[1], nt = g.spec.dims[2];
    double worst = 0.0;
    for (std::size_t it = 0; it < nt; ++it) {
        const std::size_t mt = (nt - it) % nt;
        for (std::size_t iy = 0; iy < ny; ++iy) {
            const std::size_t my = ny - 1 - iy;
            for (std::size_t ix = 0; ix < nx; ++ix) {
                worst = std::max(worst, std::abs(g.at(ix, iy, it) - g.at(ix, my, mt)));
            }
        }
    }
    CHECK(worst < 1e-9);
}

TEST_CASE("unconverged solves report honestly") {
    const GridSpec spec = GridSpec::default_relative(20.0, 21, 16);
    SolveReport report;
    const ValueGrid g =
        solve_brs(signed_distance_init(spec, 5.0), 5.0, 1.0, 1e-3, 0.5, 1, &report);
    CHECK_FALSE(report.converged);
    CHECK_FALSE(g.converged);
    CHECK(report.pseudo_time >= 0.5);
    CHECK(report.sweeps > 0);
}

TEST_CASE("avoidance control follows the switching surface of a known costate") {
    // V = yr: the switching term is p1*yr - p2*xr - p3 = -xr.
    const ValueGrid gy = linear_value_grid(0.0, 1.0, 0.0);
    CHECK(optimal_avoid_control(gy, {3.0, 2.0, 0.5}, 1.0).omega == -1.0);   // -xr < 0
    CHECK(optimal_avoid_control(gy, {-3.0, 2.0, 0.5}, 1.0).omega == 1.0);   // -xr > 0

    // V = xr: switching term is yr.
    const ValueGrid gx = linear_value_grid(1.0, 0.0, 0.0);
    CHECK(optimal_avoid_control(gx, {2.0, 4.0, 0.5}, 1.0).omega == 1.0);
    CHECK(optimal_avoid_control(gx, {2.0, -4.0, 0.5}, 1.0).omega == -1.0);

    // V independent of position, increasing in thetar: p3 = 1.
    const ValueGrid gt = linear_value_grid(0.0, 0.0, 1.0);
    // Away from the heading seam the gradient is 1, so the avoid turn is
    // -sign(0 - 0 - 1) and the pursuer turn is -sign(1).
    CHECK(optimal_avoid_control(gt, {2.0, 2.0, 0.0}, 1.0).omega == -1.0);
    CHECK(optimal_pursuer_control(gt, {2.0, 2.0, 0.0}, 1.0).omega == -1.0);
}

TEST_CASE("degenerate switching surfaces fall back to bearing-based turns") {
    // V = yr gives switching term -xr; at xr = 0 the term vanishes and the
    // avoid turn heads away from the other vehicle's side.
    const ValueGrid gy = linear_value_grid(0.0, 1.0, 0.0);
    CHECK(optimal_avoid_control(gy, {0.0, 2.0, 0.5}, 1.0).omega == -1.0);   // left, turn right
    CHECK(optimal_avoid_control(gy, {0.0, -2.0, 0.5}, 1.0).omega == 1.0);   // right, turn left
    CHECK(optimal_avoid_control(gy, {0.0, 0.0, 0.5}, 1.0).omega == 1.0);    // yr = 0 edge

    // A sub-deadband switching term is overridden the same way: here the term
    // is -0.3 but the other vehicle sits to the right, so the turn is +1.
    CHECK(optimal_avoid_control(gy, {0.3, -2.0, 0.5}, 1.0).omega == 1.0);

    // Pursuer with p3 = 0 turns toward the observer. The observer's bearing
    // sign in the pursuer's frame is sin(thetar)*xr - cos(thetar)*yr.
    const ValueGrid gx = linear_value_grid(1.0, 0.0, 0.0);
    CHECK(optimal_pursuer_control(gx, {2.0, 4.0, 0.5}, 1.0).omega == -1.0);
    CHECK(optimal_pursuer_control(gx, {2.0, -4.0, 0.5}, 1.0).omega == 1.0);
}

TEST_CASE("optimal avoidance holds the barrier in short games") {
    const ValueGrid& g = testsupport::coarse_grid();
    const double margin = g.spec.cell_diagonal();
    Rng rng(404);
    int tested = 0;
    while (tested < 10) {
        RelativeState r{rng.uniform(-15, 15), rng.uniform(-15, 15), rng.uniform(-kPi, kPi)};
        if (value_at(g, r) < 0.5) continue;
        ++tested;
        VehicleState evader{0.0, 0.0, 0.0};
        VehicleState pursuer{r.xr, r.yr, r.thetar};
        for (int step = 0; step < 200; ++step) {
            const RelativeState rel = relative_state(evader, pursuer);
            const ControlInput ui = optimal_avoid_control(g, rel, 1.0);
            const ControlInput uj = optimal_pursuer_control(g, rel, 1.0);
            evader = step_rk4(evader, ui, 5.0, 0.05);
            pursuer = step_rk4(pursuer, uj, 5.0, 0.05);
            const double dist = std::hypot(pursuer.qx - evader.qx, pursuer.qy - evader.qy);
            CHECK(dist >= 5.0 - margin);
        }
    }
}
