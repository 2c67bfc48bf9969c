#include "safeinit/reachability.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <thread>

namespace safeinit {

double hamiltonian(const RelativeState& r, const Vec3& costate, double speed,
                   double omega_bar) {
    const double p1 = costate[0], p2 = costate[1], p3 = costate[2];
    return p1 * (-speed + speed * std::cos(r.thetar)) + p2 * speed * std::sin(r.thetar) +
           omega_bar * std::abs(p1 * r.yr - p2 * r.xr - p3) - omega_bar * std::abs(p3);
}

Vec3 dissipation_bounds(const GridSpec& spec, double speed, double omega_bar) {
    const double max_abs_x = std::max(std::abs(spec.mins[0]), std::abs(spec.maxs[0]));
    const double max_abs_y = std::max(std::abs(spec.mins[1]), std::abs(spec.maxs[1]));
    return {2.0 * speed + omega_bar * max_abs_y,
            speed + omega_bar * max_abs_x,
            2.0 * omega_bar};
}

double cfl_limit(const GridSpec& spec, double speed, double omega_bar) {
    const Vec3 alpha = dissipation_bounds(spec, speed, omega_bar);
    double limit = std::numeric_limits<double>::infinity();
    for (int a = 0; a < 3; ++a) limit = std::min(limit, spec.cell_size(a) / alpha[a]);
    return limit;
}

double cfl_timestep(const GridSpec& spec, double speed, double omega_bar) {
    return 0.5 * cfl_limit(spec, speed, omega_bar);
}

namespace {

struct SweepContext {
    const GridSpec* spec;
    const double* old_values;
    double* new_values;
    double speed, omega_bar, dt;
    Vec3 alpha;
    std::vector<double> xs, ys, cos_t, sin_t;
};

// Updates heading slabs [t_begin, t_end) and returns their max absolute change.
double sweep_slab(const SweepContext& ctx, std::size_t t_begin, std::size_t t_end) {
    const std::size_t nx = ctx.spec->dims[0];
    const std::size_t ny = ctx.spec->dims[1];
    const std::size_t nt = ctx.spec->dims[2];
    const double inv_dx = 1.0 / ctx.spec->cell_size(0);
    const double inv_dy = 1.0 / ctx.spec->cell_size(1);
    const double inv_dt = 1.0 / ctx.spec->cell_size(2);
    const std::size_t plane = nx * ny;
    const double v = ctx.speed, wb = ctx.omega_bar;
    const double a1 = ctx.alpha[0], a2 = ctx.alpha[1], a3 = ctx.alpha[2];
    double max_change = 0.0;

    for (std::size_t it = t_begin; it < t_end; ++it) {
        const double drift_x = -v + v * ctx.cos_t[it];
        const double drift_y = v * ctx.sin_t[it];
        const std::size_t it_m = (it + nt - 1) % nt;
        const std::size_t it_p = (it + 1) % nt;
        for (std::size_t iy = 0; iy < ny; ++iy) {
            const double y = ctx.ys[iy];
            const std::size_t row = (it * ny + iy) * nx;
            const std::size_t row_ym = iy > 0 ? row - nx : row;
            const std::size_t row_yp = iy + 1 < ny ? row + nx : row;
            const std::size_t row_tm = (it_m * ny + iy) * nx;
            const std::size_t row_tp = (it_p * ny + iy) * nx;
            for (std::size_t ix = 0; ix < nx; ++ix) {
                const double center = ctx.old_values[row + ix];

                double dmx, dpx;
                if (ix == 0) {
                    dpx = (ctx.old_values[row + 1] - center) * inv_dx;
                    dmx = dpx;
                } else if (ix == nx - 1) {
                    dmx = (center - ctx.old_values[row + ix - 1]) * inv_dx;
                    dpx = dmx;
                } else {
                    dmx = (center - ctx.old_values[row + ix - 1]) * inv_dx;
                    dpx = (ctx.old_values[row + ix + 1] - center) * inv_dx;
                }

                double dmy, dpy;
                if (iy == 0) {
                    dpy = (ctx.old_values[row_yp + ix] - center) * inv_dy;
                    dmy = dpy;
                } else if (iy == ny - 1) {
                    dmy = (center - ctx.old_values[row_ym + ix]) * inv_dy;
                    dpy = dmy;
                } else {
                    dmy = (center - ctx.old_values[row_ym + ix]) * inv_dy;
                    dpy = (ctx.old_values[row_yp + ix] - center) * inv_dy;
                }

                const double dmt = (center - ctx.old_values[row_tm + ix]) * inv_dt;
                const double dpt = (ctx.old_values[row_tp + ix] - center) * inv_dt;

                const double p1 = 0.5 * (dmx + dpx);
                const double p2 = 0.5 * (dmy + dpy);
                const double p3 = 0.5 * (dmt + dpt);

                const double ham = p1 * drift_x + p2 * drift_y +
                                   wb * std::abs(p1 * y - p2 * ctx.xs[ix] - p3) -
                                   wb * std::abs(p3);
                const double dissipation =
                    0.5 * (a1 * (dpx - dmx) + a2 * (dpy - dmy) + a3 * (dpt - dmt));
                const double update = std::min(0.0, ham + dissipation);
                ctx.new_values[row + ix] = center + ctx.dt * update;
                max_change = std::max(max_change, -ctx.dt * update);
            }
        }
    }
    (void)plane;
    return max_change;
}

}  // namespace

double lax_friedrichs_sweep(ValueGrid& grid, double speed, double omega_bar,
                            double dt_pde, int workers,
                            std::vector<double>* scratch) {
    grid.spec.validate();
    if (!(dt_pde > 0.0)) throw std::invalid_argument("lax_friedrichs_sweep: dt_pde must be positive");
    const double limit = cfl_limit(grid.spec, speed, omega_bar);
    if (dt_pde > limit * (1.0 + 1e-12)) {
        std::ostringstream msg;
        msg << "lax_friedrichs_sweep: dt_pde " << dt_pde << " violates CFL limit " << limit;
        throw std::invalid_argument(msg.str());
    }
    if (workers < 1) workers = 1;

    std::vector<double> local_scratch;
    std::vector<double>& out = scratch ? *scratch : local_scratch;
    out.resize(grid.values.size());

    SweepContext ctx;
    ctx.spec = &grid.spec;
    ctx.old_values = grid.values.data();
    ctx.new_values = out.data();
    ctx.speed = speed;
    ctx.omega_bar = omega_bar;
    ctx.dt = dt_pde;
    ctx.alpha = dissipation_bounds(grid.spec, speed, omega_bar);
    const std::size_t nx = grid.spec.dims[0], ny = grid.spec.dims[1], nt = grid.spec.dims[2];
    ctx.xs.resize(nx);
    ctx.ys.resize(ny);
    ctx.cos_t.resize(nt);
    ctx.sin_t.resize(nt);
    for (std::size_t i = 0; i < nx; ++i) ctx.xs[i] = grid.spec.node_coord(0, i);
    for (std::size_t i = 0; i < ny; ++i) ctx.ys[i] = grid.spec.node_coord(1, i);
    for (std::size_t i = 0; i < nt; ++i) {
        const double th = grid.spec.node_coord(2, i);
        ctx.cos_t[i] = std::cos(th);
        ctx.sin_t[i] = std::sin(th);
    }

    double residual = 0.0;
    const std::size_t nworkers = std::min<std::size_t>(static_cast<std::size_t>(workers), nt);
    if (nworkers <= 1) {
        residual = sweep_slab(ctx, 0, nt);
    } else {
        std::vector<double> partial(nworkers, 0.0);
        std::vector<std::thread> threads;
        threads.reserve(nworkers);
        for (std::size_t w = 0; w < nworkers; ++w) {
            const std::size_t begin = nt * w / nworkers;
            const std::size_t end = nt * (w + 1) / nworkers;
            threads.emplace_back([&, w, begin, end] { partial[w] = sweep_slab(ctx, begin, end); });
        }
        for (auto& t : threads) t.join();
        for (double p : partial) residual = std::max(residual, p);
    }

    grid.values.swap(out);
    return residual;
}

ValueGrid solve_brs(const ValueGrid& init, double speed, double omega_bar,
                    double tol, double t_max, int workers, SolveReport* report,
                    const SolveProgress& progress) {
    if (!(tol > 0.0)) throw std::invalid_argument("solve_brs: tol must be positive");
    if (!(t_max > 0.0)) throw std::invalid_argument("solve_brs: t_max must be positive");
    ValueGrid grid = init;
    grid.params.speed = speed;
    grid.params.omega_bar = omega_bar;
    grid.converged = false;

    const double dt = cfl_timestep(grid.spec, speed, omega_bar);
    const std::size_t sweeps_per_check =
        static_cast<std::size_t>(std::ceil(1.0 / dt - 1e-12));

    std::vector<double> scratch(grid.values.size());
    std::vector<double> checkpoint = grid.values;

    SolveReport rep;
    double prev_sweep_residual = std::numeric_limits<double>::infinity();
    int growth_streak = 0;

    while (rep.pseudo_time < t_max && !grid.converged) {
        const double sweep_residual =
            lax_friedrichs_sweep(grid, speed, omega_bar, dt, workers, &scratch);
        ++rep.sweeps;
        rep.pseudo_time = static_cast<double>(rep.sweeps) * dt;

        if (sweep_residual > prev_sweep_residual) {
            if (++growth_streak >= 100) {
                std::ostringstream msg;
                msg << "solve_brs: residual grew for " << growth_streak
                    << " consecutive sweeps (sweep " << rep.sweeps << ", pseudo-time "
                    << rep.pseudo_time << ", last sweep residual " << sweep_residual << ")";
                throw NumericalError(msg.str());
            }
        } else {
            growth_streak = 0;
        }
        prev_sweep_residual = sweep_residual;

        if (rep.sweeps % sweeps_per_check == 0 || rep.pseudo_time >= t_max) {
            double block_residual = 0.0;
            for (std::size_t i = 0; i < grid.values.size(); ++i) {
                block_residual = std::max(block_residual, checkpoint[i] - grid.values[i]);
            }
            checkpoint = grid.values;
            rep.residual = block_residual;
            grid.residual = block_residual;
            if (block_residual < tol) grid.converged = true;
            if (progress) progress(rep);
        }
    }

    rep.converged = grid.converged;
    if (report) *report = rep;
    return grid;
}

// Below this switch-function magnitude the two turn extremes are within
// interpolation noise of each other (the max-min is degenerate on the switch
// surface, so any turn rate is optimal there). A bare sign() flips every step
// in that zone: two mutually avoiding vehicles then chatter in anti-phase,
// which integrates to a straight parallel cruise that can drift through the
// danger disk. The fallback picks among the near-optimal turns by bearing,
// which is chatter-free.
constexpr double kLeverDeadband = 0.5;

ControlInput optimal_avoid_control(const ValueGrid& grid, const RelativeState& r,
                                   double omega_bar) {
    const Vec3 p = gradient_at(grid, r);
    const double lever = p[0] * r.yr - p[1] * r.xr - p[2];
    if (std::fabs(lever) > kLeverDeadband)
        return {lever > 0.0 ? omega_bar : -omega_bar};
    // Turn away from the other vehicle's bearing; straight ahead or behind
    // (yr = 0) keeps the positive-turn convention.
    return {r.yr > 0.0 ? -omega_bar : omega_bar};
}

ControlInput optimal_pursuer_control(const ValueGrid& grid, const RelativeState& r,
                                     double omega_bar) {
    const Vec3 p = gradient_at(grid, r);
    if (std::fabs(p[2]) > kLeverDeadband) return {p[2] > 0.0 ? -omega_bar : omega_bar};
    // Turn toward the observer, whose bearing in the pursuer's own frame has
    // sign sin(thetar)*xr - cos(thetar)*yr; on that boundary keep the
    // negative-turn convention.
    const double cross = std::sin(r.thetar) * r.xr - std::cos(r.thetar) * r.yr;
    return {cross > 0.0 ? omega_bar : -omega_bar};
}

}  // namespace safeinit
