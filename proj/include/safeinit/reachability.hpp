#ifndef SAFEINIT_REACHABILITY_HPP
#define SAFEINIT_REACHABILITY_HPP

#include <cstddef>
#include <functional>
#include <vector>

#include "safeinit/dynamics.hpp"
#include "safeinit/grid.hpp"

namespace safeinit {

// Raised when the level-set iteration stops making numerical sense.
struct NumericalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Closed form of max over the observer's turn rate, min over the other
// vehicle's, of costate . relative_derivative; both rates bounded by omega_bar.
double hamiltonian(const RelativeState& r, const Vec3& costate, double speed,
                   double omega_bar);

// Global bounds alpha_k >= max |dH/dp_k| over the grid domain.
Vec3 dissipation_bounds(const GridSpec& spec, double speed, double omega_bar);

// Largest stable sweep step, min_k(dx_k / alpha_k).
double cfl_limit(const GridSpec& spec, double speed, double omega_bar);

// Solver step: half the CFL limit.
double cfl_timestep(const GridSpec& spec, double speed, double omega_bar);

// One synchronous (Jacobi) update of every node. One-sided differences p-, p+
// per axis; heading wraps, planar boundaries extend the edge slope. Each node
// moves by dt_pde * min(0, H(pbar) + sum_k alpha_k (p+_k - p-_k) / 2), so no
// value ever increases. Returns the max absolute change of the sweep.
// Throws on dt_pde above the CFL limit. `scratch` avoids re-allocating the
// double buffer across repeated sweeps.
double lax_friedrichs_sweep(ValueGrid& grid, double speed, double omega_bar,
                            double dt_pde, int workers = 1,
                            std::vector<double>* scratch = nullptr);

struct SolveReport {
    std::size_t sweeps = 0;
    double pseudo_time = 0.0;
    double residual = std::numeric_limits<double>::infinity();
    bool converged = false;
};

using SolveProgress = std::function<void(const SolveReport&)>;

// Iterates sweeps until the max node change per 1.0 s of pseudo-time falls
// below tol, or pseudo-time reaches t_max (grid then carries converged=false).
// Values are monotone nonincreasing throughout. Throws NumericalError if the
// per-sweep residual grows over 100 consecutive sweeps.
ValueGrid solve_brs(const ValueGrid& init, double speed, double omega_bar,
                    double tol, double t_max, int workers = 1,
                    SolveReport* report = nullptr,
                    const SolveProgress& progress = {});

// Maximizing turn rate for the observer at the interpolated costate. Inside a
// small switch-function deadband, where the max-min is degenerate and the
// interpolated sign chatters, the turn away from the other vehicle's bearing
// is used instead (yr = 0 resolves to +omega_bar).
ControlInput optimal_avoid_control(const ValueGrid& grid, const RelativeState& r,
                                   double omega_bar);

// Minimizing turn rate for the other vehicle, with the mirrored deadband rule:
// degenerate costates turn toward the observer (boundary resolves to
// -omega_bar).
ControlInput optimal_pursuer_control(const ValueGrid& grid, const RelativeState& r,
                                     double omega_bar);

}  // namespace safeinit

#endif
