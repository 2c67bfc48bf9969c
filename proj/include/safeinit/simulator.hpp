#ifndef SAFEINIT_SIMULATOR_HPP
#define SAFEINIT_SIMULATOR_HPP

#include <utility>
#include <vector>

#include "safeinit/safety_policy.hpp"
#include "safeinit/scenario.hpp"

namespace safeinit {

struct SimConfig {
    double speed = 5.0;
    double omega_bar = 1.0;
    double capture_radius = 5.0;
    double dt = 0.1;
    double t_max = 60.0;
    PolicyConfig policy;
    // When set, vehicles frozen at their goals stay visible to the remaining
    // vehicles' threat assessments and violation checks (they still never move
    // or decide). Default: arrived vehicles leave the game entirely.
    bool frozen_vehicles_dangerous = false;

    void validate() const;
    // Defaults with speed/omega_bar/capture_radius taken from the grid.
    static SimConfig for_grid(const ValueGrid& grid);
};

struct TrajectoryPoint {
    double t = 0.0;
    VehicleState state;
    ControlMode mode = ControlMode::Goal;
    int avoid_target = -1;
    bool active = true;
};

struct Violation {
    double t = 0.0;
    int i = 0, j = 0;  // unordered pair stored with i < j
};

struct SimResult {
    bool success = false;
    bool reached_all = false;
    bool timed_out = false;
    int violation_count = 0;
    double end_time = 0.0;
    std::vector<std::vector<TrajectoryPoint>> trajectories;  // one series per vehicle
    std::vector<Violation> violation_log;
};

// Unordered pairs of considered vehicles within the capture radius of each
// other (distance <= radius, closed), sorted lexicographically.
std::vector<std::pair<int, int>> count_step_violations(
    const std::vector<VehicleState>& states, const std::vector<bool>& active,
    double capture_radius);

// Synchronous discrete-time rollout: per step, snapshot states, compute every
// active vehicle's decision from the snapshot, RK4-step all active vehicles,
// freeze vehicles inside their goal radius, then record violations. Ends when
// nobody is active or t reaches t_max (timed_out). success = everyone reached
// their goal with zero violations and no timeout. Throws NumericalError if a
// state goes non-finite. Requires a converged grid matching cfg.
SimResult run_simulation(const Scenario& scenario, const ValueGrid& grid,
                         const SimConfig& cfg);

}  // namespace safeinit

#endif
