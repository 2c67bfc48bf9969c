#ifndef SAFEINIT_SAFETY_POLICY_HPP
#define SAFEINIT_SAFETY_POLICY_HPP

#include <vector>

#include "safeinit/grid.hpp"
#include "safeinit/reachability.hpp"
#include "safeinit/scenario.hpp"

namespace safeinit {

struct PolicyConfig {
    double safety_threshold = 0.5;  // switch to avoidance at or below this value
    double goal_gain = 2.0;         // proportional heading gain
    double goal_radius = 1.0;       // arrival distance [m]
    double speed = 5.0;
    double omega_bar = 1.0;
};

enum class ControlMode { Goal, Avoid };

struct ControlDecision {
    double omega = 0.0;
    ControlMode mode = ControlMode::Goal;
    int avoid_target = -1;  // index of the vehicle being avoided, -1 in Goal mode
};

// Proportional steering toward the goal bearing, clamped to [-omega_bar,
// omega_bar]. The heading error is wrapped before scaling.
ControlInput goal_controller(const VehicleState& s, const Goal& goal,
                             const PolicyConfig& cfg);

// N x N matrix (flat, row-major) of pairwise values V(relative_state(i, j));
// diagonal and rows/columns of inactive vehicles are +infinity. Requires a
// converged grid matching the policy's speed and turn bound.
std::vector<double> threat_assessment(const std::vector<VehicleState>& states,
                                      const std::vector<bool>& active,
                                      const ValueGrid& grid,
                                      const PolicyConfig& cfg);

// Goal controller unless the closest threat's value is at or below the safety
// threshold, in which case the optimal avoidance turn against that single
// vehicle (lowest index on ties).
ControlDecision least_restrictive_control(std::size_t i,
                                          const std::vector<VehicleState>& states,
                                          const std::vector<bool>& active,
                                          const std::vector<Goal>& goals,
                                          const ValueGrid& grid,
                                          const PolicyConfig& cfg);

}  // namespace safeinit

#endif
