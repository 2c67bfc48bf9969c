#include "safeinit/safety_policy.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace safeinit {

namespace {

void check_grid(const ValueGrid& grid, const PolicyConfig& cfg) {
    if (!grid.converged)
        throw std::invalid_argument("safety policy: grid is not converged");
    if (grid.params.speed != cfg.speed || grid.params.omega_bar != cfg.omega_bar)
        throw std::invalid_argument("safety policy: grid parameters do not match config");
}

}  // namespace

ControlInput goal_controller(const VehicleState& s, const Goal& goal,
                             const PolicyConfig& cfg) {
    const double bearing = std::atan2(goal[1] - s.qy, goal[0] - s.qx);
    const double error = wrap_angle(bearing - s.theta);
    return {std::clamp(cfg.goal_gain * error, -cfg.omega_bar, cfg.omega_bar)};
}

std::vector<double> threat_assessment(const std::vector<VehicleState>& states,
                                      const std::vector<bool>& active,
                                      const ValueGrid& grid,
                                      const PolicyConfig& cfg) {
    check_grid(grid, cfg);
    if (states.size() != active.size())
        throw std::invalid_argument("threat_assessment: states/active length mismatch");
    const std::size_t n = states.size();
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> matrix(n * n, inf);
    for (std::size_t i = 0; i < n; ++i) {
        if (!active[i]) continue;
        for (std::size_t j = 0; j < n; ++j) {
            if (j == i || !active[j]) continue;
            matrix[i * n + j] = value_at(grid, relative_state(states[i], states[j]));
        }
    }
    return matrix;
}

ControlDecision least_restrictive_control(std::size_t i,
                                          const std::vector<VehicleState>& states,
                                          const std::vector<bool>& active,
                                          const std::vector<Goal>& goals,
                                          const ValueGrid& grid,
                                          const PolicyConfig& cfg) {
    check_grid(grid, cfg);
    const std::size_t n = states.size();
    if (i >= n || active.size() != n || goals.size() != n)
        throw std::invalid_argument("least_restrictive_control: bad index or lengths");
    if (!active[i])
        throw std::invalid_argument("least_restrictive_control: vehicle is not active");

    double min_value = std::numeric_limits<double>::infinity();
    int worst = -1;
    for (std::size_t j = 0; j < n; ++j) {
        if (j == i || !active[j]) continue;
        const double v = value_at(grid, relative_state(states[i], states[j]));
        if (v < min_value) {  // strict: ties keep the lowest index
            min_value = v;
            worst = static_cast<int>(j);
        }
    }

    ControlDecision d;
    if (worst >= 0 && min_value <= cfg.safety_threshold) {
        const RelativeState r = relative_state(states[i], states[static_cast<std::size_t>(worst)]);
        d.omega = optimal_avoid_control(grid, r, cfg.omega_bar).omega;
        d.mode = ControlMode::Avoid;
        d.avoid_target = worst;
    } else {
        d.omega = goal_controller(states[i], goals[i], cfg).omega;
        d.mode = ControlMode::Goal;
        d.avoid_target = -1;
    }
    return d;
}

}  // namespace safeinit
