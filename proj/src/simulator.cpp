#include "safeinit/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace safeinit {

void SimConfig::validate() const {
    if (!(speed > 0.0) || !(omega_bar > 0.0) || !(capture_radius > 0.0))
        throw std::invalid_argument("SimConfig: speed, omega_bar, capture_radius must be positive");
    if (!(dt > 0.0) || !(t_max > 0.0))
        throw std::invalid_argument("SimConfig: dt and t_max must be positive");
    if (policy.speed != speed || policy.omega_bar != omega_bar)
        throw std::invalid_argument("SimConfig: policy speed/omega_bar must match");
    if (!(policy.goal_radius > 0.0))
        throw std::invalid_argument("SimConfig: goal radius must be positive");
}

SimConfig SimConfig::for_grid(const ValueGrid& grid) {
    SimConfig cfg;
    cfg.speed = grid.params.speed;
    cfg.omega_bar = grid.params.omega_bar;
    cfg.capture_radius = grid.params.capture_radius;
    cfg.policy.speed = cfg.speed;
    cfg.policy.omega_bar = cfg.omega_bar;
    return cfg;
}

std::vector<std::pair<int, int>> count_step_violations(
    const std::vector<VehicleState>& states, const std::vector<bool>& active,
    double capture_radius) {
    if (states.size() != active.size())
        throw std::invalid_argument("count_step_violations: states/active length mismatch");
    std::vector<std::pair<int, int>> pairs;
    const std::size_t n = states.size();
    for (std::size_t i = 0; i + 1 < n; ++i) {
        if (!active[i]) continue;
        for (std::size_t j = i + 1; j < n; ++j) {
            if (!active[j]) continue;
            const double dx = states[j].qx - states[i].qx;
            const double dy = states[j].qy - states[i].qy;
            if (std::sqrt(dx * dx + dy * dy) <= capture_radius) {
                pairs.emplace_back(static_cast<int>(i), static_cast<int>(j));
            }
        }
    }
    return pairs;
}

namespace {

bool at_goal(const VehicleState& s, const Goal& g, double radius) {
    const double dx = g[0] - s.qx;
    const double dy = g[1] - s.qy;
    return std::sqrt(dx * dx + dy * dy) <= radius;
}

void check_finite(const std::vector<VehicleState>& states, double t) {
    for (std::size_t i = 0; i < states.size(); ++i) {
        const VehicleState& s = states[i];
        if (!std::isfinite(s.qx) || !std::isfinite(s.qy) || !std::isfinite(s.theta)) {
            std::ostringstream msg;
            msg << "run_simulation: vehicle " << i << " went non-finite at t=" << t << " (qx="
                << s.qx << ", qy=" << s.qy << ", theta=" << s.theta << ")";
            throw NumericalError(msg.str());
        }
    }
}

}  // namespace

SimResult run_simulation(const Scenario& scenario, const ValueGrid& grid,
                         const SimConfig& cfg) {
    scenario.validate();
    cfg.validate();
    if (grid.params.speed != cfg.speed || grid.params.omega_bar != cfg.omega_bar ||
        grid.params.capture_radius != cfg.capture_radius)
        throw std::invalid_argument("run_simulation: grid parameters do not match config");
    if (!grid.converged)
        throw std::invalid_argument("run_simulation: grid is not converged");

    const std::size_t n = scenario.size();
    std::vector<VehicleState> states = scenario.initial_states;
    std::vector<bool> active(n, true);
    check_finite(states, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        if (at_goal(states[i], scenario.goals[i], cfg.policy.goal_radius)) active[i] = false;
    }

    SimResult result;
    result.trajectories.resize(n);

    double t = 0.0;
    std::size_t step = 0;
    while (true) {
        const bool any_active = std::any_of(active.begin(), active.end(), [](bool a) { return a; });
        if (!any_active) break;
        if (t >= cfg.t_max - 1e-12) {
            result.timed_out = true;
            break;
        }

        // All decisions come from the same snapshot. In the frozen-dangerous
        // variant, arrived vehicles remain visible as threats.
        const std::vector<VehicleState> snapshot = states;
        std::vector<bool> considered = active;
        if (cfg.frozen_vehicles_dangerous) considered.assign(n, true);

        std::vector<ControlDecision> decisions(n);
        for (std::size_t i = 0; i < n; ++i) {
            if (!active[i]) continue;
            decisions[i] = least_restrictive_control(i, snapshot, considered, scenario.goals,
                                                     grid, cfg.policy);
        }

        for (std::size_t i = 0; i < n; ++i) {
            TrajectoryPoint p;
            p.t = t;
            p.state = snapshot[i];
            p.active = active[i];
            if (active[i]) {
                p.mode = decisions[i].mode;
                p.avoid_target = decisions[i].avoid_target;
            }
            result.trajectories[i].push_back(p);
        }

        for (std::size_t i = 0; i < n; ++i) {
            if (!active[i]) continue;
            states[i] = step_rk4(snapshot[i], ControlInput{decisions[i].omega}, cfg.speed, cfg.dt);
        }
        ++step;
        t = static_cast<double>(step) * cfg.dt;
        check_finite(states, t);

        for (std::size_t i = 0; i < n; ++i) {
            if (active[i] && at_goal(states[i], scenario.goals[i], cfg.policy.goal_radius))
                active[i] = false;
        }

        if (cfg.frozen_vehicles_dangerous) {
            for (std::size_t i = 0; i + 1 < n; ++i) {
                for (std::size_t j = i + 1; j < n; ++j) {
                    if (!active[i] && !active[j]) continue;
                    const double dx = states[j].qx - states[i].qx;
                    const double dy = states[j].qy - states[i].qy;
                    if (std::sqrt(dx * dx + dy * dy) <= cfg.capture_radius)
                        result.violation_log.push_back({t, static_cast<int>(i), static_cast<int>(j)});
                }
            }
        } else {
            for (const auto& [i, j] : count_step_violations(states, active, cfg.capture_radius)) {
                result.violation_log.push_back({t, i, j});
            }
        }
    }

    for (std::size_t i = 0; i < n; ++i) {
        TrajectoryPoint p;
        p.t = t;
        p.state = states[i];
        p.active = active[i];
        result.trajectories[i].push_back(p);
    }

    result.end_time = t;
    result.violation_count = static_cast<int>(result.violation_log.size());
    result.reached_all = std::none_of(active.begin(), active.end(), [](bool a) { return a; });
    result.success = result.reached_all && result.violation_count == 0 && !result.timed_out;
    return result;
}

}  // namespace safeinit
