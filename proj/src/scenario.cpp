#include "safeinit/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace safeinit {

void Scenario::validate() const {
    const std::size_t n = initial_states.size();
    if (n == 0) throw std::invalid_argument("Scenario: needs at least one vehicle");
    if (goals.size() != n || fixed_mask.size() != n)
        throw std::invalid_argument("Scenario: states, goals, and mask lengths differ");
    for (const auto& s : initial_states) {
        if (!std::isfinite(s.qx) || !std::isfinite(s.qy) || !std::isfinite(s.theta))
            throw std::invalid_argument("Scenario: non-finite state");
        if (s.theta < -kPi || s.theta >= kPi)
            throw std::invalid_argument("Scenario: heading outside [-pi, pi)");
    }
    for (const auto& g : goals) {
        if (!std::isfinite(g[0]) || !std::isfinite(g[1]))
            throw std::invalid_argument("Scenario: non-finite goal");
    }
}

double circle_radius(std::size_t n) {
    return 10.0 + 2.0 * (static_cast<double>(n) - 3.0);
}

Scenario make_base_scenario(std::size_t n, Rng& rng, const CandidateBox& box) {
    if (n < 3 || n > 10)
        throw std::invalid_argument("make_base_scenario: n must be in [3, 10]");
    const double radius = circle_radius(n);

    std::vector<Goal> slots(n);
    std::vector<double> slot_angles(n);
    for (std::size_t k = 0; k < n; ++k) {
        slot_angles[k] = 2.0 * kPi * static_cast<double>(k) / static_cast<double>(n);
        slots[k] = {radius * std::cos(slot_angles[k]), radius * std::sin(slot_angles[k])};
    }

    const std::vector<std::size_t> assignment = rng.permutation(n);

    Scenario sc;
    sc.initial_states.resize(n);
    sc.goals.resize(n);
    sc.fixed_mask.assign(n, false);
    for (std::size_t k = 0; k < n; ++k) {
        VehicleState s;
        s.qx = slots[k][0] + rng.uniform(-box.eps_x, box.eps_x);
        s.qy = slots[k][1] + rng.uniform(-box.eps_y, box.eps_y);
        s.theta = wrap_angle(slot_angles[k] + kPi + rng.uniform(-box.eps_theta, box.eps_theta));
        sc.initial_states[k] = s;
        sc.goals[k] = {-slots[assignment[k]][0], -slots[assignment[k]][1]};
    }
    sc.validate();
    return sc;
}

Scenario sample_candidate(const Scenario& base, const CandidateBox& box, Rng& rng) {
    base.validate();
    Scenario out = base;
    for (std::size_t k = 0; k < base.size(); ++k) {
        if (base.fixed_mask[k]) continue;
        const VehicleState& b = base.initial_states[k];
        out.initial_states[k].qx = b.qx + rng.uniform(-box.eps_x, box.eps_x);
        out.initial_states[k].qy = b.qy + rng.uniform(-box.eps_y, box.eps_y);
        out.initial_states[k].theta =
            wrap_angle(b.theta + rng.uniform(-box.eps_theta, box.eps_theta));
    }
    return out;
}

std::vector<std::size_t> ccw_order(const std::vector<Goal>& positions) {
    const std::size_t n = positions.size();
    if (n == 0) return {};
    double cx = 0.0, cy = 0.0;
    for (const auto& p : positions) {
        cx += p[0];
        cy += p[1];
    }
    cx /= static_cast<double>(n);
    cy /= static_cast<double>(n);

    struct Key {
        double angle, dist;
        std::size_t index;
    };
    std::vector<Key> keys(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double dx = positions[i][0] - cx;
        const double dy = positions[i][1] - cy;
        // CCW angle from the +y axis, in [0, 2pi).
        double a = std::atan2(dy, dx) - kPi / 2.0;
        if (a < 0.0) a += 2.0 * kPi;
        if (a >= 2.0 * kPi) a -= 2.0 * kPi;
        keys[i] = {a, std::sqrt(dx * dx + dy * dy), i};
    }
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t lhs, std::size_t rhs) {
        if (keys[lhs].angle != keys[rhs].angle) return keys[lhs].angle < keys[rhs].angle;
        if (keys[lhs].dist != keys[rhs].dist) return keys[lhs].dist < keys[rhs].dist;
        return keys[lhs].index < keys[rhs].index;
    });
    return order;
}

FeatureVector feature_map(const Scenario& sc) {
    sc.validate();
    std::vector<Goal> positions(sc.size());
    for (std::size_t i = 0; i < sc.size(); ++i) {
        positions[i] = {sc.initial_states[i].qx, sc.initial_states[i].qy};
    }
    const std::vector<std::size_t> order = ccw_order(positions);
    FeatureVector h;
    h.reserve(5 * sc.size());
    for (std::size_t i : order) {
        h.push_back(sc.initial_states[i].qx);
        h.push_back(sc.initial_states[i].qy);
        h.push_back(sc.initial_states[i].theta);
    }
    for (std::size_t i : order) {
        h.push_back(sc.goals[i][0]);
        h.push_back(sc.goals[i][1]);
    }
    return h;
}

}  // namespace safeinit
