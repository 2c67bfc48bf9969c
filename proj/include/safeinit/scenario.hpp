#ifndef SAFEINIT_SCENARIO_HPP
#define SAFEINIT_SCENARIO_HPP

#include <array>
#include <cstddef>
#include <vector>

#include "safeinit/dynamics.hpp"
#include "safeinit/rng.hpp"

namespace safeinit {

using Goal = std::array<double, 2>;

// A multi-vehicle episode: initial states, per-vehicle goals, and which
// vehicles' initial states may not be re-sampled.
struct Scenario {
    std::vector<VehicleState> initial_states;
    std::vector<Goal> goals;
    std::vector<bool> fixed_mask;

    std::size_t size() const { return initial_states.size(); }
    void validate() const;  // throws on mismatched lengths or out-of-range headings
};

// Per-component half-widths of the uniform box candidates are drawn from,
// centered on the base states.
struct CandidateBox {
    double eps_x = 3.0;
    double eps_y = 3.0;
    double eps_theta = kPi / 5.0;
};

using FeatureVector = std::vector<double>;

// Circle radius the N start slots sit on.
double circle_radius(std::size_t n);

// N slots evenly spaced on the circle, headings facing the center, each slot
// perturbed uniformly inside the box. Goals are the antipodal circle points,
// assigned to vehicles by a uniformly random permutation. The RNG is consumed
// in a fixed order: permutation first, then per-vehicle (qx, qy, theta) draws.
// Requires 3 <= n <= 10.
Scenario make_base_scenario(std::size_t n, Rng& rng, const CandidateBox& box);

// Independent uniform redraw of every non-fixed vehicle inside the box around
// its base state (headings re-wrapped); fixed vehicles, goals, and the mask
// are copied unchanged. Fixed vehicles consume no draws.
Scenario sample_candidate(const Scenario& base, const CandidateBox& box, Rng& rng);

// Permutation ordering positions counter-clockwise by angle about their
// centroid, measured from the +y axis; ties break by distance from the
// centroid, then by index.
std::vector<std::size_t> ccw_order(const std::vector<Goal>& positions);

// h = ordered states (qx, qy, theta) then goals (gx, gy), both reordered by
// ccw_order of the initial positions. Exactly invariant under joint
// relabeling of vehicles. Length 5N.
FeatureVector feature_map(const Scenario& sc);

}  // namespace safeinit

#endif
