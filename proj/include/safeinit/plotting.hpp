#ifndef SAFEINIT_PLOTTING_HPP
#define SAFEINIT_PLOTTING_HPP

#include <string>
#include <vector>

#include "safeinit/simulator.hpp"

namespace safeinit {

// CSV rows ordered by (t, vehicle) under the header
// t,vehicle,qx,qy,theta,mode,active; mode is goal/avoid while active and
// arrived after deactivation. Numbers carry full precision so a parse and
// re-write reproduces the bytes.
std::string trajectory_csv(const SimResult& result);

// Per-vehicle series reconstructed from a trajectory CSV.
std::vector<std::vector<TrajectoryPoint>> parse_trajectory_csv(const std::string& text);

// Deterministic standalone SVG: one polyline per vehicle (avoidance stretches
// dashed), start and goal markers, the danger disk around each final position,
// and one marker per recomputed violation (both-active pairs within the
// capture radius, skipping the initial row). Same input bytes give the same
// output bytes. goals may be empty when unknown.
std::string render_trajectory_svg(const std::vector<std::vector<TrajectoryPoint>>& trajectories,
                                  double capture_radius, const std::vector<Goal>& goals);

}  // namespace safeinit

#endif
