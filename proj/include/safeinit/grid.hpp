#ifndef SAFEINIT_GRID_HPP
#define SAFEINIT_GRID_HPP

#include <array>
#include <cstddef>
#include <filesystem>
#include <limits>
#include <vector>

#include "safeinit/dynamics.hpp"

namespace safeinit {

// Rectangular node-centered grid over relative state space (xr, yr, thetar).
// Non-periodic axes place nodes on both endpoints; the periodic heading axis
// spans exactly [-pi, pi) with the seam between the last node and the first.
struct GridSpec {
    std::array<double, 3> mins{};
    std::array<double, 3> maxs{};
    std::array<std::size_t, 3> dims{};
    std::array<bool, 3> periodic{};

    double cell_size(int axis) const {
        const double range = maxs[axis] - mins[axis];
        return periodic[axis] ? range / static_cast<double>(dims[axis])
                              : range / static_cast<double>(dims[axis] - 1);
    }
    double node_coord(int axis, std::size_t i) const {
        return mins[axis] + static_cast<double>(i) * cell_size(axis);
    }
    std::size_t node_count() const { return dims[0] * dims[1] * dims[2]; }
    double cell_diagonal() const;

    void validate() const;  // throws std::invalid_argument on malformed specs

    static GridSpec default_relative(double extent = 20.0, std::size_t nxy = 81,
                                     std::size_t ntheta = 61);
};

// Dynamics parameters a value grid was solved for.
struct GridParams {
    double speed = 0.0;
    double omega_bar = 0.0;
    double capture_radius = 0.0;
};

struct ValueGrid {
    GridSpec spec;
    std::vector<double> values;  // index = (it * ny + iy) * nx + ix
    bool converged = false;
    double residual = std::numeric_limits<double>::infinity();
    GridParams params;

    std::size_t index(std::size_t ix, std::size_t iy, std::size_t it) const {
        return (it * spec.dims[1] + iy) * spec.dims[0] + ix;
    }
    double& at(std::size_t ix, std::size_t iy, std::size_t it) {
        return values[index(ix, iy, it)];
    }
    double at(std::size_t ix, std::size_t iy, std::size_t it) const {
        return values[index(ix, iy, it)];
    }
};

// l(x) = ||(xr, yr)|| - capture_radius, independent of heading. Errors if the
// danger disk does not fit inside the planar extent of the grid.
ValueGrid signed_distance_init(const GridSpec& spec, double capture_radius);

// Trilinear interpolation, periodic in heading. Queries outside the planar
// extent report "certainly safe": +infinity value, zero gradient.
double value_at(const ValueGrid& grid, const RelativeState& r);

// Central differences of node values (one-sided at planar boundaries),
// trilinearly interpolated at the query point.
Vec3 gradient_at(const ValueGrid& grid, const RelativeState& r);

// Binary grid file, little-endian: magic "BRSG", version u32 = 1, three axis
// records {dim u64, min f64, max f64, periodic u8}, params {speed, omega_bar,
// capture_radius} as f64, then values row-major with x fastest. Convergence
// metadata travels in the sibling run manifest, not in this file.
void save_grid(const ValueGrid& grid, const std::filesystem::path& path);
ValueGrid load_grid(const std::filesystem::path& path);

std::string serialize_grid(const ValueGrid& grid);
ValueGrid deserialize_grid(std::string_view bytes);

}  // namespace safeinit

#endif
