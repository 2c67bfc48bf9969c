#ifndef SAFEINIT_DYNAMICS_HPP
#define SAFEINIT_DYNAMICS_HPP

#include <array>

namespace safeinit {

using Vec3 = std::array<double, 3>;

inline constexpr double kPi = 3.14159265358979323846;

// Maps any finite angle to the half-open interval [-pi, pi); pi wraps to -pi.
// Throws std::invalid_argument on non-finite input.
double wrap_angle(double a);

// Planar unicycle at constant forward speed. theta follows the [-pi, pi)
// convention everywhere.
struct VehicleState {
    double qx = 0.0;     // position x [m]
    double qy = 0.0;     // position y [m]
    double theta = 0.0;  // heading [rad], in [-pi, pi)
};

struct ControlInput {
    double omega = 0.0;  // turn rate [rad/s]
};

// State of vehicle j expressed in vehicle i's body frame: x forward, y left.
struct RelativeState {
    double xr = 0.0;
    double yr = 0.0;
    double thetar = 0.0;  // heading difference, in [-pi, pi)
};

Vec3 dubins_derivative(const VehicleState& s, const ControlInput& u, double speed);

// (xr, yr) = R(-theta_i) (p_j - p_i), thetar = wrap(theta_j - theta_i).
RelativeState relative_state(const VehicleState& si, const VehicleState& sj);

// Time derivative of the body-frame relative state when both vehicles move at
// the same constant speed; omega_i is the observer's turn rate.
Vec3 relative_derivative(const RelativeState& r, double omega_i, double omega_j,
                         double speed);

// Classical RK4 step with the control held constant over the interval.
// Heading is wrapped once at the end of the step.
VehicleState step_rk4(const VehicleState& s, const ControlInput& u, double speed,
                      double dt);

}  // namespace safeinit

#endif
