#include "safeinit/dynamics.hpp"

#include <cmath>
#include <stdexcept>

namespace safeinit {

double wrap_angle(double a) {
    if (!std::isfinite(a)) {
        throw std::invalid_argument("wrap_angle: non-finite angle");
    }
    double w = std::remainder(a, 2.0 * kPi);  // lands in [-pi, pi]
    if (w >= kPi) w -= 2.0 * kPi;
    return w;
}

Vec3 dubins_derivative(const VehicleState& s, const ControlInput& u, double speed) {
    return {speed * std::cos(s.theta), speed * std::sin(s.theta), u.omega};
}

RelativeState relative_state(const VehicleState& si, const VehicleState& sj) {
    const double dx = sj.qx - si.qx;
    const double dy = sj.qy - si.qy;
    const double c = std::cos(si.theta);
    const double s = std::sin(si.theta);
    RelativeState r;
    r.xr = c * dx + s * dy;
    r.yr = -s * dx + c * dy;
    r.thetar = wrap_angle(sj.theta - si.theta);
    return r;
}

Vec3 relative_derivative(const RelativeState& r, double omega_i, double omega_j,
                         double speed) {
    return {-speed + speed * std::cos(r.thetar) + omega_i * r.yr,
            speed * std::sin(r.thetar) - omega_i * r.xr,
            omega_j - omega_i};
}

VehicleState step_rk4(const VehicleState& s, const ControlInput& u, double speed,
                      double dt) {
    const auto deriv = [&](const VehicleState& x) {
        return dubins_derivative(x, u, speed);
    };
    const auto advance = [](const VehicleState& x, const Vec3& k, double h) {
        return VehicleState{x.qx + h * k[0], x.qy + h * k[1], x.theta + h * k[2]};
    };
    const Vec3 k1 = deriv(s);
    const Vec3 k2 = deriv(advance(s, k1, dt / 2.0));
    const Vec3 k3 = deriv(advance(s, k2, dt / 2.0));
    const Vec3 k4 = deriv(advance(s, k3, dt));
    VehicleState out;
    out.qx = s.qx + dt / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]);
    out.qy = s.qy + dt / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]);
    out.theta = wrap_angle(s.theta + dt / 6.0 * (k1[2] + 2.0 * k2[2] + 2.0 * k3[2] + k4[2]));
    return out;
}

}  // namespace safeinit
