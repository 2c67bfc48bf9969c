#include "safeinit/plotting.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>

namespace safeinit {

namespace {

const char* mode_name(const TrajectoryPoint& p) {
    if (!p.active) return "arrived";
    return p.mode == ControlMode::Avoid ? "avoid" : "goal";
}

std::string fmt(const char* format, double a) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), format, a);
    return buf;
}

}  // namespace

std::string trajectory_csv(const SimResult& result) {
    std::string out = "t,vehicle,qx,qy,theta,mode,active\n";
    if (result.trajectories.empty()) return out;
    const std::size_t steps = result.trajectories.front().size();
    for (const auto& series : result.trajectories) {
        if (series.size() != steps)
            throw std::invalid_argument("trajectory_csv: ragged trajectories");
    }
    char buf[256];
    for (std::size_t k = 0; k < steps; ++k) {
        for (std::size_t i = 0; i < result.trajectories.size(); ++i) {
            const TrajectoryPoint& p = result.trajectories[i][k];
            std::snprintf(buf, sizeof(buf), "%.17g,%zu,%.17g,%.17g,%.17g,%s,%d\n", p.t, i,
                          p.state.qx, p.state.qy, p.state.theta, mode_name(p), p.active ? 1 : 0);
            out += buf;
        }
    }
    return out;
}

std::vector<std::vector<TrajectoryPoint>> parse_trajectory_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || line != "t,vehicle,qx,qy,theta,mode,active")
        throw std::invalid_argument("trajectory CSV: bad header");
    std::vector<std::vector<TrajectoryPoint>> series;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream row(line);
        std::string field;
        std::vector<std::string> fields;
        while (std::getline(row, field, ',')) fields.push_back(field);
        if (fields.size() != 7)
            throw std::invalid_argument("trajectory CSV: expected 7 fields, got line: " + line);
        TrajectoryPoint p;
        p.t = std::stod(fields[0]);
        const std::size_t vehicle = std::stoul(fields[1]);
        p.state.qx = std::stod(fields[2]);
        p.state.qy = std::stod(fields[3]);
        p.state.theta = std::stod(fields[4]);
        if (fields[5] == "goal") {
            p.mode = ControlMode::Goal;
        } else if (fields[5] == "avoid") {
            p.mode = ControlMode::Avoid;
        } else if (fields[5] == "arrived") {
            p.mode = ControlMode::Goal;
        } else {
            throw std::invalid_argument("trajectory CSV: unknown mode " + fields[5]);
        }
        p.active = fields[6] == "1";
        if (vehicle >= series.size()) series.resize(vehicle + 1);
        series[vehicle].push_back(p);
    }
    return series;
}

namespace {

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e",
                          "#8c564b", "#e377c2", "#17becf", "#bcbd22", "#7f7f7f"};
constexpr std::size_t kPaletteSize = sizeof(kPalette) / sizeof(kPalette[0]);

struct Mapper {
    double min_x, max_y, scale, pad;
    double x(double wx) const { return (wx - min_x) * scale + pad; }
    double y(double wy) const { return (max_y - wy) * scale + pad; }
};

}  // namespace

std::string render_trajectory_svg(const std::vector<std::vector<TrajectoryPoint>>& trajectories,
                                  double capture_radius, const std::vector<Goal>& goals) {
    if (trajectories.empty())
        throw std::invalid_argument("render_trajectory_svg: no trajectories");

    double min_x = 1e300, max_x = -1e300, min_y = 1e300, max_y = -1e300;
    const auto grow = [&](double x, double y) {
        min_x = std::min(min_x, x);
        max_x = std::max(max_x, x);
        min_y = std::min(min_y, y);
        max_y = std::max(max_y, y);
    };
    for (const auto& series : trajectories) {
        for (const TrajectoryPoint& p : series) grow(p.state.qx, p.state.qy);
    }
    for (const Goal& g : goals) grow(g[0], g[1]);
    min_x -= capture_radius;
    max_x += capture_radius;
    min_y -= capture_radius;
    max_y += capture_radius;

    const double span = std::max({max_x - min_x, max_y - min_y, 1.0});
    Mapper m{min_x, max_y, 640.0 / span, 20.0};
    const double width = (max_x - min_x) * m.scale + 2.0 * m.pad;
    const double height = (max_y - min_y) * m.scale + 2.0 * m.pad;

    std::string svg;
    svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + fmt("%.0f", width) +
           "\" height=\"" + fmt("%.0f", height) + "\" viewBox=\"0 0 " + fmt("%.0f", width) +
           " " + fmt("%.0f", height) + "\">\n";
    svg += "<rect width=\"100%\" height=\"100%\" fill=\"#ffffff\"/>\n";

    for (std::size_t i = 0; i < trajectories.size(); ++i) {
        const auto& series = trajectories[i];
        if (series.empty()) continue;
        const char* color = kPalette[i % kPaletteSize];

        // Consecutive same-style stretches become one polyline; avoidance is dashed.
        std::size_t k = 0;
        while (k + 1 < series.size()) {
            const bool dashed = series[k].active && series[k].mode == ControlMode::Avoid;
            std::size_t end = k + 1;
            while (end + 1 < series.size() &&
                   (series[end].active && series[end].mode == ControlMode::Avoid) == dashed) {
                ++end;
            }
            svg += "<polyline fill=\"none\" stroke=\"";
            svg += color;
            svg += "\" stroke-width=\"2\"";
            if (dashed) svg += " stroke-dasharray=\"6 4\"";
            svg += " points=\"";
            for (std::size_t j = k; j <= end; ++j) {
                if (j > k) svg += ' ';
                svg += fmt("%.2f", m.x(series[j].state.qx)) + "," +
                       fmt("%.2f", m.y(series[j].state.qy));
            }
            svg += "\"/>\n";
            k = end;
        }

        // Start marker: triangle pointing along the initial heading.
        const TrajectoryPoint& s0 = series.front();
        const double cx = m.x(s0.state.qx), cy = m.y(s0.state.qy);
        const double hx = std::cos(s0.state.theta), hy = std::sin(s0.state.theta);
        const double r = 7.0;
        svg += "<polygon fill=\"" + std::string(color) + "\" points=\"" +
               fmt("%.2f", cx + r * hx) + "," + fmt("%.2f", cy - r * hy) + " " +
               fmt("%.2f", cx - 0.5 * r * hx + 0.6 * r * hy) + "," +
               fmt("%.2f", cy + 0.5 * r * hy + 0.6 * r * hx) + " " +
               fmt("%.2f", cx - 0.5 * r * hx - 0.6 * r * hy) + "," +
               fmt("%.2f", cy + 0.5 * r * hy - 0.6 * r * hx) + "\"/>\n";

        // Danger disk around the final position.
        const TrajectoryPoint& sN = series.back();
        svg += "<circle cx=\"" + fmt("%.2f", m.x(sN.state.qx)) + "\" cy=\"" +
               fmt("%.2f", m.y(sN.state.qy)) + "\" r=\"" + fmt("%.2f", capture_radius * m.scale) +
               "\" fill=\"none\" stroke=\"" + color + "\" stroke-width=\"1\" " +
               "stroke-dasharray=\"3 3\" opacity=\"0.6\"/>\n";
    }

    for (std::size_t i = 0; i < goals.size(); ++i) {
        const char* color = kPalette[i % kPaletteSize];
        const double gx = m.x(goals[i][0]), gy = m.y(goals[i][1]);
        svg += "<path stroke=\"" + std::string(color) + "\" stroke-width=\"2\" d=\"M" +
               fmt("%.2f", gx - 5.0) + " " + fmt("%.2f", gy) + " H" + fmt("%.2f", gx + 5.0) +
               " M" + fmt("%.2f", gx) + " " + fmt("%.2f", gy - 5.0) + " V" +
               fmt("%.2f", gy + 5.0) + "\"/>\n";
        svg += "<circle cx=\"" + fmt("%.2f", gx) + "\" cy=\"" + fmt("%.2f", gy) +
               "\" r=\"5\" fill=\"none\" stroke=\"" + color + "\" stroke-width=\"1.5\"/>\n";
    }

    // Violation markers, recomputed the way the simulator records them.
    const std::size_t steps = trajectories.front().size();
    for (std::size_t k = 1; k < steps; ++k) {
        for (std::size_t i = 0; i + 1 < trajectories.size(); ++i) {
            if (k >= trajectories[i].size() || !trajectories[i][k].active) continue;
            for (std::size_t j = i + 1; j < trajectories.size(); ++j) {
                if (k >= trajectories[j].size() || !trajectories[j][k].active) continue;
                const double dx = trajectories[j][k].state.qx - trajectories[i][k].state.qx;
                const double dy = trajectories[j][k].state.qy - trajectories[i][k].state.qy;
                if (std::sqrt(dx * dx + dy * dy) <= capture_radius) {
                    const double vx = m.x(trajectories[i][k].state.qx + dx / 2.0);
                    const double vy = m.y(trajectories[i][k].state.qy + dy / 2.0);
                    svg += "<path class=\"violation\" stroke=\"#ff0000\" stroke-width=\"2.5\" d=\"M" +
                           fmt("%.2f", vx - 6.0) + " " + fmt("%.2f", vy - 6.0) + " L" +
                           fmt("%.2f", vx + 6.0) + " " + fmt("%.2f", vy + 6.0) + " M" +
                           fmt("%.2f", vx - 6.0) + " " + fmt("%.2f", vy + 6.0) + " L" +
                           fmt("%.2f", vx + 6.0) + " " + fmt("%.2f", vy - 6.0) + "\"/>\n";
                }
            }
        }
    }

    svg += "</svg>\n";
    return svg;
}

}  // namespace safeinit
