#include "safeinit/grid.hpp"

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <string>

#include "safeinit/manifest.hpp"

namespace safeinit {

static_assert(std::endian::native == std::endian::little,
              "grid serialization assumes a little-endian host");

double GridSpec::cell_diagonal() const {
    const double dx = cell_size(0);
    const double dy = cell_size(1);
    const double dt = cell_size(2);
    return std::sqrt(dx * dx + dy * dy + dt * dt);
}

void GridSpec::validate() const {
    for (int a = 0; a < 3; ++a) {
        if (dims[a] < 3) throw std::invalid_argument("GridSpec: need at least 3 nodes per axis");
        if (!(mins[a] < maxs[a])) throw std::invalid_argument("GridSpec: min must be below max");
        if (!std::isfinite(mins[a]) || !std::isfinite(maxs[a]))
            throw std::invalid_argument("GridSpec: non-finite extent");
    }
    if (periodic[0] || periodic[1])
        throw std::invalid_argument("GridSpec: planar axes must be non-periodic");
    if (!periodic[2])
        throw std::invalid_argument("GridSpec: heading axis must be periodic");
    if (std::abs(mins[2] + kPi) > 1e-12 || std::abs(maxs[2] - kPi) > 1e-12)
        throw std::invalid_argument("GridSpec: heading axis must span [-pi, pi)");
}

GridSpec GridSpec::default_relative(double extent, std::size_t nxy, std::size_t ntheta) {
    GridSpec s;
    s.mins = {-extent, -extent, -kPi};
    s.maxs = {extent, extent, kPi};
    s.dims = {nxy, nxy, ntheta};
    s.periodic = {false, false, true};
    s.validate();
    return s;
}

ValueGrid signed_distance_init(const GridSpec& spec, double capture_radius) {
    spec.validate();
    if (!(capture_radius > 0.0))
        throw std::invalid_argument("signed_distance_init: capture radius must be positive");
    const double half_extent =
        std::min(std::min(-spec.mins[0], spec.maxs[0]), std::min(-spec.mins[1], spec.maxs[1]));
    if (capture_radius > half_extent)
        throw std::invalid_argument("signed_distance_init: danger disk exceeds grid extent");

    ValueGrid g;
    g.spec = spec;
    g.values.resize(spec.node_count());
    g.params.capture_radius = capture_radius;
    const std::size_t nx = spec.dims[0], ny = spec.dims[1], nt = spec.dims[2];
    for (std::size_t iy = 0; iy < ny; ++iy) {
        const double y = spec.node_coord(1, iy);
        for (std::size_t ix = 0; ix < nx; ++ix) {
            const double x = spec.node_coord(0, ix);
            const double d = std::sqrt(x * x + y * y) - capture_radius;
            for (std::size_t it = 0; it < nt; ++it) {
                g.values[(it * ny + iy) * nx + ix] = d;
            }
        }
    }
    return g;
}

namespace {

struct CellLookup {
    std::size_t i0[3], i1[3];
    double f[3];      // fractional position inside the cell, in [0, 1]
    bool inside = true;
};

CellLookup locate(const GridSpec& spec, const RelativeState& r) {
    CellLookup c;
    const double q[3] = {r.xr, r.yr, wrap_angle(r.thetar)};
    for (int a = 0; a < 2; ++a) {
        if (q[a] < spec.mins[a] || q[a] > spec.maxs[a]) {
            c.inside = false;
            return c;
        }
        const double fx = (q[a] - spec.mins[a]) / spec.cell_size(a);
        std::size_t i0 = static_cast<std::size_t>(fx);
        if (i0 >= spec.dims[a] - 1) i0 = spec.dims[a] - 2;
        c.i0[a] = i0;
        c.i1[a] = i0 + 1;
        c.f[a] = fx - static_cast<double>(i0);
    }
    const double ft = (q[2] - spec.mins[2]) / spec.cell_size(2);
    std::size_t t0 = static_cast<std::size_t>(ft);
    if (t0 >= spec.dims[2]) t0 = spec.dims[2] - 1;  // guards q == pi rounding
    c.i0[2] = t0;
    c.i1[2] = (t0 + 1) % spec.dims[2];
    c.f[2] = ft - static_cast<double>(t0);
    return c;
}

template <typename NodeFn>
double trilinear(const CellLookup& c, NodeFn&& node) {
    double acc = 0.0;
    for (int dt = 0; dt < 2; ++dt) {
        const std::size_t it = dt ? c.i1[2] : c.i0[2];
        const double wt = dt ? c.f[2] : 1.0 - c.f[2];
        for (int dy = 0; dy < 2; ++dy) {
            const std::size_t iy = dy ? c.i1[1] : c.i0[1];
            const double wy = dy ? c.f[1] : 1.0 - c.f[1];
            for (int dx = 0; dx < 2; ++dx) {
                const std::size_t ix = dx ? c.i1[0] : c.i0[0];
                const double wx = dx ? c.f[0] : 1.0 - c.f[0];
                acc += wt * wy * wx * node(ix, iy, it);
            }
        }
    }
    return acc;
}

}  // namespace

double value_at(const ValueGrid& grid, const RelativeState& r) {
    const CellLookup c = locate(grid.spec, r);
    if (!c.inside) return std::numeric_limits<double>::infinity();
    return trilinear(c, [&](std::size_t ix, std::size_t iy, std::size_t it) {
        return grid.at(ix, iy, it);
    });
}

Vec3 gradient_at(const ValueGrid& grid, const RelativeState& r) {
    const CellLookup c = locate(grid.spec, r);
    if (!c.inside) return {0.0, 0.0, 0.0};
    const GridSpec& spec = grid.spec;
    const std::size_t nx = spec.dims[0], ny = spec.dims[1], nt = spec.dims[2];
    const double dx = spec.cell_size(0), dy = spec.cell_size(1), dth = spec.cell_size(2);

    const auto node_grad_x = [&](std::size_t ix, std::size_t iy, std::size_t it) {
        if (ix == 0) return (grid.at(1, iy, it) - grid.at(0, iy, it)) / dx;
        if (ix == nx - 1) return (grid.at(nx - 1, iy, it) - grid.at(nx - 2, iy, it)) / dx;
        return (grid.at(ix + 1, iy, it) - grid.at(ix - 1, iy, it)) / (2.0 * dx);
    };
    const auto node_grad_y = [&](std::size_t ix, std::size_t iy, std::size_t it) {
        if (iy == 0) return (grid.at(ix, 1, it) - grid.at(ix, 0, it)) / dy;
        if (iy == ny - 1) return (grid.at(ix, ny - 1, it) - grid.at(ix, ny - 2, it)) / dy;
        return (grid.at(ix, iy + 1, it) - grid.at(ix, iy - 1, it)) / (2.0 * dy);
    };
    const auto node_grad_t = [&](std::size_t ix, std::size_t iy, std::size_t it) {
        const std::size_t tp = (it + 1) % nt;
        const std::size_t tm = (it + nt - 1) % nt;
        return (grid.at(ix, iy, tp) - grid.at(ix, iy, tm)) / (2.0 * dth);
    };
    return {trilinear(c, node_grad_x), trilinear(c, node_grad_y), trilinear(c, node_grad_t)};
}

namespace {

constexpr char kMagic[4] = {'B', 'R', 'S', 'G'};
constexpr std::uint32_t kVersion = 1;

template <typename T>
void put(std::string& out, const T& v) {
    const char* p = reinterpret_cast<const char*>(&v);
    out.append(p, sizeof(T));
}

template <typename T>
T take(std::string_view bytes, std::size_t& off) {
    if (off + sizeof(T) > bytes.size())
        throw std::invalid_argument("grid file truncated");
    T v;
    std::memcpy(&v, bytes.data() + off, sizeof(T));
    off += sizeof(T);
    return v;
}

}  // namespace

std::string serialize_grid(const ValueGrid& grid) {
    grid.spec.validate();
    if (grid.values.size() != grid.spec.node_count())
        throw std::invalid_argument("serialize_grid: value count does not match spec");
    std::string out;
    out.reserve(4 + 4 + 3 * 25 + 3 * 8 + grid.values.size() * 8);
    out.append(kMagic, 4);
    put(out, kVersion);
    for (int a = 0; a < 3; ++a) {
        put(out, static_cast<std::uint64_t>(grid.spec.dims[a]));
        put(out, grid.spec.mins[a]);
        put(out, grid.spec.maxs[a]);
        put(out, static_cast<std::uint8_t>(grid.spec.periodic[a] ? 1 : 0));
    }
    put(out, grid.params.speed);
    put(out, grid.params.omega_bar);
    put(out, grid.params.capture_radius);
    out.append(reinterpret_cast<const char*>(grid.values.data()), grid.values.size() * 8);
    return out;
}

ValueGrid deserialize_grid(std::string_view bytes) {
    std::size_t off = 0;
    if (bytes.size() < 8 || std::memcmp(bytes.data(), kMagic, 4) != 0)
        throw std::invalid_argument("grid file: bad magic");
    off = 4;
    const auto version = take<std::uint32_t>(bytes, off);
    if (version != kVersion)
        throw std::invalid_argument("grid file: unsupported version " + std::to_string(version));
    ValueGrid g;
    for (int a = 0; a < 3; ++a) {
        g.spec.dims[a] = static_cast<std::size_t>(take<std::uint64_t>(bytes, off));
        g.spec.mins[a] = take<double>(bytes, off);
        g.spec.maxs[a] = take<double>(bytes, off);
        g.spec.periodic[a] = take<std::uint8_t>(bytes, off) != 0;
    }
    g.params.speed = take<double>(bytes, off);
    g.params.omega_bar = take<double>(bytes, off);
    g.params.capture_radius = take<double>(bytes, off);
    g.spec.validate();
    const std::size_t n = g.spec.node_count();
    if (bytes.size() - off != n * 8)
        throw std::invalid_argument("grid file: value payload size mismatch");
    g.values.resize(n);
    std::memcpy(g.values.data(), bytes.data() + off, n * 8);
    g.converged = true;  // refined from the sibling manifest when one exists
    g.residual = 0.0;
    return g;
}

void save_grid(const ValueGrid& grid, const std::filesystem::path& path) {
    atomic_write(path, serialize_grid(grid));
}

ValueGrid load_grid(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::invalid_argument("cannot open grid file: " + path.string());
    std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    ValueGrid g = deserialize_grid(bytes);
    if (const auto manifest = read_manifest_for(path)) {
        verify_manifest_hashes(*manifest, path.parent_path());
        const auto& extra = manifest->value("extra", nlohmann::json::object());
        if (extra.contains("converged")) g.converged = extra["converged"].get<bool>();
        if (extra.contains("residual")) g.residual = extra["residual"].get<double>();
    }
    return g;
}

}  // namespace safeinit
