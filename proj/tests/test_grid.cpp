#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstring>
#include <fstream>

#include "safeinit/grid.hpp"
#include "safeinit/manifest.hpp"
#include "safeinit/rng.hpp"
#include "test_support.hpp"

using namespace safeinit;

namespace {

ValueGrid filled_grid(const GridSpec& spec, double (*f)(double, double, double)) {
    ValueGrid g;
    g.spec = spec;
    g.converged = true;
    g.values.resize(spec.node_count());
    for (std::size_t it = 0; it < spec.dims[2]; ++it)
        for (std::size_t iy = 0; iy < spec.dims[1]; ++iy)
            for (std::size_t ix = 0; ix < spec.dims[0]; ++ix)
                g.at(ix, iy, it) = f(spec.node_coord(0, ix), spec.node_coord(1, iy),
                                     spec.node_coord(2, it));
    return g;
}

}  // namespace

TEST_CASE("default spec covers the square with a half-open heading axis") {
    const GridSpec spec = GridSpec::default_relative(20.0, 81, 61);
    CHECK(spec.mins[0] == -20.0);
    CHECK(spec.maxs[0] == 20.0);
    CHECK(spec.dims[0] == 81);
    CHECK(spec.dims[2] == 61);
    CHECK_FALSE(spec.periodic[0]);
    CHECK(spec.periodic[2]);
    CHECK(spec.cell_size(0) == doctest::Approx(0.5));
    CHECK(spec.cell_size(2) == doctest::Approx(2.0 * kPi / 61.0));
    CHECK(spec.node_coord(0, 40) == doctest::Approx(0.0));
    // The last heading node sits one cell short of pi, not on it.
    CHECK(spec.node_coord(2, 60) == doctest::Approx(kPi - 2.0 * kPi / 61.0));
    CHECK(spec.node_count() == 81u * 81u * 61u);
    CHECK_NOTHROW(spec.validate());
}

TEST_CASE("spec validation rejects malformed axes") {
    GridSpec ok = GridSpec::default_relative(20.0, 41, 31);
    GridSpec s = ok;
    s.dims[0] = 2;
    CHECK_THROWS_AS(s.validate(), std::invalid_argument);
    s = ok;
    s.mins[0] = s.maxs[0];
    CHECK_THROWS_AS(s.validate(), std::invalid_argument);
    s = ok;
    s.periodic[0] = true;
    CHECK_THROWS_AS(s.validate(), std::invalid_argument);
    s = ok;
    s.periodic[2] = false;
    CHECK_THROWS_AS(s.validate(), std::invalid_argument);
    s = ok;
    s.maxs[2] = 3.0;
    CHECK_THROWS_AS(s.validate(), std::invalid_argument);
}

TEST_CASE("signed distance init is radial and heading independent") {
    const GridSpec spec = GridSpec::default_relative(20.0, 41, 31);
    const ValueGrid g = signed_distance_init(spec, 5.0);
    CHECK(g.params.capture_radius == 5.0);
    for (std::size_t it : {std::size_t{0}, std::size_t{17}}) {
        CHECK(g.at(20, 20, it) == doctest::Approx(-5.0));          // origin
        CHECK(g.at(40, 20, it) == doctest::Approx(15.0));          // (20, 0)
        CHECK(g.at(25, 20, it) == doctest::Approx(0.0).epsilon(1e-12));  // (5, 0) on the rim
    }
    CHECK(g.at(0, 0, 5) == doctest::Approx(std::sqrt(800.0) - 5.0));

    CHECK_THROWS_AS(signed_distance_init(spec, 25.0), std::invalid_argument);
    CHECK_THROWS_AS(signed_distance_init(spec, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(signed_distance_init(spec, -1.0), std::invalid_argument);
}

TEST_CASE("interpolation reproduces multilinear functions between nodes") {
    const GridSpec spec = GridSpec::default_relative(20.0, 21, 15);
    const ValueGrid g =
        filled_grid(spec, [](double x, double y, double) { return 1.0 + 2.0 * x - 0.5 * y + 0.25 * x * y; });
    Rng rng(5);
    for (int i = 0; i < 500; ++i) {
        const RelativeState r{rng.uniform(-19.9, 19.9), rng.uniform(-19.9, 19.9),
                              rng.uniform(-kPi, kPi - 1e-9)};
        const double expect = 1.0 + 2.0 * r.xr - 0.5 * r.yr + 0.25 * r.xr * r.yr;
        CHECK(value_at(g, r) == doctest::Approx(expect).epsilon(1e-11));
    }
    // Exact at the nodes themselves.
    CHECK(value_at(g, {spec.node_coord(0, 3), spec.node_coord(1, 7), spec.node_coord(2, 9)}) ==
          doctest::Approx(g.at(3, 7, 9)).epsilon(1e-13));
}

TEST_CASE("heading interpolation crosses the seam") {
    const GridSpec spec = GridSpec::default_relative(20.0, 11, 12);
    const ValueGrid g = filled_grid(spec, [](double, double, double t) { return std::sin(t); });
    const double dth = spec.cell_size(2);
    const double last = spec.node_coord(2, 11);  // pi - dth
    // Query three quarters of the way from the last node to the wrapped first node.
    const double q = last + 0.75 * dth;
    const double expect = 0.25 * std::sin(last) + 0.75 * std::sin(-kPi);
    CHECK(value_at(g, {0.0, 0.0, q}) == doctest::Approx(expect).epsilon(1e-12));
    // A query exactly on the seam hits node 0.
    CHECK(value_at(g, {0.0, 0.0, -kPi}) == doctest::Approx(std::sin(-kPi)).epsilon(1e-12));
}

TEST_CASE("queries outside the planar extent are certainly safe") {
    const ValueGrid& g = testsupport::coarse_grid();
    const RelativeState out{25.0, 0.0, 0.0};
    CHECK(value_at(g, out) == std::numeric_limits<double>::infinity());
    const Vec3 grad = gradient_at(g, out);
    CHECK(grad[0] == 0.0);
    CHECK(grad[1] == 0.0);
    CHECK(grad[2] == 0.0);
}

TEST_CASE("interpolated gradient equals central differencing at one cell step") {
    const ValueGrid& g = testsupport::coarse_grid();
    const double hx = g.spec.cell_size(0), hy = g.spec.cell_size(1), ht = g.spec.cell_size(2);
    Rng rng(99);
    for (int i = 0; i < 300; ++i) {
        // Two cells of margin keeps the stencil away from one-sided boundaries.
        const RelativeState r{rng.uniform(-20 + 2 * hx, 20 - 2 * hx),
                              rng.uniform(-20 + 2 * hy, 20 - 2 * hy),
                              rng.uniform(-kPi, kPi - 1e-9)};
        const Vec3 grad = gradient_at(g, r);
        const double fdx =
            (value_at(g, {r.xr + hx, r.yr, r.thetar}) - value_at(g, {r.xr - hx, r.yr, r.thetar})) /
            (2 * hx);
        const double fdy =
            (value_at(g, {r.xr, r.yr + hy, r.thetar}) - value_at(g, {r.xr, r.yr - hy, r.thetar})) /
            (2 * hy);
        const double fdt = (value_at(g, {r.xr, r.yr, wrap_angle(r.thetar + ht)}) -
                            value_at(g, {r.xr, r.yr, wrap_angle(r.thetar - ht)})) /
                           (2 * ht);
        CHECK(grad[0] == doctest::Approx(fdx).epsilon(1e-10));
        CHECK(grad[1] == doctest::Approx(fdy).epsilon(1e-10));
        CHECK(grad[2] == doctest::Approx(fdt).epsilon(1e-10));
    }
}

TEST_CASE("grid serialization round trips bit for bit") {
    const ValueGrid& g = testsupport::coarse_grid();
    const std::string bytes = serialize_grid(g);

    CHECK(bytes.size() >= 4);
    CHECK(std::memcmp(bytes.data(), "BRSG", 4) == 0);
    std::uint32_t version = 0;
    std::memcpy(&version, bytes.data() + 4, 4);
    CHECK(version == 1);

    const ValueGrid back = deserialize_grid(bytes);
    CHECK(back.spec.dims == g.spec.dims);
    CHECK(back.spec.mins == g.spec.mins);
    CHECK(back.spec.maxs == g.spec.maxs);
    CHECK(back.spec.periodic == g.spec.periodic);
    CHECK(back.params.speed == g.params.speed);
    CHECK(back.params.omega_bar == g.params.omega_bar);
    CHECK(back.params.capture_radius == g.params.capture_radius);
    REQUIRE(back.values.size() == g.values.size());
    CHECK(std::memcmp(back.values.data(), g.values.data(),
                      g.values.size() * sizeof(double)) == 0);
    CHECK(serialize_grid(back) == bytes);
}

TEST_CASE("grid deserialization rejects corrupt payloads") {
    const std::string bytes = serialize_grid(testsupport::coarse_grid());

    std::string bad_magic = bytes;
    bad_magic[0] = 'X';
    CHECK_THROWS(deserialize_grid(bad_magic));

    std::string bad_version = bytes;
    bad_version[4] = 9;
    CHECK_THROWS(deserialize_grid(bad_version));

    CHECK_THROWS(deserialize_grid(std::string_view(bytes).substr(0, bytes.size() - 8)));
    CHECK_THROWS(deserialize_grid(bytes + "junk"));
    CHECK_THROWS(deserialize_grid("BR"));
}

TEST_CASE("grid files restore convergence metadata from the sibling manifest") {
    testsupport::TempDir dir;
    const std::filesystem::path path = dir.path / "g.grid";
    const ValueGrid& g = testsupport::coarse_grid();
    save_grid(g, path);

    // No manifest: the file alone is trusted as converged.
    ValueGrid loaded = load_grid(path);
    CHECK(loaded.converged);
    CHECK(std::memcmp(loaded.values.data(), g.values.data(),
                      g.values.size() * sizeof(double)) == 0);

    RunManifest m;
    m.command = "brs";
    m.outputs["grid"] = {{"path", "g.grid"}, {"hash", hash_file(path)}};
    m.extra = {{"converged", false}, {"residual", 0.5}};
    write_manifest(m, path);
    loaded = load_grid(path);
    CHECK_FALSE(loaded.converged);
    CHECK(loaded.residual == 0.5);

    // A manifest whose hash disagrees with the file is an error.
    std::ofstream(path, std::ios::binary | std::ios::app) << "tamper";
    CHECK_THROWS(load_grid(path));
}
