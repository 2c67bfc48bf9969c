#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include "safeinit/manifest.hpp"
#include "safeinit/plotting.hpp"
#include "safeinit/rng.hpp"
#include "test_support.hpp"

using namespace safeinit;
namespace fs = std::filesystem;

namespace {

TrajectoryPoint point(double t, double qx, double qy, double theta, ControlMode mode,
                      bool active) {
    TrajectoryPoint p;
    p.t = t;
    p.state = {qx, qy, theta};
    p.mode = mode;
    p.active = active;
    return p;
}

std::size_t count_occurrences(const std::string& haystack, const std::string& needle) {
    std::size_t count = 0;
    for (std::size_t pos = haystack.find(needle); pos != std::string::npos;
         pos = haystack.find(needle, pos + needle.size())) {
        ++count;
    }
    return count;
}

}  // namespace

TEST_CASE("fnv1a64 matches the published test vectors") {
    CHECK(fnv1a64("") == 0xcbf29ce484222325ull);
    CHECK(fnv1a64("hello") == 0xa430d84680aabd0bull);
    CHECK(fnv1a64("a") != fnv1a64("b"));
}

TEST_CASE("file hashes carry the algorithm prefix and the content digest") {
    testsupport::TempDir dir;
    const fs::path f = dir.path / "payload.bin";
    atomic_write(f, "hello");
    CHECK(hash_file(f) == "fnv1a64:a430d84680aabd0b");

    atomic_write(f, "");
    CHECK(hash_file(f) == "fnv1a64:cbf29ce484222325");

    CHECK_THROWS_AS(hash_file(dir.path / "missing.bin"), std::invalid_argument);
}

TEST_CASE("atomic_write lands the exact bytes and leaves no temp file") {
    testsupport::TempDir dir;
    const fs::path f = dir.path / "out.txt";
    const std::string payload = std::string("line\n") + std::string(1, '\0') + "binary";
    atomic_write(f, payload);
    CHECK(testsupport::slurp(f) == payload);

    atomic_write(f, "second");
    CHECK(testsupport::slurp(f) == "second");

    std::size_t entries = 0;
    for (const auto& e : fs::directory_iterator(dir.path)) {
        ++entries;
        CHECK(e.path().extension() != ".tmp");
    }
    CHECK(entries == 1);
}

TEST_CASE("manifests round trip next to their artifact") {
    testsupport::TempDir dir;
    const fs::path artifact = dir.path / "grid.bin";
    atomic_write(artifact, "grid bytes");

    CHECK_FALSE(read_manifest_for(artifact).has_value());

    RunManifest m;
    m.command = "brs";
    m.seeded = true;
    m.seed = 1234;
    m.duration_seconds = 2.5;
    m.config["nxy"] = 81;
    m.outputs["grid"] = {{"path", artifact.filename().string()}, {"hash", hash_file(artifact)}};
    m.extra["converged"] = true;
    write_manifest(m, artifact);

    REQUIRE(fs::exists(dir.path / "grid.bin.manifest.json"));
    const auto back = read_manifest_for(artifact);
    REQUIRE(back.has_value());
    CHECK((*back)["command"] == "brs");
    CHECK((*back)["seed"] == 1234);
    CHECK((*back)["tool_version"] == std::string(kToolVersion));
    CHECK((*back)["config"]["nxy"] == 81);
    CHECK((*back)["extra"]["converged"] == true);

    // Unseeded manifests omit the seed key entirely.
    RunManifest plain;
    plain.command = "plot";
    write_manifest(plain, dir.path / "plot.svg");
    const auto plain_back = read_manifest_for(dir.path / "plot.svg");
    REQUIRE(plain_back.has_value());
    CHECK_FALSE(plain_back->contains("seed"));
}

TEST_CASE("hash verification flags a modified artifact") {
    testsupport::TempDir dir;
    const fs::path artifact = dir.path / "data.jsonl";
    atomic_write(artifact, "{\"run\":0}\n");

    RunManifest m;
    m.command = "gen-data";
    m.outputs["dataset"] = {{"path", "data.jsonl"}, {"hash", hash_file(artifact)}};
    write_manifest(m, artifact);

    const auto manifest = read_manifest_for(artifact);
    REQUIRE(manifest.has_value());
    CHECK_NOTHROW(verify_manifest_hashes(*manifest, dir.path));

    // Files the manifest mentions but that are gone are skipped, not errors.
    nlohmann::json ghost = *manifest;
    ghost["inputs"]["grid"] = {{"path", "gone.bin"}, {"hash", "fnv1a64:0000000000000000"}};
    CHECK_NOTHROW(verify_manifest_hashes(ghost, dir.path));

    std::ofstream(artifact, std::ios::app) << "tampered";
    CHECK_THROWS_AS(verify_manifest_hashes(*manifest, dir.path), std::invalid_argument);
}

TEST_CASE("trajectory csv prints dyadic values exactly") {
    SimResult r;
    r.trajectories = {
        {point(0.0, 0.0, 0.5, 0.25, ControlMode::Goal, true),
         point(0.125, 1.5, -2.0, -0.5, ControlMode::Avoid, true)},
        {point(0.0, 4.0, 8.0, 1.0, ControlMode::Goal, true),
         point(0.125, 4.5, 8.0, 0.0, ControlMode::Goal, false)},
    };
    const std::string expected =
        "t,vehicle,qx,qy,theta,mode,active\n"
        "0,0,0,0.5,0.25,goal,1\n"
        "0,1,4,8,1,goal,1\n"
        "0.125,0,1.5,-2,-0.5,avoid,1\n"
        "0.125,1,4.5,8,0,arrived,0\n";
    CHECK(trajectory_csv(r) == expected);

    const auto parsed = parse_trajectory_csv(expected);
    REQUIRE(parsed.size() == 2);
    REQUIRE(parsed[0].size() == 2);
    CHECK(parsed[0][1].mode == ControlMode::Avoid);
    CHECK(parsed[1][1].mode == ControlMode::Goal);
    CHECK_FALSE(parsed[1][1].active);

    SimResult rebuilt;
    rebuilt.trajectories = parsed;
    CHECK(trajectory_csv(rebuilt) == expected);
}

TEST_CASE("trajectory csv round trips arbitrary doubles bitwise") {
    Rng rng(6060);
    SimResult r;
    r.trajectories.resize(3);
    for (std::size_t i = 0; i < 3; ++i) {
        for (int k = 0; k < 5; ++k) {
            const ControlMode mode =
                rng.uniform01() < 0.5 ? ControlMode::Goal : ControlMode::Avoid;
            r.trajectories[i].push_back(point(0.1 * k, rng.uniform(-20.0, 20.0),
                                              rng.uniform(-20.0, 20.0),
                                              rng.uniform(-kPi, kPi), mode, k < 4));
        }
    }
    const std::string once = trajectory_csv(r);
    SimResult back;
    back.trajectories = parse_trajectory_csv(once);
    CHECK(trajectory_csv(back) == once);
}

TEST_CASE("trajectory csv rejects malformed input") {
    CHECK_THROWS_AS(parse_trajectory_csv("time,vehicle\n0,0\n"), std::invalid_argument);
    CHECK_THROWS_AS(
        parse_trajectory_csv("t,vehicle,qx,qy,theta,mode,active\n0,0,1,2,3,goal\n"),
        std::invalid_argument);
    CHECK_THROWS_AS(
        parse_trajectory_csv("t,vehicle,qx,qy,theta,mode,active\n0,0,1,2,3,cruise,1\n"),
        std::invalid_argument);

    SimResult ragged;
    ragged.trajectories = {{point(0, 0, 0, 0, ControlMode::Goal, true)},
                           {point(0, 1, 1, 0, ControlMode::Goal, true),
                            point(0.1, 2, 1, 0, ControlMode::Goal, true)}};
    CHECK_THROWS_AS(trajectory_csv(ragged), std::invalid_argument);
}

TEST_CASE("svg violation markers match a hand count of close active pairs") {
    // Step 0 has a close pair that must not be marked; step 2 has three pairs,
    // one at exactly the capture distance; step 3 loses one pair to inactivity.
    std::vector<std::vector<TrajectoryPoint>> t(3);
    t[0] = {point(0.0, 0.0, 0.0, 0.0, ControlMode::Goal, true),
            point(0.1, 0.0, 0.0, 0.0, ControlMode::Goal, true),
            point(0.2, 0.0, 0.0, 0.0, ControlMode::Avoid, true),
            point(0.3, 0.0, 0.0, 0.0, ControlMode::Goal, true)};
    t[1] = {point(0.0, 3.0, 0.0, 0.0, ControlMode::Goal, true),
            point(0.1, 30.0, 0.0, 0.0, ControlMode::Goal, true),
            point(0.2, 4.0, 0.0, 0.0, ControlMode::Goal, true),
            point(0.3, 4.0, 0.0, 0.0, ControlMode::Goal, false)};
    t[2] = {point(0.0, 60.0, 0.0, 0.0, ControlMode::Goal, true),
            point(0.1, 60.0, 0.0, 0.0, ControlMode::Goal, true),
            point(0.2, 0.0, 3.0, 0.0, ControlMode::Goal, true),
            point(0.3, 0.0, 3.0, 0.0, ControlMode::Goal, true)};

    const std::string svg = render_trajectory_svg(t, 5.0, {});
    CHECK(count_occurrences(svg, "class=\"violation\"") == 4);
    CHECK(svg.rfind("</svg>\n") == svg.size() - 7);
    CHECK(count_occurrences(svg, "stroke-dasharray=\"6 4\"") == 1);
}

TEST_CASE("svg output is a deterministic function of its inputs") {
    Rng rng(7171);
    std::vector<std::vector<TrajectoryPoint>> t(2);
    for (std::size_t i = 0; i < 2; ++i) {
        for (int k = 0; k < 12; ++k) {
            t[i].push_back(point(0.1 * k, rng.uniform(-15.0, 15.0), rng.uniform(-15.0, 15.0),
                                 rng.uniform(-kPi, kPi),
                                 k % 3 == 1 ? ControlMode::Avoid : ControlMode::Goal, true));
        }
    }
    const std::vector<Goal> goals = {{10.0, -10.0}, {-10.0, 10.0}};
    const std::string a = render_trajectory_svg(t, 5.0, goals);
    const std::string b = render_trajectory_svg(t, 5.0, goals);
    CHECK(a == b);
    CHECK(a.find("<svg xmlns=\"http://www.w3.org/2000/svg\"") == 0);

    // One start triangle and one danger disk per vehicle, one cross per goal.
    CHECK(count_occurrences(a, "<polygon") == 2);
    CHECK(count_occurrences(a, "stroke-dasharray=\"3 3\"") == 2);
    CHECK(count_occurrences(a, "<path stroke=") == 2);

    const std::string no_goals = render_trajectory_svg(t, 5.0, {});
    CHECK(count_occurrences(no_goals, "<path stroke=") == 0);

    CHECK_THROWS_AS(render_trajectory_svg({}, 5.0, {}), std::invalid_argument);
}
