#ifndef SAFEINIT_TEST_SUPPORT_HPP
#define SAFEINIT_TEST_SUPPORT_HPP

#include <atomic>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "safeinit/grid.hpp"
#include "safeinit/reachability.hpp"

namespace testsupport {

// Converged 41x41x31 value function for (v=5, omega_bar=1, Rc=5); solved once
// per test binary (about 0.1 s) and shared by reference.
inline const safeinit::ValueGrid& coarse_grid() {
    static const safeinit::ValueGrid grid = [] {
        const safeinit::GridSpec spec = safeinit::GridSpec::default_relative(20.0, 41, 31);
        return safeinit::solve_brs(safeinit::signed_distance_init(spec, 5.0), 5.0, 1.0,
                                   1e-3, 40.0, 1);
    }();
    return grid;
}

// Fresh directory under the system temp root, removed on destruction.
struct TempDir {
    std::filesystem::path path;

    TempDir() {
        static std::atomic<unsigned> counter{0};
        const auto base = std::filesystem::temp_directory_path();
        path = base / ("safeinit_test_" + std::to_string(::getpid()) + "_" +
                       std::to_string(counter++));
        std::filesystem::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;
};

inline std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

}  // namespace testsupport

#endif
