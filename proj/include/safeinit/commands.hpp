#ifndef SAFEINIT_COMMANDS_HPP
#define SAFEINIT_COMMANDS_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "safeinit/scenario.hpp"

namespace safeinit {

// Exit codes shared by every subcommand.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitNumerical = 2;

struct BrsOptions {
    double speed = 5.0;
    double omega_bar = 1.0;
    double capture_radius = 5.0;
    double extent = 20.0;
    std::size_t nxy = 81;
    std::size_t ntheta = 61;
    double tolerance = 1e-3;
    double t_max = 40.0;
    int workers = 0;  // 0 = one per hardware thread
    std::string out;
};

struct GenDataOptions {
    std::size_t n_vehicles = 4;
    std::size_t count = 5000;
    std::size_t n_fixed = 0;
    std::string brs_path;
    // When given, must agree with the grid file; the grid is authoritative.
    std::optional<double> speed;
    std::optional<double> omega_bar;
    std::optional<double> capture_radius;
    std::uint64_t seed = 0;
    int workers = 0;
    std::string out;
};

struct TrainOptions {
    std::string data_path;
    int hidden = 0;  // 0 = published width for the dataset's vehicle count
    double learning_rate = 0.01;
    int epochs = 200;
    int batch_size = 64;
    std::uint64_t seed = 0;
    std::string out;
};

struct EvalOptions {
    std::size_t n_vehicles = 4;
    std::size_t n_fixed = 0;
    std::size_t runs = 200;
    std::size_t candidates = 10;
    std::string brs_path;
    std::string model_path;
    std::optional<double> speed;
    std::optional<double> omega_bar;
    std::optional<double> capture_radius;
    std::uint64_t seed = 0;
    int workers = 0;
    std::string out;
};

struct SimulateOptions {
    std::size_t n_vehicles = 4;
    std::string brs_path;
    std::string scenario_path;  // overrides the seeded circle scenario
    std::optional<std::uint64_t> seed;
    double dt = 0.1;
    double t_max = 60.0;
    bool frozen_vehicles_dangerous = false;
    std::string out;
    std::string svg_out;  // empty = no SVG
};

struct PlotOptions {
    std::string csv_path;
    double capture_radius = 5.0;
    std::vector<Goal> goals;
    std::string out;
};

// Each command writes its artifact(s) plus a sibling manifest and returns an
// exit code. Usage-level mistakes surface as std::invalid_argument and
// numerical failures as NumericalError; the CLI maps both to exit codes.
int cmd_brs(const BrsOptions& opts);
int cmd_gen_data(const GenDataOptions& opts);
int cmd_train(const TrainOptions& opts);
int cmd_eval(const EvalOptions& opts);
int cmd_simulate(const SimulateOptions& opts);
int cmd_plot(const PlotOptions& opts);

}  // namespace safeinit

#endif
