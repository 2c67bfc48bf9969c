#include <cstdio>
#include <exception>
#include <stdexcept>

#include <CLI11.hpp>

#include "safeinit/commands.hpp"
#include "safeinit/reachability.hpp"

namespace {

using namespace safeinit;

void add_goal_option(CLI::App* cmd, std::vector<Goal>& goals) {
    cmd->add_option_function<std::vector<double>>(
           "--goal",
           [&goals](const std::vector<double>& flat) {
               if (flat.size() % 2 != 0)
                   throw CLI::ValidationError("--goal", "expects X Y pairs");
               for (std::size_t i = 0; i < flat.size(); i += 2)
                   goals.push_back({flat[i], flat[i + 1]});
           },
           "Goal marker position, two numbers per use: --goal X Y");
}

int dispatch(int argc, char** argv) {
    CLI::App app{"Reachability-based safe multi-vehicle navigation toolkit"};
    app.require_subcommand(1);

    BrsOptions brs;
    auto* c_brs = app.add_subcommand(
        "brs", "Solve the pairwise avoidance value function on a grid");
    c_brs->add_option("--speed", brs.speed, "Vehicle speed [m/s]")
        ->capture_default_str();
    c_brs->add_option("--omega", brs.omega_bar, "Turn rate bound [rad/s]")
        ->capture_default_str();
    c_brs->add_option("--rc", brs.capture_radius, "Capture radius [m]")
        ->capture_default_str();
    c_brs->add_option("--extent", brs.extent, "Planar half-extent of the grid [m]")
        ->capture_default_str();
    c_brs->add_option("--nxy", brs.nxy, "Nodes per planar axis")
        ->capture_default_str();
    c_brs->add_option("--ntheta", brs.ntheta, "Nodes on the heading axis")
        ->capture_default_str();
    c_brs->add_option("--tol", brs.tolerance, "Convergence residual per 1s pseudo-time")
        ->capture_default_str();
    c_brs->add_option("--t-max", brs.t_max, "Pseudo-time cap [s]")
        ->capture_default_str();
    c_brs->add_option("--workers", brs.workers, "Sweep threads (0 = auto)");
    c_brs->add_option("--out", brs.out, "Output grid file")->required();

    GenDataOptions gen;
    auto* c_gen = app.add_subcommand(
        "gen-data", "Simulate labeled episodes for success prediction");
    c_gen->add_option("--n", gen.n_vehicles, "Vehicle count")->capture_default_str();
    c_gen->add_option("--m", gen.count, "Number of episodes")->capture_default_str();
    c_gen->add_option("--n-fixed", gen.n_fixed, "Vehicles with unmovable starts")
        ->capture_default_str();
    c_gen->add_option("--brs", gen.brs_path, "Value grid file")->required();
    c_gen->add_option("--speed", gen.speed, "Must match the grid file");
    c_gen->add_option("--omega", gen.omega_bar, "Must match the grid file");
    c_gen->add_option("--rc", gen.capture_radius, "Must match the grid file");
    c_gen->add_option("--seed", gen.seed, "Base seed")->required();
    c_gen->add_option("--workers", gen.workers, "Episode threads (0 = auto)");
    c_gen->add_option("--out", gen.out, "Output JSONL dataset")->required();

    TrainOptions trn;
    auto* c_trn = app.add_subcommand("train", "Fit the success classifier");
    c_trn->add_option("--data", trn.data_path, "JSONL dataset")->required();
    c_trn->add_option("--hidden", trn.hidden, "Hidden width (0 = default for N)");
    c_trn->add_option("--lr", trn.learning_rate, "Adam learning rate")
        ->capture_default_str();
    c_trn->add_option("--epochs", trn.epochs, "Training epochs")->capture_default_str();
    c_trn->add_option("--batch", trn.batch_size, "Minibatch size")
        ->capture_default_str();
    c_trn->add_option("--seed", trn.seed, "Init and shuffle seed")->required();
    c_trn->add_option("--out", trn.out, "Output model JSON")->required();

    EvalOptions evl;
    auto* c_evl = app.add_subcommand(
        "eval", "Paired learned-vs-random initialization evaluation");
    c_evl->add_option("--n", evl.n_vehicles, "Vehicle count")->capture_default_str();
    c_evl->add_option("--n-fixed", evl.n_fixed, "Vehicles with unmovable starts")
        ->capture_default_str();
    c_evl->add_option("--runs", evl.runs, "Evaluation episodes per arm")
        ->capture_default_str();
    c_evl->add_option("--candidates", evl.candidates, "Candidates per episode")
        ->capture_default_str();
    c_evl->add_option("--brs", evl.brs_path, "Value grid file")->required();
    c_evl->add_option("--model", evl.model_path, "Model JSON")->required();
    c_evl->add_option("--speed", evl.speed, "Must match the grid file");
    c_evl->add_option("--omega", evl.omega_bar, "Must match the grid file");
    c_evl->add_option("--rc", evl.capture_radius, "Must match the grid file");
    c_evl->add_option("--seed", evl.seed, "Base seed")->required();
    c_evl->add_option("--workers", evl.workers, "Episode threads (0 = auto)");
    c_evl->add_option("--out", evl.out, "Output results CSV")->required();

    SimulateOptions sim;
    auto* c_sim = app.add_subcommand("simulate", "Roll out one episode");
    c_sim->add_option("--n", sim.n_vehicles, "Vehicle count for the seeded scenario")
        ->capture_default_str();
    c_sim->add_option("--brs", sim.brs_path, "Value grid file")->required();
    c_sim->add_option("--scenario", sim.scenario_path,
                      "Scenario JSON {states, goals, fixed}");
    c_sim->add_option("--seed", sim.seed, "Scenario seed (unless --scenario)");
    c_sim->add_option("--dt", sim.dt, "Step size [s]")->capture_default_str();
    c_sim->add_option("--t-max", sim.t_max, "Episode cap [s]")->capture_default_str();
    c_sim->add_flag("--frozen-dangerous", sim.frozen_vehicles_dangerous,
                    "Arrived vehicles stay in threat checks");
    c_sim->add_option("--out", sim.out, "Output trajectory CSV")->required();
    c_sim->add_option("--svg", sim.svg_out, "Also render this SVG");

    PlotOptions plt;
    auto* c_plt = app.add_subcommand("plot", "Render a trajectory CSV to SVG");
    c_plt->add_option("--csv", plt.csv_path, "Trajectory CSV")->required();
    c_plt->add_option("--rc", plt.capture_radius, "Danger-zone radius [m]")
        ->capture_default_str();
    add_goal_option(c_plt, plt.goals);
    c_plt->add_option("--out", plt.out, "Output SVG")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    if (c_brs->parsed()) return cmd_brs(brs);
    if (c_gen->parsed()) return cmd_gen_data(gen);
    if (c_trn->parsed()) return cmd_train(trn);
    if (c_evl->parsed()) return cmd_eval(evl);
    if (c_sim->parsed()) return cmd_simulate(sim);
    if (c_plt->parsed()) return cmd_plot(plt);
    return kExitUsage;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return dispatch(argc, argv);
    } catch (const NumericalError& e) {
        std::fprintf(stderr, "numerical failure: %s\n", e.what());
        return kExitNumerical;
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitUsage;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitUsage;
    }
}
