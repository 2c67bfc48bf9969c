#include "safeinit/commands.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <json.hpp>

#include "safeinit/experiment.hpp"
#include "safeinit/manifest.hpp"
#include "safeinit/plotting.hpp"
#include "safeinit/reachability.hpp"

namespace safeinit {

namespace {

using nlohmann::json;

int resolve_workers(int workers) {
    if (workers < 0) throw std::invalid_argument("--workers must be >= 0");
    if (workers > 0) return workers;
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

void require_out(const std::string& out, const char* command) {
    if (out.empty())
        throw std::invalid_argument(std::string(command) + ": --out is required");
}

// The grid file is the authority on dynamics parameters; explicit flags may
// only restate them.
void check_grid_params(const ValueGrid& grid, const std::optional<double>& speed,
                       const std::optional<double>& omega_bar,
                       const std::optional<double>& capture_radius) {
    const auto mismatch = [](const char* name, double flag, double stored) {
        std::ostringstream msg;
        msg << "--" << name << " " << flag << " conflicts with the grid file's " << stored;
        throw std::invalid_argument(msg.str());
    };
    if (speed && *speed != grid.params.speed)
        mismatch("speed", *speed, grid.params.speed);
    if (omega_bar && *omega_bar != grid.params.omega_bar)
        mismatch("omega", *omega_bar, grid.params.omega_bar);
    if (capture_radius && *capture_radius != grid.params.capture_radius)
        mismatch("rc", *capture_radius, grid.params.capture_radius);
}

ValueGrid load_checked_grid(const std::string& path) {
    if (path.empty()) throw std::invalid_argument("--brs is required");
    ValueGrid grid = load_grid(path);
    if (!grid.converged)
        throw NumericalError("grid file " + path + " is not marked converged");
    return grid;
}

json file_entry(const std::filesystem::path& path) {
    return json{{"path", path.string()}, {"hash", hash_file(path)}};
}

struct Stopwatch {
    std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
            .count();
    }
};

json sim_config_json(const SimConfig& sim) {
    return json{{"speed", sim.speed},
                {"omega_bar", sim.omega_bar},
                {"capture_radius", sim.capture_radius},
                {"dt", sim.dt},
                {"t_max", sim.t_max},
                {"safety_threshold", sim.policy.safety_threshold},
                {"goal_gain", sim.policy.goal_gain},
                {"goal_radius", sim.policy.goal_radius},
                {"frozen_vehicles_dangerous", sim.frozen_vehicles_dangerous}};
}

}  // namespace

int cmd_brs(const BrsOptions& opts) {
    require_out(opts.out, "brs");
    const int workers = resolve_workers(opts.workers);
    Stopwatch watch;

    const GridSpec spec = GridSpec::default_relative(opts.extent, opts.nxy, opts.ntheta);
    const ValueGrid init = signed_distance_init(spec, opts.capture_radius);

    SolveReport report;
    std::size_t last_printed = 0;
    ValueGrid grid = solve_brs(init, opts.speed, opts.omega_bar, opts.tolerance,
                               opts.t_max, workers, &report,
                               [&](const SolveReport& r) {
                                   if (r.sweeps == last_printed) return;
                                   last_printed = r.sweeps;
                                   std::printf("t=%6.2f  sweeps=%5zu  residual=%.6g\n",
                                               r.pseudo_time, r.sweeps, r.residual);
                               });

    save_grid(grid, opts.out);

    RunManifest m;
    m.command = "brs";
    m.config = json{{"speed", opts.speed},
                    {"omega_bar", opts.omega_bar},
                    {"capture_radius", opts.capture_radius},
                    {"extent", opts.extent},
                    {"nxy", opts.nxy},
                    {"ntheta", opts.ntheta},
                    {"tolerance", opts.tolerance},
                    {"t_max", opts.t_max},
                    {"workers", workers}};
    m.outputs["grid"] = file_entry(opts.out);
    m.extra = json{{"converged", report.converged},
                   {"residual", report.residual},
                   {"sweeps", report.sweeps},
                   {"pseudo_time", report.pseudo_time}};
    m.duration_seconds = watch.seconds();
    write_manifest(m, opts.out);

    std::printf("%s after %zu sweeps (pseudo-time %.2f), residual %.6g -> %s\n",
                report.converged ? "converged" : "NOT converged", report.sweeps,
                report.pseudo_time, report.residual, opts.out.c_str());
    if (!report.converged) {
        std::fprintf(stderr,
                     "warning: hit t_max %.1f before the residual fell below %g; "
                     "partial grid saved\n",
                     opts.t_max, opts.tolerance);
        return kExitNumerical;
    }
    return kExitOk;
}

int cmd_gen_data(const GenDataOptions& opts) {
    require_out(opts.out, "gen-data");
    Stopwatch watch;
    const ValueGrid grid = load_checked_grid(opts.brs_path);
    check_grid_params(grid, opts.speed, opts.omega_bar, opts.capture_radius);

    CampaignConfig cfg;
    cfg.n_vehicles = opts.n_vehicles;
    cfg.dataset_size = opts.count;
    cfg.n_fixed = opts.n_fixed;
    cfg.sim = SimConfig::for_grid(grid);
    cfg.base_seed = opts.seed;
    cfg.workers = resolve_workers(opts.workers);
    cfg.validate();

    const ScenarioDataset data = generate_dataset(cfg, grid);
    save_dataset_jsonl(data, opts.out);

    std::size_t positives = 0;
    for (const DatasetRecord& rec : data) positives += rec.y;

    RunManifest m;
    m.command = "gen-data";
    m.seeded = true;
    m.seed = opts.seed;
    m.config = json{{"n_vehicles", cfg.n_vehicles},
                    {"count", cfg.dataset_size},
                    {"n_fixed", cfg.n_fixed},
                    {"workers", cfg.workers},
                    {"sim", sim_config_json(cfg.sim)}};
    m.inputs["grid"] = file_entry(opts.brs_path);
    m.outputs["dataset"] = file_entry(opts.out);
    m.extra = json{{"records", data.size()}, {"positives", positives}};
    m.duration_seconds = watch.seconds();
    write_manifest(m, opts.out);

    std::printf("%zu records (%zu positive, %.1f%%) -> %s\n", data.size(), positives,
                data.empty() ? 0.0 : 100.0 * static_cast<double>(positives) /
                                         static_cast<double>(data.size()),
                opts.out.c_str());
    return kExitOk;
}

int cmd_train(const TrainOptions& opts) {
    require_out(opts.out, "train");
    if (opts.data_path.empty()) throw std::invalid_argument("--data is required");
    Stopwatch watch;

    if (const auto manifest = read_manifest_for(opts.data_path))
        verify_manifest_hashes(*manifest,
                               std::filesystem::path(opts.data_path).parent_path());
    const ScenarioDataset raw = load_dataset_jsonl(opts.data_path);
    if (raw.empty()) throw std::invalid_argument("dataset is empty");
    const Dataset data = to_labeled(raw);

    const std::size_t n_features = data.front().h.size();
    if (n_features % 5 != 0)
        throw std::invalid_argument("feature length is not a multiple of 5");
    const std::size_t n_vehicles = n_features / 5;
    const int hidden =
        opts.hidden > 0 ? opts.hidden : default_hidden_width(n_vehicles);

    TrainConfig cfg;
    cfg.learning_rate = opts.learning_rate;
    cfg.epochs = opts.epochs;
    cfg.batch_size = opts.batch_size;
    cfg.seed = opts.seed;

    const TrainResult result = train(data, hidden, cfg);

    ModelFile model;
    model.params = result.params;
    model.n_vehicles = n_vehicles;
    model.train_config = cfg;
    model.final_loss = result.final_loss;
    save_model(model, opts.out);

    RunManifest m;
    m.command = "train";
    m.seeded = true;
    m.seed = opts.seed;
    m.config = json{{"hidden", hidden},
                    {"learning_rate", cfg.learning_rate},
                    {"epochs", cfg.epochs},
                    {"batch_size", cfg.batch_size},
                    {"n_vehicles", n_vehicles}};
    m.inputs["dataset"] = file_entry(opts.data_path);
    m.outputs["model"] = file_entry(opts.out);
    m.extra = json{{"final_loss", result.final_loss},
                   {"val_accuracy", result.val_accuracy},
                   {"val_count", result.val_count}};
    m.duration_seconds = watch.seconds();
    write_manifest(m, opts.out);

    std::printf("final loss %.6f, validation accuracy %.3f (%d held out) -> %s\n",
                result.final_loss, result.val_accuracy, result.val_count,
                opts.out.c_str());
    return kExitOk;
}

int cmd_eval(const EvalOptions& opts) {
    require_out(opts.out, "eval");
    if (opts.model_path.empty()) throw std::invalid_argument("--model is required");
    Stopwatch watch;

    const ValueGrid grid = load_checked_grid(opts.brs_path);
    check_grid_params(grid, opts.speed, opts.omega_bar, opts.capture_radius);
    const ModelFile model = load_model(opts.model_path);
    if (model.n_vehicles != opts.n_vehicles) {
        std::ostringstream msg;
        msg << "model was trained for " << model.n_vehicles << " vehicles, --n is "
            << opts.n_vehicles;
        throw std::invalid_argument(msg.str());
    }

    CampaignConfig cfg;
    cfg.n_vehicles = opts.n_vehicles;
    cfg.eval_runs = opts.runs;
    cfg.candidates_per_run = opts.candidates;
    cfg.n_fixed = opts.n_fixed;
    cfg.sim = SimConfig::for_grid(grid);
    cfg.base_seed = opts.seed;
    cfg.workers = resolve_workers(opts.workers);
    cfg.validate();

    const PairedEvaluation eval = evaluate_paired(cfg, grid, model.params);
    atomic_write(opts.out, results_csv(eval));

    RunManifest m;
    m.command = "eval";
    m.seeded = true;
    m.seed = opts.seed;
    m.config = json{{"n_vehicles", cfg.n_vehicles},
                    {"runs", cfg.eval_runs},
                    {"candidates", cfg.candidates_per_run},
                    {"n_fixed", cfg.n_fixed},
                    {"workers", cfg.workers},
                    {"sim", sim_config_json(cfg.sim)}};
    m.inputs["grid"] = file_entry(opts.brs_path);
    m.inputs["model"] = file_entry(opts.model_path);
    m.outputs["results"] = file_entry(opts.out);
    m.extra = json{{"learned",
                    {{"p_s", eval.learned.success_rate_percent},
                     {"n_col", eval.learned.avg_violations}}},
                   {"random",
                    {{"p_s", eval.random.success_rate_percent},
                     {"n_col", eval.random.avg_violations}}}};
    m.duration_seconds = watch.seconds();
    write_manifest(m, opts.out);

    std::printf("strategy      p_s [%%]      N_col\n");
    std::printf("learned    %9.2f  %9.4f\n", eval.learned.success_rate_percent,
                eval.learned.avg_violations);
    std::printf("random     %9.2f  %9.4f\n", eval.random.success_rate_percent,
                eval.random.avg_violations);
    std::printf("results -> %s\n", opts.out.c_str());
    return kExitOk;
}

int cmd_simulate(const SimulateOptions& opts) {
    require_out(opts.out, "simulate");
    Stopwatch watch;
    const ValueGrid grid = load_checked_grid(opts.brs_path);

    Scenario scenario;
    if (!opts.scenario_path.empty()) {
        std::ifstream in(opts.scenario_path);
        if (!in) throw std::invalid_argument("cannot open " + opts.scenario_path);
        json j;
        in >> j;
        scenario = scenario_from_json(j);
    } else {
        if (!opts.seed)
            throw std::invalid_argument("--seed is required unless --scenario is given");
        Rng rng(*opts.seed);
        scenario = make_base_scenario(opts.n_vehicles, rng, CandidateBox{});
    }

    SimConfig cfg = SimConfig::for_grid(grid);
    cfg.dt = opts.dt;
    cfg.t_max = opts.t_max;
    cfg.frozen_vehicles_dangerous = opts.frozen_vehicles_dangerous;
    cfg.validate();

    const SimResult result = run_simulation(scenario, grid, cfg);
    atomic_write(opts.out, trajectory_csv(result));
    if (!opts.svg_out.empty())
        atomic_write(opts.svg_out, render_trajectory_svg(result.trajectories,
                                                         cfg.capture_radius,
                                                         scenario.goals));

    RunManifest m;
    m.command = "simulate";
    m.seeded = opts.seed.has_value();
    m.seed = opts.seed.value_or(0);
    m.config = json{{"n_vehicles", scenario.size()},
                    {"scenario_file", opts.scenario_path},
                    {"sim", sim_config_json(cfg)}};
    m.inputs["grid"] = file_entry(opts.brs_path);
    if (!opts.scenario_path.empty())
        m.inputs["scenario"] = file_entry(opts.scenario_path);
    m.outputs["trajectory"] = file_entry(opts.out);
    if (!opts.svg_out.empty()) m.outputs["plot"] = file_entry(opts.svg_out);
    m.extra = json{{"success", result.success},
                   {"reached_all", result.reached_all},
                   {"timed_out", result.timed_out},
                   {"violations", result.violation_count},
                   {"end_time", result.end_time}};
    m.duration_seconds = watch.seconds();
    write_manifest(m, opts.out);

    std::printf("%s: %d violations, end time %.2f -> %s\n",
                result.success ? "success" : "failure", result.violation_count,
                result.end_time, opts.out.c_str());
    return kExitOk;
}

int cmd_plot(const PlotOptions& opts) {
    require_out(opts.out, "plot");
    if (opts.csv_path.empty()) throw std::invalid_argument("--csv is required");
    Stopwatch watch;

    std::ifstream in(opts.csv_path, std::ios::binary);
    if (!in) throw std::invalid_argument("cannot open " + opts.csv_path);
    std::ostringstream buffer;
    buffer << in.rdbuf();

    const auto trajectories = parse_trajectory_csv(buffer.str());
    atomic_write(opts.out, render_trajectory_svg(trajectories, opts.capture_radius,
                                                 opts.goals));

    RunManifest m;
    m.command = "plot";
    json goals = json::array();
    for (const Goal& g : opts.goals) goals.push_back({g[0], g[1]});
    m.config = json{{"capture_radius", opts.capture_radius}, {"goals", goals}};
    m.inputs["trajectory"] = file_entry(opts.csv_path);
    m.outputs["plot"] = file_entry(opts.out);
    m.duration_seconds = watch.seconds();
    write_manifest(m, opts.out);

    std::printf("plot -> %s\n", opts.out.c_str());
    return kExitOk;
}

}  // namespace safeinit
