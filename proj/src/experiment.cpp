#include "safeinit/experiment.hpp"

#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "safeinit/manifest.hpp"

namespace safeinit {

void CampaignConfig::validate() const {
    if (n_vehicles < 3 || n_vehicles > 10)
        throw std::invalid_argument("CampaignConfig: n_vehicles must be in [3, 10]");
    if (n_fixed >= n_vehicles)
        throw std::invalid_argument("CampaignConfig: n_fixed must be below n_vehicles");
    if (candidates_per_run < 1)
        throw std::invalid_argument("CampaignConfig: need at least one candidate per run");
    sim.validate();
}

namespace {

Scenario run_base_scenario(const CampaignConfig& cfg, Rng& rng) {
    Scenario base = make_base_scenario(cfg.n_vehicles, rng, cfg.box);
    for (std::size_t i = 0; i < cfg.n_fixed; ++i) base.fixed_mask[i] = true;
    return base;
}

// Runs body(r) for every r in [0, count), split contiguously across workers.
// Outputs must go to preallocated per-run slots so the result is independent
// of the partitioning.
template <typename Body>
void parallel_runs(std::size_t count, int workers, Body&& body) {
    const std::size_t nworkers =
        std::min<std::size_t>(std::max(workers, 1), count == 0 ? 1 : count);
    if (nworkers <= 1) {
        for (std::size_t r = 0; r < count; ++r) body(r);
        return;
    }
    std::exception_ptr first_error;
    std::mutex error_mutex;
    std::vector<std::thread> threads;
    threads.reserve(nworkers);
    for (std::size_t w = 0; w < nworkers; ++w) {
        const std::size_t begin = count * w / nworkers;
        const std::size_t end = count * (w + 1) / nworkers;
        threads.emplace_back([&, begin, end] {
            try {
                for (std::size_t r = begin; r < end; ++r) body(r);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!first_error) first_error = std::current_exception();
            }
        });
    }
    for (auto& t : threads) t.join();
    if (first_error) std::rethrow_exception(first_error);
}

}  // namespace

ScenarioDataset generate_dataset(const CampaignConfig& cfg, const ValueGrid& grid) {
    cfg.validate();
    ScenarioDataset data(cfg.dataset_size);
    parallel_runs(cfg.dataset_size, cfg.workers, [&](std::size_t r) {
        Rng rng(derive_seed(cfg.base_seed, r, "data"));
        const Scenario base = run_base_scenario(cfg, rng);
        const Scenario candidate = sample_candidate(base, cfg.box, rng);
        const SimResult res = run_simulation(candidate, grid, cfg.sim);
        data[r] = {r, feature_map(candidate), res.success ? 1 : 0, candidate};
    });
    return data;
}

Dataset to_labeled(const ScenarioDataset& data) {
    Dataset out;
    out.reserve(data.size());
    for (const DatasetRecord& rec : data) out.push_back({rec.h, rec.y});
    return out;
}

SelectionResult select_initialization(const std::vector<Scenario>& candidates,
                                      const MlpParams& model) {
    if (candidates.empty())
        throw std::invalid_argument("select_initialization: no candidates");
    std::size_t best = 0;
    double best_prob = predict_success(model, candidates[0]);
    for (std::size_t i = 1; i < candidates.size(); ++i) {
        const double prob = predict_success(model, candidates[i]);
        if (prob > best_prob) {  // strict: ties keep the lowest index
            best_prob = prob;
            best = i;
        }
    }
    return {candidates[best], best, best_prob};
}

Scenario select_random(const std::vector<Scenario>& candidates, Rng& rng) {
    if (candidates.empty()) throw std::invalid_argument("select_random: no candidates");
    return candidates[static_cast<std::size_t>(rng.uniform_index(candidates.size()))];
}

EvalSummary compute_metrics(const std::vector<SimResult>& results,
                            std::size_t n_vehicles, std::size_t n_runs) {
    if (results.size() != n_runs)
        throw std::invalid_argument("compute_metrics: result count does not match n_runs");
    if (n_runs == 0 || n_vehicles == 0)
        throw std::invalid_argument("compute_metrics: empty campaign");
    EvalSummary summary;
    summary.runs.reserve(n_runs);
    std::size_t successes = 0;
    long long total_violations = 0;
    for (std::size_t r = 0; r < n_runs; ++r) {
        const SimResult& res = results[r];
        successes += res.success ? 1 : 0;
        total_violations += res.violation_count;
        summary.runs.push_back({r, res.success, res.violation_count, res.end_time});
    }
    summary.success_rate_percent =
        100.0 * static_cast<double>(successes) / static_cast<double>(n_runs);
    summary.avg_violations = static_cast<double>(total_violations) /
                             (static_cast<double>(n_vehicles) * static_cast<double>(n_runs));
    return summary;
}

PairedEvaluation evaluate_paired(const CampaignConfig& cfg, const ValueGrid& grid,
                                 const MlpParams& model) {
    cfg.validate();
    std::vector<SimResult> learned_results(cfg.eval_runs);
    std::vector<SimResult> random_results(cfg.eval_runs);
    parallel_runs(cfg.eval_runs, cfg.workers, [&](std::size_t r) {
        Rng rng(derive_seed(cfg.base_seed, r, "eval"));
        const Scenario base = run_base_scenario(cfg, rng);
        std::vector<Scenario> candidates;
        candidates.reserve(cfg.candidates_per_run);
        for (std::size_t l = 0; l < cfg.candidates_per_run; ++l) {
            candidates.push_back(sample_candidate(base, cfg.box, rng));
        }
        const SelectionResult learned = select_initialization(candidates, model);
        const Scenario random_pick = select_random(candidates, rng);
        learned_results[r] = run_simulation(learned.scenario, grid, cfg.sim);
        random_results[r] = run_simulation(random_pick, grid, cfg.sim);
    });
    PairedEvaluation eval;
    eval.learned = compute_metrics(learned_results, cfg.n_vehicles, cfg.eval_runs);
    eval.random = compute_metrics(random_results, cfg.n_vehicles, cfg.eval_runs);
    return eval;
}

nlohmann::json scenario_to_json(const Scenario& sc) {
    sc.validate();
    nlohmann::json states = nlohmann::json::array();
    for (const VehicleState& s : sc.initial_states) {
        states.push_back({s.qx, s.qy, s.theta});
    }
    nlohmann::json goals = nlohmann::json::array();
    for (const Goal& g : sc.goals) goals.push_back({g[0], g[1]});
    nlohmann::json fixed = nlohmann::json::array();
    for (bool f : sc.fixed_mask) fixed.push_back(f);
    return {{"states", states}, {"goals", goals}, {"fixed", fixed}};
}

Scenario scenario_from_json(const nlohmann::json& j) {
    Scenario sc;
    for (const auto& s : j.at("states")) {
        if (s.size() != 3) throw std::invalid_argument("scenario: state needs 3 entries");
        sc.initial_states.push_back({s[0].get<double>(), s[1].get<double>(), s[2].get<double>()});
    }
    for (const auto& g : j.at("goals")) {
        if (g.size() != 2) throw std::invalid_argument("scenario: goal needs 2 entries");
        sc.goals.push_back({g[0].get<double>(), g[1].get<double>()});
    }
    for (const auto& f : j.at("fixed")) sc.fixed_mask.push_back(f.get<bool>());
    sc.validate();
    return sc;
}

std::string serialize_dataset_jsonl(const ScenarioDataset& data) {
    std::string out;
    for (const DatasetRecord& rec : data) {
        nlohmann::json j;
        j["run"] = rec.run;
        j["h"] = rec.h;
        j["y"] = rec.y;
        j["scenario"] = scenario_to_json(rec.scenario);
        out += j.dump();
        out += '\n';
    }
    return out;
}

ScenarioDataset deserialize_dataset_jsonl(const std::string& text) {
    ScenarioDataset data;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const nlohmann::json j = nlohmann::json::parse(line);
        DatasetRecord rec;
        rec.run = j.at("run").get<std::size_t>();
        rec.h = j.at("h").get<FeatureVector>();
        rec.y = j.at("y").get<int>();
        rec.scenario = scenario_from_json(j.at("scenario"));
        if (rec.y != 0 && rec.y != 1)
            throw std::invalid_argument("dataset: label must be 0 or 1");
        data.push_back(std::move(rec));
    }
    return data;
}

void save_dataset_jsonl(const ScenarioDataset& data, const std::filesystem::path& path) {
    atomic_write(path, serialize_dataset_jsonl(data));
}

ScenarioDataset load_dataset_jsonl(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open dataset file: " + path.string());
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return deserialize_dataset_jsonl(text);
}

std::string results_csv(const PairedEvaluation& eval) {
    std::string out = "run,strategy,success,violations,time_to_completion\n";
    const auto append = [&out](const EvalSummary& summary, const char* strategy) {
        for (const RunRecord& r : summary.runs) {
            char buf[128];
            std::snprintf(buf, sizeof(buf), "%zu,%s,%d,%d,%.17g\n", r.run, strategy,
                          r.success ? 1 : 0, r.violations, r.time_to_completion);
            out += buf;
        }
    };
    append(eval.learned, "learned");
    append(eval.random, "random");
    return out;
}

}  // namespace safeinit
