#ifndef SAFEINIT_EXPERIMENT_HPP
#define SAFEINIT_EXPERIMENT_HPP

#include <filesystem>
#include <vector>

#include <json.hpp>

#include "safeinit/learner.hpp"
#include "safeinit/simulator.hpp"

namespace safeinit {

// A full data-gathering or evaluation campaign. Run r of a campaign draws all
// of its randomness from the stream seeded by derive_seed(base_seed, r, tag),
// tag "data" for dataset generation and "eval" for paired evaluation, so runs
// are independent of worker count and execution order.
struct CampaignConfig {
    std::size_t n_vehicles = 4;
    std::size_t dataset_size = 5000;      // simulated episodes when generating data
    std::size_t eval_runs = 200;          // paired episodes when evaluating
    std::size_t candidates_per_run = 10;  // L
    std::size_t n_fixed = 0;              // vehicles whose starts are never re-sampled
    CandidateBox box;
    SimConfig sim;
    std::uint64_t base_seed = 0;
    int workers = 1;

    void validate() const;
};

struct DatasetRecord {
    std::size_t run = 0;
    FeatureVector h;
    int y = 0;
    Scenario scenario;
};

using ScenarioDataset = std::vector<DatasetRecord>;

// One episode per run: run-seeded base scenario, one candidate drawn from the
// box, simulated under the safety policy; the label is episode success.
ScenarioDataset generate_dataset(const CampaignConfig& cfg, const ValueGrid& grid);

Dataset to_labeled(const ScenarioDataset& data);

struct SelectionResult {
    Scenario scenario;
    std::size_t index = 0;
    double probability = 0.0;
};

// argmax of predict_success over the candidates; ties keep the lowest index.
SelectionResult select_initialization(const std::vector<Scenario>& candidates,
                                      const MlpParams& model);

Scenario select_random(const std::vector<Scenario>& candidates, Rng& rng);

struct RunRecord {
    std::size_t run = 0;
    bool success = false;
    int violations = 0;
    double time_to_completion = 0.0;
};

struct EvalSummary {
    double success_rate_percent = 0.0;  // 100 * successes / runs
    double avg_violations = 0.0;        // total violations / (N * runs)
    std::vector<RunRecord> runs;
};

// p_s and N_col over a result list, plus the per-run records.
EvalSummary compute_metrics(const std::vector<SimResult>& results,
                            std::size_t n_vehicles, std::size_t n_runs);

struct PairedEvaluation {
    EvalSummary learned;
    EvalSummary random;
};

// Both arms share each run's base scenario and candidate list; the learned arm
// picks by model score, the random arm by a uniform draw from the same list.
PairedEvaluation evaluate_paired(const CampaignConfig& cfg, const ValueGrid& grid,
                                 const MlpParams& model);

nlohmann::json scenario_to_json(const Scenario& sc);
Scenario scenario_from_json(const nlohmann::json& j);

// JSON Lines, one record per line:
// {"run": r, "h": [...], "y": 0|1, "scenario": {"states", "goals", "fixed"}}.
std::string serialize_dataset_jsonl(const ScenarioDataset& data);
ScenarioDataset deserialize_dataset_jsonl(const std::string& text);
void save_dataset_jsonl(const ScenarioDataset& data, const std::filesystem::path& path);
ScenarioDataset load_dataset_jsonl(const std::filesystem::path& path);

// CSV with header run,strategy,success,violations,time_to_completion; the
// learned arm's rows precede the random arm's.
std::string results_csv(const PairedEvaluation& eval);

}  // namespace safeinit

#endif
