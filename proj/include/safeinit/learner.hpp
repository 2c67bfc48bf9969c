#ifndef SAFEINIT_LEARNER_HPP
#define SAFEINIT_LEARNER_HPP

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "safeinit/rng.hpp"
#include "safeinit/scenario.hpp"

namespace safeinit {

// Per-feature affine map applied before the first layer:
// normalized = (raw - offset) * scale. Fitted so training features land in
// [-1, 1]: positions scale by their max absolute value, headings by pi.
struct Normalization {
    Eigen::VectorXd scale;
    Eigen::VectorXd offset;
};

// One hidden layer (ReLU), sigmoid output clamped to [1e-7, 1 - 1e-7].
struct MlpParams {
    int n_in = 0;
    int n_hidden = 0;
    Eigen::MatrixXd w1;     // n_hidden x n_in
    Eigen::VectorXd b1;     // n_hidden
    Eigen::RowVectorXd w2;  // 1 x n_hidden
    double b2 = 0.0;
    Normalization norm;
};

struct LabeledSample {
    FeatureVector h;
    int y = 0;  // 1 = the episode succeeded
};

using Dataset = std::vector<LabeledSample>;

struct TrainConfig {
    double learning_rate = 0.01;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double adam_eps = 1e-8;
    int batch_size = 64;
    int epochs = 200;
    std::uint64_t seed = 0;
};

struct MlpGrads {
    Eigen::MatrixXd w1;
    Eigen::VectorXd b1;
    Eigen::RowVectorXd w2;
    double b2 = 0.0;
};

struct AdamState {
    MlpGrads m, v;
    static AdamState zeros(int n_in, int n_hidden);
};

// Xavier-uniform weights (+-sqrt(6/(fan_in + fan_out))), zero biases,
// identity normalization. Weight draw order: w1 row by row, then w2.
MlpParams init_params(int n_in, int n_hidden, Rng& rng);

double forward(const MlpParams& p, const FeatureVector& h);

// Summed (not averaged) negative log likelihood of the batch.
double nll_loss(const MlpParams& p, std::span<const LabeledSample> batch);

// Analytic gradients of nll_loss, accumulated over the batch. relu'(0) = 0;
// samples whose sigmoid output sits at a clamp rail contribute zero gradient.
MlpGrads backward(const MlpParams& p, std::span<const LabeledSample> batch);

// Bias-corrected Adam update; t is the 1-based step count.
void adam_step(MlpParams& p, const MlpGrads& g, AdamState& state, int t,
               const TrainConfig& cfg);

struct TrainResult {
    MlpParams params;
    std::vector<double> loss_history;  // per-epoch mean training loss
    double final_loss = 0.0;
    double val_accuracy = 0.0;  // meaningful only when val_count > 0
    int val_count = 0;
};

// Splits off the last 10% of a seeded shuffle as a held-out diagnostic set,
// fits the normalization on the training split, then runs seeded minibatch
// Adam. Errors on datasets with a single class.
TrainResult train(const Dataset& data, int n_hidden, const TrainConfig& cfg);

// forward(feature_map(scenario)); errors if the model width is not 5N.
double predict_success(const MlpParams& p, const Scenario& sc);

// Published widths 10/15/20 for N = 4/5/6, extended as 5(N - 2).
int default_hidden_width(std::size_t n_vehicles);

struct ModelFile {
    MlpParams params;
    std::size_t n_vehicles = 0;
    TrainConfig train_config;
    double final_loss = 0.0;
};

// JSON with nested row-major weight arrays; numeric round trips are
// value-exact.
void save_model(const ModelFile& m, const std::filesystem::path& path);
ModelFile load_model(const std::filesystem::path& path);

std::string serialize_model(const ModelFile& m);
ModelFile deserialize_model(const std::string& text);

}  // namespace safeinit

#endif
