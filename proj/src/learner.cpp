#include "safeinit/learner.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

#include "safeinit/manifest.hpp"

namespace safeinit {

namespace {

constexpr double kProbFloor = 1e-7;
constexpr double kProbCeil = 1.0 - 1e-7;

Eigen::VectorXd normalized_input(const MlpParams& p, const FeatureVector& h) {
    if (static_cast<int>(h.size()) != p.n_in)
        throw std::invalid_argument("mlp: feature width " + std::to_string(h.size()) +
                                    " does not match n_in " + std::to_string(p.n_in));
    Eigen::VectorXd x = Eigen::Map<const Eigen::VectorXd>(h.data(), p.n_in);
    return (x - p.norm.offset).cwiseProduct(p.norm.scale);
}

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

// Loss plus (optionally) gradients in one pass over the batch.
double loss_and_grads(const MlpParams& p, std::span<const LabeledSample> batch,
                      MlpGrads* grads) {
    if (grads) {
        grads->w1.setZero(p.n_hidden, p.n_in);
        grads->b1.setZero(p.n_hidden);
        grads->w2.setZero(p.n_hidden);
        grads->b2 = 0.0;
    }
    double loss = 0.0;
    for (const LabeledSample& sample : batch) {
        const Eigen::VectorXd xn = normalized_input(p, sample.h);
        const Eigen::VectorXd z1 = p.w1 * xn + p.b1;
        const Eigen::VectorXd a1 = z1.cwiseMax(0.0);
        const double z2 = p.w2.dot(a1) + p.b2;
        const double raw = sigmoid(z2);
        const double prob = std::clamp(raw, kProbFloor, kProbCeil);
        const double y = static_cast<double>(sample.y);
        loss += -y * std::log(prob) - (1.0 - y) * std::log(1.0 - prob);

        if (!grads) continue;
        if (raw <= kProbFloor || raw >= kProbCeil) continue;  // clamp rail: no flow
        const double delta2 = raw - y;
        grads->w2.noalias() += delta2 * a1.transpose();
        grads->b2 += delta2;
        Eigen::VectorXd delta1 = p.w2.transpose() * delta2;
        for (int k = 0; k < p.n_hidden; ++k) {
            if (z1(k) <= 0.0) delta1(k) = 0.0;  // relu'(0) = 0
        }
        grads->w1.noalias() += delta1 * xn.transpose();
        grads->b1 += delta1;
    }
    return loss;
}

bool is_heading_feature(int k, int n_in) {
    const int n_states = 3 * (n_in / 5);
    return k < n_states && k % 3 == 2;
}

Normalization fit_normalization(std::span<const LabeledSample> train, int n_in) {
    Normalization norm;
    norm.scale = Eigen::VectorXd::Ones(n_in);
    norm.offset = Eigen::VectorXd::Zero(n_in);
    for (int k = 0; k < n_in; ++k) {
        if (is_heading_feature(k, n_in)) {
            norm.scale(k) = 1.0 / kPi;
            continue;
        }
        double max_abs = 0.0;
        for (const LabeledSample& s : train) {
            max_abs = std::max(max_abs, std::abs(s.h[static_cast<std::size_t>(k)]));
        }
        norm.scale(k) = max_abs > 0.0 ? 1.0 / max_abs : 1.0;
    }
    return norm;
}

}  // namespace

AdamState AdamState::zeros(int n_in, int n_hidden) {
    AdamState s;
    for (MlpGrads* g : {&s.m, &s.v}) {
        g->w1.setZero(n_hidden, n_in);
        g->b1.setZero(n_hidden);
        g->w2.setZero(n_hidden);
        g->b2 = 0.0;
    }
    return s;
}

MlpParams init_params(int n_in, int n_hidden, Rng& rng) {
    if (n_in < 1 || n_hidden < 1)
        throw std::invalid_argument("init_params: widths must be positive");
    MlpParams p;
    p.n_in = n_in;
    p.n_hidden = n_hidden;
    p.w1.resize(n_hidden, n_in);
    const double limit1 = std::sqrt(6.0 / static_cast<double>(n_in + n_hidden));
    for (int r = 0; r < n_hidden; ++r) {
        for (int c = 0; c < n_in; ++c) p.w1(r, c) = rng.uniform(-limit1, limit1);
    }
    p.b1 = Eigen::VectorXd::Zero(n_hidden);
    p.w2.resize(n_hidden);
    const double limit2 = std::sqrt(6.0 / static_cast<double>(n_hidden + 1));
    for (int c = 0; c < n_hidden; ++c) p.w2(c) = rng.uniform(-limit2, limit2);
    p.b2 = 0.0;
    p.norm.scale = Eigen::VectorXd::Ones(n_in);
    p.norm.offset = Eigen::VectorXd::Zero(n_in);
    return p;
}

double forward(const MlpParams& p, const FeatureVector& h) {
    const Eigen::VectorXd xn = normalized_input(p, h);
    const Eigen::VectorXd a1 = (p.w1 * xn + p.b1).cwiseMax(0.0);
    return std::clamp(sigmoid(p.w2.dot(a1) + p.b2), kProbFloor, kProbCeil);
}

double nll_loss(const MlpParams& p, std::span<const LabeledSample> batch) {
    return loss_and_grads(p, batch, nullptr);
}

MlpGrads backward(const MlpParams& p, std::span<const LabeledSample> batch) {
    MlpGrads g;
    loss_and_grads(p, batch, &g);
    return g;
}

void adam_step(MlpParams& p, const MlpGrads& g, AdamState& state, int t,
               const TrainConfig& cfg) {
    if (t < 1) throw std::invalid_argument("adam_step: t is 1-based");
    const double bc1 = 1.0 - std::pow(cfg.beta1, t);
    const double bc2 = 1.0 - std::pow(cfg.beta2, t);
    const auto update = [&](auto& param, const auto& grad, auto& m, auto& v) {
        m = cfg.beta1 * m + (1.0 - cfg.beta1) * grad;
        v = cfg.beta2 * v + (1.0 - cfg.beta2) * grad.cwiseProduct(grad);
        param.array() -=
            cfg.learning_rate * (m.array() / bc1) / ((v.array() / bc2).sqrt() + cfg.adam_eps);
    };
    update(p.w1, g.w1, state.m.w1, state.v.w1);
    update(p.b1, g.b1, state.m.b1, state.v.b1);
    update(p.w2, g.w2, state.m.w2, state.v.w2);
    state.m.b2 = cfg.beta1 * state.m.b2 + (1.0 - cfg.beta1) * g.b2;
    state.v.b2 = cfg.beta2 * state.v.b2 + (1.0 - cfg.beta2) * g.b2 * g.b2;
    p.b2 -= cfg.learning_rate * (state.m.b2 / bc1) / (std::sqrt(state.v.b2 / bc2) + cfg.adam_eps);
}

TrainResult train(const Dataset& data, int n_hidden, const TrainConfig& cfg) {
    if (data.empty()) throw std::invalid_argument("train: empty dataset");
    const std::size_t width = data.front().h.size();
    if (width == 0 || width % 5 != 0)
        throw std::invalid_argument("train: feature width must be 5N");
    bool has_pos = false, has_neg = false;
    for (const LabeledSample& s : data) {
        if (s.h.size() != width) throw std::invalid_argument("train: inconsistent feature widths");
        if (s.y != 0 && s.y != 1) throw std::invalid_argument("train: labels must be 0 or 1");
        (s.y ? has_pos : has_neg) = true;
    }
    if (!has_pos || !has_neg)
        throw std::invalid_argument("train: dataset contains a single class");

    Rng rng(cfg.seed);
    const std::size_t m = data.size();
    const std::size_t val_count = m / 10;
    const std::vector<std::size_t> perm = rng.permutation(m);
    std::vector<LabeledSample> train_set, val_set;
    train_set.reserve(m - val_count);
    val_set.reserve(val_count);
    for (std::size_t i = 0; i < m - val_count; ++i) train_set.push_back(data[perm[i]]);
    for (std::size_t i = m - val_count; i < m; ++i) val_set.push_back(data[perm[i]]);

    const int n_in = static_cast<int>(width);
    MlpParams params = init_params(n_in, n_hidden, rng);
    params.norm = fit_normalization(train_set, n_in);

    AdamState adam = AdamState::zeros(n_in, n_hidden);
    TrainResult result;
    int t = 0;
    const std::size_t bs = static_cast<std::size_t>(std::max(1, cfg.batch_size));
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        rng.shuffle(train_set);
        double epoch_loss = 0.0;
        for (std::size_t start = 0; start < train_set.size(); start += bs) {
            const std::size_t count = std::min(bs, train_set.size() - start);
            const std::span<const LabeledSample> batch(train_set.data() + start, count);
            MlpGrads grads;
            epoch_loss += loss_and_grads(params, batch, &grads);
            adam_step(params, grads, adam, ++t, cfg);
        }
        result.loss_history.push_back(epoch_loss / static_cast<double>(train_set.size()));
    }

    result.params = std::move(params);
    result.final_loss = result.loss_history.empty() ? 0.0 : result.loss_history.back();
    result.val_count = static_cast<int>(val_set.size());
    if (!val_set.empty()) {
        int correct = 0;
        for (const LabeledSample& s : val_set) {
            const int pred = forward(result.params, s.h) >= 0.5 ? 1 : 0;
            if (pred == s.y) ++correct;
        }
        result.val_accuracy = static_cast<double>(correct) / static_cast<double>(val_set.size());
    }
    return result;
}

double predict_success(const MlpParams& p, const Scenario& sc) {
    return forward(p, feature_map(sc));
}

int default_hidden_width(std::size_t n_vehicles) {
    if (n_vehicles < 3)
        throw std::invalid_argument("default_hidden_width: need at least 3 vehicles");
    return 5 * (static_cast<int>(n_vehicles) - 2);
}

namespace {

nlohmann::json vector_to_json(const Eigen::VectorXd& v) {
    nlohmann::json a = nlohmann::json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
    return a;
}

Eigen::VectorXd vector_from_json(const nlohmann::json& a) {
    Eigen::VectorXd v(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) v(static_cast<Eigen::Index>(i)) = a[i].get<double>();
    return v;
}

}  // namespace

std::string serialize_model(const ModelFile& m) {
    const MlpParams& p = m.params;
    if (static_cast<std::size_t>(p.n_in) != 5 * m.n_vehicles)
        throw std::invalid_argument("serialize_model: n_in must equal 5 * n_vehicles");
    nlohmann::json j;
    j["version"] = 1;
    j["n_vehicles"] = m.n_vehicles;
    j["n_in"] = p.n_in;
    j["n_hidden"] = p.n_hidden;
    nlohmann::json w1 = nlohmann::json::array();
    for (int r = 0; r < p.n_hidden; ++r) {
        nlohmann::json row = nlohmann::json::array();
        for (int c = 0; c < p.n_in; ++c) row.push_back(p.w1(r, c));
        w1.push_back(row);
    }
    j["w1"] = w1;
    j["b1"] = vector_to_json(p.b1);
    j["w2"] = vector_to_json(p.w2.transpose());
    j["b2"] = p.b2;
    j["norm"] = {{"scales", vector_to_json(p.norm.scale)},
                 {"offsets", vector_to_json(p.norm.offset)}};
    j["train_config"] = {{"learning_rate", m.train_config.learning_rate},
                         {"beta1", m.train_config.beta1},
                         {"beta2", m.train_config.beta2},
                         {"adam_eps", m.train_config.adam_eps},
                         {"batch_size", m.train_config.batch_size},
                         {"epochs", m.train_config.epochs},
                         {"seed", m.train_config.seed}};
    j["final_loss"] = m.final_loss;
    return j.dump(2) + "\n";
}

ModelFile deserialize_model(const std::string& text) {
    const nlohmann::json j = nlohmann::json::parse(text);
    if (j.value("version", 0) != 1)
        throw std::invalid_argument("model file: unsupported version");
    ModelFile m;
    m.n_vehicles = j.at("n_vehicles").get<std::size_t>();
    MlpParams& p = m.params;
    p.n_in = j.at("n_in").get<int>();
    p.n_hidden = j.at("n_hidden").get<int>();
    if (static_cast<std::size_t>(p.n_in) != 5 * m.n_vehicles)
        throw std::invalid_argument("model file: n_in must equal 5 * n_vehicles");
    const auto& w1 = j.at("w1");
    if (static_cast<int>(w1.size()) != p.n_hidden)
        throw std::invalid_argument("model file: w1 row count mismatch");
    p.w1.resize(p.n_hidden, p.n_in);
    for (int r = 0; r < p.n_hidden; ++r) {
        if (static_cast<int>(w1[r].size()) != p.n_in)
            throw std::invalid_argument("model file: w1 column count mismatch");
        for (int c = 0; c < p.n_in; ++c) p.w1(r, c) = w1[r][c].get<double>();
    }
    p.b1 = vector_from_json(j.at("b1"));
    p.w2 = vector_from_json(j.at("w2")).transpose();
    p.b2 = j.at("b2").get<double>();
    p.norm.scale = vector_from_json(j.at("norm").at("scales"));
    p.norm.offset = vector_from_json(j.at("norm").at("offsets"));
    if (p.b1.size() != p.n_hidden || p.w2.size() != p.n_hidden ||
        p.norm.scale.size() != p.n_in || p.norm.offset.size() != p.n_in)
        throw std::invalid_argument("model file: parameter shapes inconsistent");
    const auto& tc = j.at("train_config");
    m.train_config.learning_rate = tc.at("learning_rate").get<double>();
    m.train_config.beta1 = tc.at("beta1").get<double>();
    m.train_config.beta2 = tc.at("beta2").get<double>();
    m.train_config.adam_eps = tc.at("adam_eps").get<double>();
    m.train_config.batch_size = tc.at("batch_size").get<int>();
    m.train_config.epochs = tc.at("epochs").get<int>();
    m.train_config.seed = tc.at("seed").get<std::uint64_t>();
    m.final_loss = j.at("final_loss").get<double>();
    return m;
}

void save_model(const ModelFile& m, const std::filesystem::path& path) {
    atomic_write(path, serialize_model(m));
}

ModelFile load_model(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open model file: " + path.string());
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return deserialize_model(text);
}

}  // namespace safeinit
