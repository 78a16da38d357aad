#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

namespace aquastream::ann {

// Feed-forward network with one sigmoid hidden layer and a linear output
// node, trained by full-batch backpropagation at a fixed learning rate.

struct EarlyStop {
    int window = 50;        // epochs without improvement before stopping
    double min_delta = 1e-7;
};

struct AnnConfig {
    int n_inputs = 3;
    int n_hidden = 10;
    double learning_rate = 0.55;
    int max_epochs = 2000;
    std::uint64_t seed = 1;
    EarlyStop early_stop;

    void validate() const; // throws Error(bad_config)
    nlohmann::json to_json() const;
    static AnnConfig from_json(const nlohmann::json& j);
};

// Per-input z-score parameters, fit on training data only.
struct Scaler {
    std::vector<double> mean;
    std::vector<double> stddev; // always > 0; constant columns fall back to 1

    static Scaler identity(int n);
    void transform(std::span<const double> raw, std::span<double> out) const;
};

struct Dataset {
    std::vector<std::vector<double>> inputs;
    std::vector<double> targets;

    std::size_t size() const { return targets.size(); }
    Dataset head(std::size_t n) const;
    Dataset tail(std::size_t n) const;
};

struct Gradient {
    std::vector<double> w_hidden; // same layout as the model
    std::vector<double> w_out;
};

struct AnnModel {
    AnnConfig config;
    // row-major (n_hidden x (n_inputs+1)); last column is the hidden bias
    std::vector<double> w_hidden;
    // (n_hidden+1); last entry is the output bias
    std::vector<double> w_out;
    Scaler scaler;
    std::vector<double> training_history; // MSE per epoch
    bool non_convergence = false;

    // x must already be scaled and have n_inputs entries
    double forward(std::span<const double> scaled_x) const;
    // applies the stored scaler, then forward
    double predict(std::span<const double> raw_x) const;

    nlohmann::json to_json() const;
    static AnnModel from_json(const nlohmann::json& j);
};

// Weights drawn uniformly from [-r, r] with r = 1/sqrt(fan_in), where fan_in
// counts the bias input. Deterministic in config.seed.
AnnModel init(const AnnConfig& config);

// (1/M) * sum (predict(x_i) - t_i)^2
double mse(const AnnModel& model, const Dataset& data);

// Exact analytic gradient of mse() with respect to all weights, at the
// model's current weights, over the given batch (raw inputs).
Gradient gradient(const AnnModel& model, const Dataset& batch);

// Fits the scaler on train, then runs full-batch gradient descent for up to
// max_epochs, early-stopping when the best MSE has not improved by min_delta
// within the early-stop window. Returns the best weights seen.
// Throws Error(divergence_detected) if the MSE becomes non-finite.
AnnModel train(const AnnConfig& config, const Dataset& train_set);

struct GridSearchSpace {
    std::vector<int> hidden_candidates;     // default 5..25 step 1
    std::vector<double> lr_candidates;      // default 0.05..1.00 step 0.05
    static GridSearchSpace defaults();
};

struct GridCell {
    int n_hidden = 0;
    double learning_rate = 0.0;
    double val_mse = 0.0; // +inf when the cell diverged
};

struct GridResult {
    AnnConfig best;
    double best_val_mse = 0.0;
    std::vector<GridCell> table;
};

// Trains one model per (hidden, lr) cell with seed = base.seed + cell index
// and returns the cell with the minimal validation MSE. Ties break toward
// fewer hidden nodes, then the smaller learning rate.
GridResult grid_search(const GridSearchSpace& space, const Dataset& train_set,
                       const Dataset& val_set, const AnnConfig& base);

} // namespace aquastream::ann
