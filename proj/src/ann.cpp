#include "aquastream/ann.hpp"

#include "aquastream/error.hpp"
#include "aquastream/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace aquastream::ann {

namespace {

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

void check_dataset(const Dataset& data, int n_inputs) {
    if (data.size() == 0) raise(Errc::empty_dataset, "dataset is empty");
    if (data.inputs.size() != data.targets.size())
        raise(Errc::bad_config, "dataset inputs/targets size mismatch");
    for (const auto& row : data.inputs) {
        if (static_cast<int>(row.size()) != n_inputs)
            raise(Errc::arity_mismatch, "dataset row arity " + std::to_string(row.size()) +
                                            ", model expects " + std::to_string(n_inputs));
        for (double v : row)
            if (!std::isfinite(v)) raise(Errc::non_finite_value, "dataset contains a non-finite input");
    }
    for (double t : data.targets)
        if (!std::isfinite(t)) raise(Errc::non_finite_value, "dataset contains a non-finite target");
}

// Shared forward pass that also exposes the hidden activations.
double forward_with_hidden(const AnnModel& m, std::span<const double> x, std::vector<double>& hidden) {
    const int ni = m.config.n_inputs;
    const int nh = m.config.n_hidden;
    hidden.resize(static_cast<std::size_t>(nh));
    for (int j = 0; j < nh; ++j) {
        const double* row = m.w_hidden.data() + static_cast<std::size_t>(j) * (ni + 1);
        double a = row[ni]; // bias
        for (int i = 0; i < ni; ++i) a += row[i] * x[i];
        hidden[static_cast<std::size_t>(j)] = sigmoid(a);
    }
    double out = m.w_out[static_cast<std::size_t>(nh)]; // bias
    for (int j = 0; j < nh; ++j) out += m.w_out[static_cast<std::size_t>(j)] * hidden[static_cast<std::size_t>(j)];
    return out;
}

struct ScaledBatch {
    std::vector<std::vector<double>> x;
    const std::vector<double>* t = nullptr;
};

ScaledBatch scale_batch(const AnnModel& m, const Dataset& data) {
    ScaledBatch b;
    b.x.resize(data.size());
    for (std::size_t i = 0; i < data.size(); ++i) {
        b.x[i].resize(static_cast<std::size_t>(m.config.n_inputs));
        m.scaler.transform(data.inputs[i], b.x[i]);
    }
    b.t = &data.targets;
    return b;
}

double batch_mse(const AnnModel& m, const ScaledBatch& b, std::vector<double>& hidden) {
    double s = 0.0;
    for (std::size_t i = 0; i < b.x.size(); ++i) {
        double e = forward_with_hidden(m, b.x[i], hidden) - (*b.t)[i];
        s += e * e;
    }
    return s / static_cast<double>(b.x.size());
}

// Accumulates backprop deltas over a scaled batch. `factor` distinguishes the
// exact MSE gradient (2/M) from the classic half-squared-error step (1/M).
void accumulate_gradient(const AnnModel& m, const ScaledBatch& b, double factor, Gradient& g) {
    const int ni = m.config.n_inputs;
    const int nh = m.config.n_hidden;
    g.w_hidden.assign(m.w_hidden.size(), 0.0);
    g.w_out.assign(m.w_out.size(), 0.0);
    std::vector<double> hidden;
    for (std::size_t r = 0; r < b.x.size(); ++r) {
        const auto& x = b.x[r];
        double e = forward_with_hidden(m, x, hidden) - (*b.t)[r];
        g.w_out[static_cast<std::size_t>(nh)] += e;
        for (int j = 0; j < nh; ++j) {
            double h = hidden[static_cast<std::size_t>(j)];
            g.w_out[static_cast<std::size_t>(j)] += e * h;
            double delta = e * m.w_out[static_cast<std::size_t>(j)] * h * (1.0 - h);
            double* grow = g.w_hidden.data() + static_cast<std::size_t>(j) * (ni + 1);
            for (int i = 0; i < ni; ++i) grow[i] += delta * x[static_cast<std::size_t>(i)];
            grow[ni] += delta;
        }
    }
    double scale = factor / static_cast<double>(b.x.size());
    for (auto& v : g.w_hidden) v *= scale;
    for (auto& v : g.w_out) v *= scale;
}

} // namespace

void AnnConfig::validate() const {
    if (n_inputs < 1) raise(Errc::bad_config, "n_inputs must be >= 1");
    if (n_hidden < 1) raise(Errc::bad_config, "n_hidden must be >= 1");
    if (!(learning_rate > 0.0) || !std::isfinite(learning_rate))
        raise(Errc::bad_config, "learning_rate must be > 0");
    if (max_epochs < 1) raise(Errc::bad_config, "max_epochs must be >= 1");
    if (early_stop.window < 1) raise(Errc::bad_config, "early_stop.window must be >= 1");
    if (early_stop.min_delta < 0.0) raise(Errc::bad_config, "early_stop.min_delta must be >= 0");
}

nlohmann::json AnnConfig::to_json() const {
    return nlohmann::json{{"n_inputs", n_inputs},
                          {"n_hidden", n_hidden},
                          {"learning_rate", learning_rate},
                          {"max_epochs", max_epochs},
                          {"seed", seed},
                          {"early_stop", {{"window", early_stop.window}, {"min_delta", early_stop.min_delta}}}};
}

AnnConfig AnnConfig::from_json(const nlohmann::json& j) {
    AnnConfig c;
    c.n_inputs = j.at("n_inputs").get<int>();
    c.n_hidden = j.at("n_hidden").get<int>();
    c.learning_rate = j.at("learning_rate").get<double>();
    c.max_epochs = j.value("max_epochs", 2000);
    c.seed = j.value("seed", std::uint64_t{1});
    if (j.contains("early_stop")) {
        c.early_stop.window = j["early_stop"].value("window", 50);
        c.early_stop.min_delta = j["early_stop"].value("min_delta", 1e-7);
    }
    c.validate();
    return c;
}

Scaler Scaler::identity(int n) {
    Scaler s;
    s.mean.assign(static_cast<std::size_t>(n), 0.0);
    s.stddev.assign(static_cast<std::size_t>(n), 1.0);
    return s;
}

void Scaler::transform(std::span<const double> raw, std::span<double> out) const {
    for (std::size_t i = 0; i < raw.size(); ++i) out[i] = (raw[i] - mean[i]) / stddev[i];
}

Dataset Dataset::head(std::size_t n) const {
    Dataset d;
    n = std::min(n, size());
    d.inputs.assign(inputs.begin(), inputs.begin() + static_cast<std::ptrdiff_t>(n));
    d.targets.assign(targets.begin(), targets.begin() + static_cast<std::ptrdiff_t>(n));
    return d;
}

Dataset Dataset::tail(std::size_t n) const {
    Dataset d;
    n = std::min(n, size());
    d.inputs.assign(inputs.end() - static_cast<std::ptrdiff_t>(n), inputs.end());
    d.targets.assign(targets.end() - static_cast<std::ptrdiff_t>(n), targets.end());
    return d;
}

double AnnModel::forward(std::span<const double> scaled_x) const {
    if (static_cast<int>(scaled_x.size()) != config.n_inputs)
        raise(Errc::arity_mismatch, "input arity " + std::to_string(scaled_x.size()) + ", model expects " +
                                        std::to_string(config.n_inputs));
    std::vector<double> hidden;
    return forward_with_hidden(*this, scaled_x, hidden);
}

double AnnModel::predict(std::span<const double> raw_x) const {
    if (static_cast<int>(raw_x.size()) != config.n_inputs)
        raise(Errc::arity_mismatch, "input arity " + std::to_string(raw_x.size()) + ", model expects " +
                                        std::to_string(config.n_inputs));
    std::vector<double> scaled(raw_x.size());
    scaler.transform(raw_x, scaled);
    return forward(scaled);
}

nlohmann::json AnnModel::to_json() const {
    return nlohmann::json{{"config", config.to_json()},
                          {"w_hidden", w_hidden},
                          {"w_out", w_out},
                          {"scaler", {{"mean", scaler.mean}, {"std", scaler.stddev}}},
                          {"training_history", training_history},
                          {"non_convergence", non_convergence}};
}

AnnModel AnnModel::from_json(const nlohmann::json& j) {
    AnnModel m;
    m.config = AnnConfig::from_json(j.at("config"));
    m.w_hidden = j.at("w_hidden").get<std::vector<double>>();
    m.w_out = j.at("w_out").get<std::vector<double>>();
    m.scaler.mean = j.at("scaler").at("mean").get<std::vector<double>>();
    m.scaler.stddev = j.at("scaler").at("std").get<std::vector<double>>();
    m.training_history = j.value("training_history", std::vector<double>{});
    m.non_convergence = j.value("non_convergence", false);
    const std::size_t nh = static_cast<std::size_t>(m.config.n_hidden);
    const std::size_t ni = static_cast<std::size_t>(m.config.n_inputs);
    if (m.w_hidden.size() != nh * (ni + 1) || m.w_out.size() != nh + 1 || m.scaler.mean.size() != ni ||
        m.scaler.stddev.size() != ni)
        raise(Errc::bad_config, "model payload shapes do not match the config topology");
    for (double v : m.w_hidden)
        if (!std::isfinite(v)) raise(Errc::bad_config, "model payload has non-finite weights");
    for (double v : m.w_out)
        if (!std::isfinite(v)) raise(Errc::bad_config, "model payload has non-finite weights");
    for (double s : m.scaler.stddev)
        if (!(s > 0.0)) raise(Errc::bad_config, "scaler stddev must be > 0");
    return m;
}

AnnModel init(const AnnConfig& config) {
    config.validate();
    AnnModel m;
    m.config = config;
    const int ni = config.n_inputs;
    const int nh = config.n_hidden;
    Rng rng(config.seed);
    const double r_hidden = 1.0 / std::sqrt(static_cast<double>(ni + 1));
    m.w_hidden.resize(static_cast<std::size_t>(nh) * (ni + 1));
    for (auto& w : m.w_hidden) w = rng.uniform(-r_hidden, r_hidden);
    const double r_out = 1.0 / std::sqrt(static_cast<double>(nh + 1));
    m.w_out.resize(static_cast<std::size_t>(nh) + 1);
    for (auto& w : m.w_out) w = rng.uniform(-r_out, r_out);
    m.scaler = Scaler::identity(ni);
    return m;
}

double mse(const AnnModel& model, const Dataset& data) {
    check_dataset(data, model.config.n_inputs);
    auto batch = scale_batch(model, data);
    std::vector<double> hidden;
    return batch_mse(model, batch, hidden);
}

Gradient gradient(const AnnModel& model, const Dataset& batch) {
    check_dataset(batch, model.config.n_inputs);
    auto scaled = scale_batch(model, batch);
    Gradient g;
    accumulate_gradient(model, scaled, 2.0, g);
    return g;
}

AnnModel train(const AnnConfig& config, const Dataset& train_set) {
    config.validate();
    check_dataset(train_set, config.n_inputs);

    AnnModel m = init(config);

    // Fit the z-score scaler on the training inputs only.
    const int ni = config.n_inputs;
    m.scaler.mean.assign(static_cast<std::size_t>(ni), 0.0);
    m.scaler.stddev.assign(static_cast<std::size_t>(ni), 0.0);
    for (const auto& row : train_set.inputs)
        for (int i = 0; i < ni; ++i) m.scaler.mean[static_cast<std::size_t>(i)] += row[static_cast<std::size_t>(i)];
    for (int i = 0; i < ni; ++i) m.scaler.mean[static_cast<std::size_t>(i)] /= static_cast<double>(train_set.size());
    for (const auto& row : train_set.inputs)
        for (int i = 0; i < ni; ++i) {
            double d = row[static_cast<std::size_t>(i)] - m.scaler.mean[static_cast<std::size_t>(i)];
            m.scaler.stddev[static_cast<std::size_t>(i)] += d * d;
        }
    for (int i = 0; i < ni; ++i) {
        double s = std::sqrt(m.scaler.stddev[static_cast<std::size_t>(i)] / static_cast<double>(train_set.size()));
        m.scaler.stddev[static_cast<std::size_t>(i)] = s > 0.0 ? s : 1.0;
    }

    auto batch = scale_batch(m, train_set);
    std::vector<double> hidden;
    Gradient g;

    // The step uses the classic half-squared-error deltas (delta = e, not 2e);
    // the stated learning rate then matches the usual backprop convention.
    double best_mse = std::numeric_limits<double>::infinity();
    std::vector<double> best_hidden_w = m.w_hidden;
    std::vector<double> best_out_w = m.w_out;
    int best_epoch = -1;
    double initial_mse = 0.0;

    for (int epoch = 0; epoch < config.max_epochs; ++epoch) {
        double cur = batch_mse(m, batch, hidden);
        if (!std::isfinite(cur))
            raise(Errc::divergence_detected, "training MSE became non-finite at epoch " + std::to_string(epoch));
        m.training_history.push_back(cur);
        if (epoch == 0) initial_mse = cur;
        if (cur < best_mse - config.early_stop.min_delta) {
            best_mse = cur;
            best_epoch = epoch;
            best_hidden_w = m.w_hidden;
            best_out_w = m.w_out;
        } else if (cur < best_mse) {
            best_mse = cur;
            best_hidden_w = m.w_hidden;
            best_out_w = m.w_out;
        }
        if (best_epoch >= 0 && epoch - best_epoch >= config.early_stop.window) break;

        accumulate_gradient(m, batch, 1.0, g);
        for (std::size_t i = 0; i < m.w_hidden.size(); ++i) m.w_hidden[i] -= config.learning_rate * g.w_hidden[i];
        for (std::size_t i = 0; i < m.w_out.size(); ++i) m.w_out[i] -= config.learning_rate * g.w_out[i];
    }

    // Keep the best weights seen.
    double final_mse = batch_mse(m, batch, hidden);
    if (std::isfinite(final_mse) && final_mse < best_mse) {
        best_mse = final_mse;
    } else {
        m.w_hidden = best_hidden_w;
        m.w_out = best_out_w;
    }
    m.training_history.push_back(best_mse);
    m.non_convergence = !(best_mse <= initial_mse);
    return m;
}

GridSearchSpace GridSearchSpace::defaults() {
    GridSearchSpace s;
    for (int h = 5; h <= 25; ++h) s.hidden_candidates.push_back(h);
    for (int i = 1; i <= 20; ++i) s.lr_candidates.push_back(0.05 * i);
    return s;
}

GridResult grid_search(const GridSearchSpace& space, const Dataset& train_set, const Dataset& val_set,
                       const AnnConfig& base) {
    if (space.hidden_candidates.empty() || space.lr_candidates.empty())
        raise(Errc::bad_config, "grid search space is empty");
    check_dataset(train_set, base.n_inputs);
    check_dataset(val_set, base.n_inputs);

    GridResult result;
    result.best_val_mse = std::numeric_limits<double>::infinity();
    bool have_best = false;
    std::size_t cell_index = 0;
    for (int h : space.hidden_candidates) {
        for (double lr : space.lr_candidates) {
            AnnConfig cfg = base;
            cfg.n_hidden = h;
            cfg.learning_rate = lr;
            cfg.seed = base.seed + cell_index;
            double score = std::numeric_limits<double>::infinity();
            try {
                AnnModel m = train(cfg, train_set);
                score = mse(m, val_set);
                if (!std::isfinite(score)) score = std::numeric_limits<double>::infinity();
            } catch (const Error& e) {
                if (e.code() != Errc::divergence_detected) throw;
            }
            result.table.push_back(GridCell{h, lr, score});
            bool better = score < result.best_val_mse;
            bool tie = score == result.best_val_mse && have_best &&
                       (h < result.best.n_hidden ||
                        (h == result.best.n_hidden && lr < result.best.learning_rate));
            if (!have_best || better || tie) {
                result.best = cfg;
                result.best_val_mse = score;
                have_best = true;
            }
            ++cell_index;
        }
    }
    return result;
}

} // namespace aquastream::ann
