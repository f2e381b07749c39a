#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "srcsel/errors.hpp"
#include "srcsel/hash.hpp"
#include "srcsel/parallel.hpp"
#include "srcsel/random.hpp"
#include "srcsel/textmodel.hpp"

namespace srcsel::textmodel {
namespace {

using Logits = std::array<double, kNumClasses>;

// In-place softmax, max-shifted for stability.
void softmax(Logits& z) {
    const double m = *std::max_element(z.begin(), z.end());
    double sum = 0.0;
    for (auto& v : z) {
        v = std::exp(v - m);
        sum += v;
    }
    for (auto& v : z) v /= sum;
}

std::size_t argmax_first(const Logits& p) {
    std::size_t best = 0;
    for (std::size_t c = 1; c < kNumClasses; ++c) {
        if (p[c] > p[best]) best = c;
    }
    return best;
}

// -log p_y, clamped so a probability that underflows to 0 stays finite.
double cross_entropy(const Logits& probs, Label y) {
    return -std::log(std::max(probs[index_of(y)], 1e-300));
}

std::vector<LabeledVector> featurize_labeled(std::span<const corpus::Dataset> train,
                                             const AdaptationStats& stats) {
    std::vector<std::string> texts;
    std::vector<Label> labels;
    std::set<Label> classes;
    for (const auto& ds : train) {
        for (const auto& ex : ds.examples()) {
            if (!ex.label) {
                throw LearnerError(fmt::format("fine_tune: example '{}' has no label", ex.id));
            }
            texts.push_back(ex.text);
            labels.push_back(*ex.label);
            classes.insert(*ex.label);
        }
    }
    if (texts.empty()) throw LearnerError("fine_tune: no labeled training examples");
    if (classes.size() < 2) {
        spdlog::warn("fine_tune: training data has a single class ({}); the model learns a constant",
                     to_string(*classes.begin()));
    }
    auto features = featurize_batch(texts, stats);
    std::vector<LabeledVector> out(texts.size());
    for (std::size_t i = 0; i < texts.size(); ++i) out[i] = {std::move(features[i]), labels[i]};
    return out;
}

void check_stats(const AdaptationStats& stats, const LearnerConfig& config) {
    config.validate();
    if (!(stats.space() == config.space())) {
        throw UsageError("adaptation statistics were built for a different feature space");
    }
}

void check_finite(double loss) {
    if (!std::isfinite(loss)) throw LearnerError("divergence: reduce learning_rate");
}

}  // namespace

Model Model::zeros(const LearnerConfig& config, AdaptationStats stats) {
    Model m{config, std::move(stats), {}, {}, {}};
    m.weights.assign(kNumClasses * static_cast<std::size_t>(config.hash_buckets), 0.0);
    return m;
}

Prediction predict_features(const Model& model, const SparseVector& x) {
    Logits z = model.bias;
    const std::size_t stride = model.config.hash_buckets;
    for (std::size_t c = 0; c < kNumClasses; ++c) {
        const double* row = model.weights.data() + c * stride;
        double dot = 0.0;
        for (std::size_t k = 0; k < x.nnz(); ++k) dot += row[x.indices[k]] * x.values[k];
        z[c] += dot;
    }
    softmax(z);
    return Prediction{label_at(argmax_first(z)), z};
}

Prediction predict(const Model& model, std::string_view text) {
    return predict_features(model, featurize(text, model.stats));
}

std::vector<Prediction> predict_batch(const Model& model, std::span<const std::string> texts) {
    std::vector<Prediction> out(texts.size());
    const auto n = static_cast<std::ptrdiff_t>(texts.size());
#pragma omp parallel for schedule(dynamic, 32) if (n > 128 && !in_parallel_region())
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        out[static_cast<std::size_t>(i)] = predict(model, texts[static_cast<std::size_t>(i)]);
    }
    return out;
}

std::vector<Prediction> predict_batch_serial(const Model& model,
                                             std::span<const std::string> texts) {
    std::vector<Prediction> out;
    out.reserve(texts.size());
    for (const auto& t : texts) out.push_back(predict(model, t));
    return out;
}

LossGradient loss_and_gradient(const Model& model, std::span<const LabeledVector> batch) {
    if (batch.empty()) throw UsageError("loss_and_gradient: empty batch");
    const std::size_t stride = model.config.hash_buckets;
    const double lambda = model.config.l2_lambda;
    const double inv_m = 1.0 / static_cast<double>(batch.size());

    LossGradient out;
    out.weight_grad.assign(model.weights.size(), 0.0);
    double data_loss = 0.0;
    for (const auto& ex : batch) {
        const Prediction p = predict_features(model, ex.x);
        data_loss += cross_entropy(p.probs, ex.y);
        for (std::size_t c = 0; c < kNumClasses; ++c) {
            const double r = p.probs[c] - (c == index_of(ex.y) ? 1.0 : 0.0);
            out.bias_grad[c] += r * inv_m;
            double* g = out.weight_grad.data() + c * stride;
            for (std::size_t k = 0; k < ex.x.nnz(); ++k) g[ex.x.indices[k]] += r * ex.x.values[k] * inv_m;
        }
    }
    double sq = 0.0;
    for (std::size_t i = 0; i < model.weights.size(); ++i) {
        sq += model.weights[i] * model.weights[i];
        out.weight_grad[i] += lambda * model.weights[i];
    }
    for (std::size_t c = 0; c < kNumClasses; ++c) {
        sq += model.bias[c] * model.bias[c];
        out.bias_grad[c] += lambda * model.bias[c];
    }
    out.loss = data_loss * inv_m + 0.5 * lambda * sq;
    return out;
}

LossGradient loss_and_gradient(const Model& model, std::span<const corpus::Example> batch) {
    std::vector<LabeledVector> vecs;
    vecs.reserve(batch.size());
    for (const auto& ex : batch) {
        if (!ex.label) throw UsageError(fmt::format("example '{}' has no label", ex.id));
        vecs.push_back({featurize(ex.text, model.stats), *ex.label});
    }
    return loss_and_gradient(model, vecs);
}

// Parameters are stored as theta = scale * V so that the proximal shrink
// theta <- theta / (1 + lr * lambda) costs O(1) instead of O(classes x buckets).
Model fine_tune(const AdaptationStats& stats, std::span<const corpus::Dataset> train,
                const LearnerConfig& config) {
    check_stats(stats, config);
    const auto data = featurize_labeled(train, stats);
    Model model = Model::zeros(config, stats);

    const std::size_t stride = config.hash_buckets;
    const double lambda = config.l2_lambda;
    std::vector<double>& v = model.weights;
    double scale = 1.0;
    double v_sq = 0.0;  // |V|^2, maintained incrementally and refreshed each epoch
    auto& bias = model.bias;

    std::vector<std::size_t> order(data.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng rng(mix64(config.seed));
    const auto batch_size = static_cast<std::size_t>(config.batch_size);
    std::vector<Logits> residuals;
    residuals.reserve(batch_size);

    double lr = config.learning_rate;
    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        rng.shuffle(std::span<std::size_t>(order));
        v_sq = 0.0;
        for (double w : v) v_sq += w * w;

        double epoch_loss = 0.0;
        std::size_t batches = 0;
        for (std::size_t start = 0; start < order.size(); start += batch_size) {
            const std::size_t end = std::min(order.size(), start + batch_size);
            const double inv_m = 1.0 / static_cast<double>(end - start);

            // forward pass at the current parameters
            residuals.clear();
            double data_loss = 0.0;
            for (std::size_t i = start; i < end; ++i) {
                const auto& ex = data[order[i]];
                Logits z = bias;
                for (std::size_t c = 0; c < kNumClasses; ++c) {
                    const double* row = v.data() + c * stride;
                    double dot = 0.0;
                    for (std::size_t k = 0; k < ex.x.nnz(); ++k) dot += row[ex.x.indices[k]] * ex.x.values[k];
                    z[c] += scale * dot;
                }
                softmax(z);
                data_loss += cross_entropy(z, ex.y);
                z[index_of(ex.y)] -= 1.0;
                residuals.push_back(z);
            }
            double b_sq = 0.0;
            for (double b : bias) b_sq += b * b;
            const double batch_loss = data_loss * inv_m + 0.5 * lambda * (scale * scale * v_sq + b_sq);
            check_finite(batch_loss);
            epoch_loss += batch_loss;
            ++batches;

            // theta' = (theta - lr * g_data) / (1 + lr * lambda)
            const double shrink = 1.0 / (1.0 + lr * lambda);
            const double step = lr * inv_m / scale;
            for (std::size_t i = start; i < end; ++i) {
                const auto& ex = data[order[i]];
                const Logits& r = residuals[i - start];
                for (std::size_t c = 0; c < kNumClasses; ++c) {
                    double* row = v.data() + c * stride;
                    const double coef = step * r[c];
                    for (std::size_t k = 0; k < ex.x.nnz(); ++k) {
                        double& w = row[ex.x.indices[k]];
                        const double updated = w - coef * ex.x.values[k];
                        v_sq += updated * updated - w * w;
                        w = updated;
                    }
                }
            }
            for (std::size_t c = 0; c < kNumClasses; ++c) {
                double g = 0.0;
                for (std::size_t i = start; i < end; ++i) g += residuals[i - start][c];
                bias[c] = (bias[c] - lr * g * inv_m) * shrink;
            }
            scale *= shrink;
            if (scale < 1e-6) {
                for (double& w : v) w *= scale;
                scale = 1.0;
                v_sq = 0.0;
                for (double w : v) v_sq += w * w;
            }
        }
        const double mean_loss = epoch_loss / static_cast<double>(batches);
        check_finite(mean_loss);
        model.loss_history.push_back(mean_loss);
        lr *= config.lr_decay;
    }
    for (double& w : v) {
        w *= scale;
        check_finite(w);
    }
    return model;
}

Model fine_tune_reference(const AdaptationStats& stats, std::span<const corpus::Dataset> train,
                          const LearnerConfig& config) {
    check_stats(stats, config);
    const auto data = featurize_labeled(train, stats);
    Model model = Model::zeros(config, stats);
    const double lambda = config.l2_lambda;

    std::vector<std::size_t> order(data.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng rng(mix64(config.seed));
    const auto batch_size = static_cast<std::size_t>(config.batch_size);

    double lr = config.learning_rate;
    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        rng.shuffle(std::span<std::size_t>(order));
        double epoch_loss = 0.0;
        std::size_t batches = 0;
        for (std::size_t start = 0; start < order.size(); start += batch_size) {
            const std::size_t end = std::min(order.size(), start + batch_size);
            std::vector<LabeledVector> batch;
            for (std::size_t i = start; i < end; ++i) batch.push_back(data[order[i]]);
            const LossGradient lg = loss_and_gradient(model, batch);
            check_finite(lg.loss);
            epoch_loss += lg.loss;
            ++batches;
            // loss_and_gradient includes lambda * theta; the proximal step applies it implicitly
            const double shrink = 1.0 / (1.0 + lr * lambda);
            for (std::size_t i = 0; i < model.weights.size(); ++i) {
                const double g_data = lg.weight_grad[i] - lambda * model.weights[i];
                model.weights[i] = (model.weights[i] - lr * g_data) * shrink;
            }
            for (std::size_t c = 0; c < kNumClasses; ++c) {
                const double g_data = lg.bias_grad[c] - lambda * model.bias[c];
                model.bias[c] = (model.bias[c] - lr * g_data) * shrink;
            }
        }
        model.loss_history.push_back(epoch_loss / static_cast<double>(batches));
        lr *= config.lr_decay;
    }
    return model;
}

}  // namespace srcsel::textmodel
