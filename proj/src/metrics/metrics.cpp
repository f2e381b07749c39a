#include "srcsel/metrics.hpp"

#include <fmt/format.h>

#include "srcsel/errors.hpp"

namespace srcsel::metrics {

std::uint64_t ConfusionMatrix::total() const noexcept {
    std::uint64_t t = 0;
    for (const auto& row : counts) {
        for (auto v : row) t += v;
    }
    return t;
}

std::uint64_t ConfusionMatrix::support(std::size_t cls) const noexcept {
    std::uint64_t s = 0;
    for (auto v : counts[cls]) s += v;
    return s;
}

ConfusionMatrix confusion(std::span<const Label> gold, std::span<const Label> pred) {
    if (gold.size() != pred.size()) {
        throw DataError(fmt::format("confusion: {} gold labels but {} predictions", gold.size(),
                                    pred.size()));
    }
    if (gold.empty()) throw DataError("confusion: no examples");
    ConfusionMatrix cm;
    for (std::size_t i = 0; i < gold.size(); ++i) ++cm.counts[index_of(gold[i])][index_of(pred[i])];
    return cm;
}

ScoreReport score(const ConfusionMatrix& cm) {
    if (cm.total() == 0) throw DataError("cannot score an empty confusion matrix");
    ScoreReport r;
    double weighted = 0.0;
    double macro = 0.0;
    std::uint64_t supported_total = 0;
    int supported_classes = 0;
    for (std::size_t c = 0; c < kNumClasses; ++c) {
        const double tp = static_cast<double>(cm.counts[c][c]);
        std::uint64_t predicted = 0;
        for (std::size_t g = 0; g < kNumClasses; ++g) predicted += cm.counts[g][c];
        const std::uint64_t support = cm.support(c);
        r.support[c] = support;
        r.precision[c] = predicted == 0 ? 0.0 : tp / static_cast<double>(predicted);
        r.recall[c] = support == 0 ? 0.0 : tp / static_cast<double>(support);
        const double pr = r.precision[c] + r.recall[c];
        r.per_class_f1[c] = pr == 0.0 ? 0.0 : 2.0 * r.precision[c] * r.recall[c] / pr;
        if (support > 0) {
            weighted += static_cast<double>(support) * r.per_class_f1[c];
            macro += r.per_class_f1[c];
            supported_total += support;
            ++supported_classes;
        }
    }
    r.weighted_f1 = weighted / static_cast<double>(supported_total);
    r.macro_f1 = macro / supported_classes;
    return r;
}

double weighted_f1(const ConfusionMatrix& cm) { return score(cm).weighted_f1; }
double macro_f1(const ConfusionMatrix& cm) { return score(cm).macro_f1; }

std::string ScoreReport::to_kv() const {
    std::string out = fmt::format("weighted_f1={:.6f}\tmacro_f1={:.6f}", weighted_f1, macro_f1);
    for (std::size_t c = 0; c < kNumClasses; ++c) {
        const auto name = to_string(label_at(c));
        out += fmt::format("\tf1_{0}={1:.6f}\tprecision_{0}={2:.6f}\trecall_{0}={3:.6f}\tsupport_{0}={4}",
                           name, per_class_f1[c], precision[c], recall[c], support[c]);
    }
    return out;
}

}  // namespace srcsel::metrics
