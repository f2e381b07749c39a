#pragma once

#include <atomic>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "srcsel/harness/cache.hpp"
#include "srcsel/harness/config.hpp"
#include "srcsel/harness/experiment.hpp"
#include "srcsel/harness/store.hpp"
#include "srcsel/selection.hpp"
#include "srcsel/textmodel.hpp"

namespace srcsel::harness {

/// Training rows for a spec: the train splits of `sources` in code order,
/// rows in file order, each capped by sample_per_language when the spec has
/// a cap. In zero-shot mode the target's split is never included.
std::vector<corpus::Dataset> build_training_set(const ExperimentSpec& spec, const CorpusStore& store,
                                                std::uint64_t sample_seed);

/// Unlabeled texts the pretraining phase sees for a spec (labels stripped).
/// TAPT: train and dev texts of the sources and the target; a zero-shot
/// target contributes its dev texts only. LAPT: configured language corpora of
/// the same languages. The base corpus is always included when configured.
std::vector<corpus::Dataset> adaptation_corpus(const ExperimentSpec& spec, const CorpusStore& store);

struct Evaluation {
    double weighted_f1 = 0.0;
    std::vector<std::string> ids;
    std::vector<Label> gold;
    std::vector<textmodel::Prediction> predictions;
};

/// The scoring oracle: build training set, pretrain, fine-tune, evaluate.
/// Safe to call from many threads at once; adaptation statistics are shared
/// between specs that need the same corpora.
class Scorer {
public:
    Scorer(const HarnessConfig& config, const CorpusStore& store, ScoreCache* cache);

    const HarnessConfig& config() const noexcept { return config_; }
    const CorpusStore& store() const noexcept { return store_; }

    std::string key(const ExperimentSpec& spec) const { return spec.key(store_.fingerprint()); }

    std::shared_ptr<const textmodel::AdaptationStats> stats_for(const ExperimentSpec& spec);
    textmodel::Model train(const ExperimentSpec& spec, std::uint64_t seed);
    /// Trains and predicts; never consults the cache.
    Evaluation evaluate(const ExperimentSpec& spec, std::uint64_t seed);
    /// Weighted F1 for (spec, seed), served from the cache when present.
    double score(const ExperimentSpec& spec, std::uint64_t seed);

    /// Number of models trained so far.
    std::size_t trainings() const noexcept { return trainings_.load(); }

private:
    std::optional<double> remembered(const std::string& key, std::uint64_t seed) const;
    void remember(const std::string& key, std::uint64_t seed, double score);

    const HarnessConfig& config_;
    const CorpusStore& store_;
    ScoreCache* cache_;
    std::mutex stats_mu_;
    std::map<std::string, std::shared_ptr<const textmodel::AdaptationStats>> stats_;
    std::atomic<std::size_t> trainings_{0};
    // In-process memo; lets selection reuse scores when no cache dir is set.
    mutable std::mutex memo_mu_;
    std::map<std::pair<std::string, std::uint64_t>, double> memo_;
};

/// Adapts the Scorer to the selection module's oracle interface.
class HarnessOracle final : public selection::ScoringOracle {
public:
    HarnessOracle(Scorer& scorer, Adaptation adaptation) : scorer_(scorer), adaptation_(adaptation) {}
    double score(const selection::CellSpec& cell, std::uint64_t seed) override;

private:
    Scorer& scorer_;
    Adaptation adaptation_;
};

}  // namespace srcsel::harness
