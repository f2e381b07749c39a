#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "srcsel/ensemble.hpp"
#include "srcsel/harness/cache.hpp"
#include "srcsel/harness/config.hpp"
#include "srcsel/harness/experiment.hpp"
#include "srcsel/harness/matrix.hpp"
#include "srcsel/harness/report.hpp"
#include "srcsel/harness/scorer.hpp"
#include "srcsel/harness/store.hpp"
#include "srcsel/selection.hpp"

namespace srcsel::harness {

struct IngestRow {
    std::string language;
    std::size_t train_rows = 0;
    std::size_t dropped_rows = 0;
    std::size_t dev_rows = 0;
    std::size_t devstar_rows = 0;
    std::size_t dev_overlaps_removed = 0;
};

/// A named system of the report: one training spec per target.
struct SystemSpec {
    std::string name;
    std::vector<ExperimentSpec> specs;
};

/// Majority vote over several specs and all seeds, scored on the target.
struct EnsembleOutcome {
    std::vector<ensemble::PredictionRow> rows;
    double weighted_f1 = 0.0;
    std::vector<double> member_f1;  // one per (spec, seed), specs outer
};

/// Loaded config, corpora and cache; every CLI verb runs against one of these.
class Session {
public:
    explicit Session(HarnessConfig config);

    const HarnessConfig& config() const noexcept { return config_; }
    const CorpusStore& store() const noexcept { return *store_; }
    Scorer& scorer() noexcept { return *scorer_; }
    const std::vector<std::uint64_t>& seeds() const noexcept { return config_.selection.seeds; }

    /// Configured targets, or every language with training data.
    std::vector<std::string> targets() const;
    /// Languages with training data, ascending by code.
    std::vector<corpus::LanguageCode> pool() const;

    /// Writes <out_dir>/<code>.devstar.tsv for every language with a dev split.
    std::vector<IngestRow> ingest(const std::filesystem::path& out_dir) const;

    ExperimentSpec spec(const std::string& target, std::vector<std::string> sources, selection::Mode mode,
                        Adaptation adaptation, std::optional<corpus::Split> split = std::nullopt,
                        std::optional<std::size_t> cap = std::nullopt) const;

    selection::SelectionTask task(const std::string& target) const;
    /// Every cell the selection strategy needs, as experiment specs.
    std::vector<ExperimentSpec> selection_plan(selection::Strategy strategy) const;
    std::vector<selection::SelectionResult> select(selection::Strategy strategy, int parallelism);

    ScoreMatrix matrix(const std::vector<ExperimentSpec>& plan, int parallelism);

    /// The systems compared in the report, given selection results.
    std::vector<SystemSpec> systems(const std::vector<selection::SelectionResult>& fwd,
                                    const std::vector<selection::SelectionResult>& bwd) const;

    EnsembleOutcome ensemble(const std::vector<ExperimentSpec>& specs, int parallelism);

    /// Selection, system scoring and ensembles; everything a report needs.
    Report report(int parallelism);

private:
    HarnessConfig config_;
    std::unique_ptr<CorpusStore> store_;
    std::unique_ptr<ScoreCache> cache_;
    std::unique_ptr<Scorer> scorer_;
};

/// Sources used by a selected-transfer system: the target (multilingual mode)
/// plus the positive sources. A zero-shot target with no positive source
/// falls back to the best-ranked candidates (top_k of them, at least one).
std::vector<std::string> selected_sources(const selection::SelectionResult& r,
                                          const selection::SelectionConfig& cfg);

/// Runs ingest, selection, matrix, ensembles and the report, writing
/// devstar/, matrix.jsonl, selection.tsv and report.{md,tsv,jsonl} under out_dir.
Report run_pipeline(Session& session, const std::filesystem::path& out_dir, int parallelism);

/// Predicts every row of an `id<TAB>text[<TAB>label]` file.
std::vector<ensemble::PredictionRow> predict_file(const textmodel::Model& model, const std::filesystem::path& input);

}  // namespace srcsel::harness
