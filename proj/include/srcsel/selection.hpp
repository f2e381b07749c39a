#pragma once

#include <cstdint>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "srcsel/corpus.hpp"

namespace srcsel::selection {

using corpus::LanguageCode;

/// multilingual: the target's own training data is part of every set.
/// zeroshot: the target never contributes training data.
enum class Mode : std::uint8_t { multilingual, zeroshot };
enum class Strategy : std::uint8_t { forward, backward };
/// How the gain threshold is read: a fraction of the baseline or F1 points.
enum class ThresholdKind : std::uint8_t { relative, absolute };

std::string_view to_string(Mode m) noexcept;
std::string_view to_string(Strategy s) noexcept;
std::string_view short_name(Strategy s) noexcept;  // "fwd" / "bwd"
Mode parse_mode(std::string_view s);               // multi|multilingual|zeroshot
Strategy parse_strategy(std::string_view s);       // fwd|forward|bwd|backward

struct SelectionConfig {
    double threshold = 0.05;
    ThresholdKind threshold_kind = ThresholdKind::relative;
    std::size_t baseline_samples_per_language = 500;
    std::optional<std::size_t> top_k;
    std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5};
    Mode mode = Mode::multilingual;

    void validate() const;
};

struct SelectionTask {
    LanguageCode target;
    std::vector<LanguageCode> candidates;
    Mode mode = Mode::multilingual;

    /// Total number of languages in play.
    std::size_t total_languages() const noexcept {
        return mode == Mode::multilingual ? candidates.size() + 1 : candidates.size();
    }
    void validate() const;

    /// Task whose candidates are every other language of the list.
    static SelectionTask for_target(const LanguageCode& target,
                                    const std::vector<LanguageCode>& languages, Mode mode);
};

/// One experiment of the selection plan, independent of the seed: train on
/// the union of `sources` (optionally capped per language), evaluate on the
/// target. `sources` holds language codes in ascending order.
struct CellSpec {
    std::string target;
    std::vector<std::string> sources;
    std::optional<std::size_t> sample_cap;
    Mode mode = Mode::multilingual;

    static CellSpec make(std::string target, std::vector<std::string> sources,
                         std::optional<std::size_t> cap, Mode mode);
    /// Human-readable identity, e.g. "ha <- {dz,ha} cap=500 multilingual".
    std::string describe() const;
    friend auto operator<=>(const CellSpec&, const CellSpec&) = default;
    friend bool operator==(const CellSpec&, const CellSpec&) = default;
};

/// Scores one (cell, seed) by weighted F1 on the target. Implementations must
/// tolerate concurrent calls for distinct cells and be deterministic per seed.
class ScoringOracle {
public:
    virtual ~ScoringOracle() = default;
    virtual double score(const CellSpec& cell, std::uint64_t seed) = 0;
};

/// Thread-safe memo in front of another oracle.
class MemoizingOracle final : public ScoringOracle {
public:
    explicit MemoizingOracle(ScoringOracle& inner) : inner_(inner) {}
    double score(const CellSpec& cell, std::uint64_t seed) override;
    std::size_t inner_calls() const;

private:
    ScoringOracle& inner_;
    mutable std::mutex mu_;
    std::map<std::pair<CellSpec, std::uint64_t>, double> memo_;
    std::size_t inner_calls_ = 0;
};

struct RankedSource {
    LanguageCode language;
    double score = 0.0;  // mean over seeds of the candidate's cell
    double gain = 0.0;   // forward: score - baseline; backward: baseline - score
};

struct SelectionResult {
    LanguageCode target;
    Strategy strategy = Strategy::forward;
    Mode mode = Mode::multilingual;
    double baseline_score = 0.0;
    /// Sources passing the threshold, best first, truncated to top_k.
    std::vector<RankedSource> positive_sources;
    /// Every candidate, best first.
    std::vector<RankedSource> ranking;

    /// `target<TAB>strategy<TAB>baseline<TAB>src(gain)...`
    std::string to_report_row() const;
};

/// Cells needed for one target, baseline first.
std::vector<CellSpec> plan_target(const SelectionTask& task, Strategy strategy,
                                  const SelectionConfig& cfg);
/// Cells for every language as target: N x N per strategy.
std::vector<CellSpec> plan_all(const std::vector<LanguageCode>& languages, Strategy strategy,
                               const SelectionConfig& cfg);

SelectionResult forward_select(const SelectionTask& task, ScoringOracle& oracle,
                               const SelectionConfig& cfg);
SelectionResult backward_select(const SelectionTask& task, ScoringOracle& oracle,
                                const SelectionConfig& cfg);

std::map<std::string, SelectionResult> run_all_targets(const std::vector<LanguageCode>& languages,
                                                       ScoringOracle& oracle, Strategy strategy,
                                                       const SelectionConfig& cfg);

/// Target -> languages sharing its top-level family (itself included in
/// multilingual mode), sorted by code.
std::map<std::string, std::vector<LanguageCode>> group_by_family(
    const std::vector<LanguageCode>& languages, Mode mode);

}  // namespace srcsel::selection
