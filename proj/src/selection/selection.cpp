#include "srcsel/selection.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include <fmt/format.h>
#include <fmt/ranges.h>

#include "srcsel/errors.hpp"

namespace srcsel::selection {
namespace {

std::vector<std::string> codes_of(const std::vector<LanguageCode>& langs) {
    std::vector<std::string> out;
    out.reserve(langs.size());
    for (const auto& l : langs) out.push_back(l.code());
    return out;
}

double mean_score(ScoringOracle& oracle, const CellSpec& cell, const SelectionConfig& cfg) {
    double sum = 0.0;
    for (auto seed : cfg.seeds) {
        double s = 0.0;
        try {
            s = oracle.score(cell, seed);
        } catch (const std::exception& e) {
            throw ExperimentError(
                fmt::format("oracle failed on cell ({}) seed {}: {}", cell.describe(), seed, e.what()));
        }
        sum += s;
    }
    return sum / static_cast<double>(cfg.seeds.size());
}

// Orders by gain descending, ties by language code ascending.
void rank(std::vector<RankedSource>& v) {
    std::sort(v.begin(), v.end(), [](const RankedSource& a, const RankedSource& b) {
        if (a.gain != b.gain) return a.gain > b.gain;
        return a.language.code() < b.language.code();
    });
}

void apply_top_k(SelectionResult& r, const SelectionConfig& cfg) {
    if (cfg.top_k && r.positive_sources.size() > *cfg.top_k) r.positive_sources.resize(*cfg.top_k);
}

// Cells in plan order: baseline first, then one per candidate (candidate order).
struct TargetPlan {
    CellSpec baseline;
    std::vector<CellSpec> per_candidate;
};

TargetPlan make_plan(const SelectionTask& task, Strategy strategy, const SelectionConfig& cfg) {
    const std::string& t = task.target.code();
    const auto cands = codes_of(task.candidates);
    const bool multi = task.mode == Mode::multilingual;
    TargetPlan plan;
    if (strategy == Strategy::forward) {
        // multilingual: {t} vs {t, s}; zeroshot: all candidates vs {s}
        plan.baseline = multi ? CellSpec::make(t, {t}, std::nullopt, task.mode)
                              : CellSpec::make(t, cands, std::nullopt, task.mode);
        for (const auto& s : cands) {
            plan.per_candidate.push_back(multi ? CellSpec::make(t, {t, s}, std::nullopt, task.mode)
                                               : CellSpec::make(t, {s}, std::nullopt, task.mode));
        }
    } else {
        // full set vs full set minus s, every language capped to the same size
        const std::size_t cap = cfg.baseline_samples_per_language;
        std::vector<std::string> full = cands;
        if (multi) full.push_back(t);
        plan.baseline = CellSpec::make(t, full, cap, task.mode);
        for (const auto& s : cands) {
            std::vector<std::string> rest;
            for (const auto& f : full) {
                if (f != s) rest.push_back(f);
            }
            plan.per_candidate.push_back(CellSpec::make(t, std::move(rest), cap, task.mode));
        }
    }
    return plan;
}

void check_inputs(const SelectionTask& task, const SelectionConfig& cfg) {
    cfg.validate();
    task.validate();
    if (task.candidates.empty()) {
        throw UsageError(fmt::format("target '{}': no candidate source languages", task.target.code()));
    }
}

}  // namespace

std::string_view to_string(Mode m) noexcept {
    return m == Mode::multilingual ? "multilingual" : "zeroshot";
}
std::string_view to_string(Strategy s) noexcept {
    return s == Strategy::forward ? "forward" : "backward";
}
std::string_view short_name(Strategy s) noexcept { return s == Strategy::forward ? "fwd" : "bwd"; }

Mode parse_mode(std::string_view s) {
    if (s == "multi" || s == "multilingual") return Mode::multilingual;
    if (s == "zeroshot" || s == "zero-shot") return Mode::zeroshot;
    throw UsageError(fmt::format("unknown mode '{}' (expected multi or zeroshot)", s));
}

Strategy parse_strategy(std::string_view s) {
    if (s == "fwd" || s == "forward") return Strategy::forward;
    if (s == "bwd" || s == "backward") return Strategy::backward;
    throw UsageError(fmt::format("unknown strategy '{}' (expected fwd or bwd)", s));
}

void SelectionConfig::validate() const {
    if (!(threshold > 0.0) || !std::isfinite(threshold)) throw UsageError("threshold must be > 0");
    if (top_k && *top_k < 1) throw UsageError("top_k must be >= 1");
    if (seeds.empty()) throw UsageError("at least one seed is required");
    if (baseline_samples_per_language < 1) {
        throw UsageError("baseline_samples_per_language must be >= 1");
    }
}

void SelectionTask::validate() const {
    for (const auto& c : candidates) {
        if (c == target) {
            throw UsageError(fmt::format("target '{}' must not be among its own candidates", target.code()));
        }
    }
    std::set<std::string> seen;
    for (const auto& c : candidates) {
        if (!seen.insert(c.code()).second) {
            throw UsageError(fmt::format("candidate '{}' listed twice", c.code()));
        }
    }
}

SelectionTask SelectionTask::for_target(const LanguageCode& target,
                                        const std::vector<LanguageCode>& languages, Mode mode) {
    SelectionTask task{target, {}, mode};
    for (const auto& l : languages) {
        if (l != target) task.candidates.push_back(l);
    }
    return task;
}

CellSpec CellSpec::make(std::string target, std::vector<std::string> sources,
                        std::optional<std::size_t> cap, Mode mode) {
    std::sort(sources.begin(), sources.end());
    sources.erase(std::unique(sources.begin(), sources.end()), sources.end());
    if (mode == Mode::zeroshot && std::binary_search(sources.begin(), sources.end(), target)) {
        throw UsageError(fmt::format("zero-shot cell for '{}' must not train on the target", target));
    }
    return CellSpec{std::move(target), std::move(sources), cap, mode};
}

std::string CellSpec::describe() const {
    std::string s = fmt::format("{} <- {{{}}}", target, fmt::join(sources, ","));
    if (sample_cap) s += fmt::format(" cap={}", *sample_cap);
    s += fmt::format(" {}", to_string(mode));
    return s;
}

double MemoizingOracle::score(const CellSpec& cell, std::uint64_t seed) {
    const auto key = std::make_pair(cell, seed);
    {
        std::lock_guard lock(mu_);
        if (auto it = memo_.find(key); it != memo_.end()) return it->second;
    }
    const double s = inner_.score(cell, seed);
    std::lock_guard lock(mu_);
    ++inner_calls_;
    memo_.emplace(key, s);
    return s;
}

std::size_t MemoizingOracle::inner_calls() const {
    std::lock_guard lock(mu_);
    return inner_calls_;
}

std::string SelectionResult::to_report_row() const {
    std::string row = fmt::format("{}\t{}\t{:.4f}", target.code(), short_name(strategy), baseline_score);
    for (const auto& s : positive_sources) {
        row += fmt::format("\t{}({:+.4f})", s.language.code(), s.gain);
    }
    return row;
}

std::vector<CellSpec> plan_target(const SelectionTask& task, Strategy strategy,
                                  const SelectionConfig& cfg) {
    auto plan = make_plan(task, strategy, cfg);
    std::vector<CellSpec> out{plan.baseline};
    out.insert(out.end(), plan.per_candidate.begin(), plan.per_candidate.end());
    return out;
}

std::vector<CellSpec> plan_all(const std::vector<LanguageCode>& languages, Strategy strategy,
                               const SelectionConfig& cfg) {
    std::vector<CellSpec> out;
    for (const auto& t : languages) {
        auto cells = plan_target(SelectionTask::for_target(t, languages, cfg.mode), strategy, cfg);
        out.insert(out.end(), cells.begin(), cells.end());
    }
    return out;
}

SelectionResult forward_select(const SelectionTask& task, ScoringOracle& oracle,
                               const SelectionConfig& cfg) {
    check_inputs(task, cfg);
    const auto plan = make_plan(task, Strategy::forward, cfg);
    SelectionResult r{task.target, Strategy::forward, task.mode, mean_score(oracle, plan.baseline, cfg), {}, {}};

    const double base = r.baseline_score;
    const bool relative = cfg.threshold_kind == ThresholdKind::relative;
    for (std::size_t i = 0; i < task.candidates.size(); ++i) {
        const double s = mean_score(oracle, plan.per_candidate[i], cfg);
        r.ranking.push_back({task.candidates[i], s, s - base});
    }
    rank(r.ranking);
    for (const auto& c : r.ranking) {
        bool positive = false;
        if (task.mode == Mode::multilingual) {
            positive = relative ? c.score > base * (1.0 + cfg.threshold) : c.score > base + cfg.threshold;
        } else {
            // zero-shot: a single source within the threshold of the all-source baseline, or above it
            positive = relative ? c.score >= base * (1.0 - cfg.threshold) : c.score >= base - cfg.threshold;
        }
        if (positive) r.positive_sources.push_back(c);
    }
    apply_top_k(r, cfg);
    return r;
}

SelectionResult backward_select(const SelectionTask& task, ScoringOracle& oracle,
                                const SelectionConfig& cfg) {
    check_inputs(task, cfg);
    const auto plan = make_plan(task, Strategy::backward, cfg);
    SelectionResult r{task.target, Strategy::backward, task.mode, mean_score(oracle, plan.baseline, cfg), {}, {}};

    const double base = r.baseline_score;
    const bool relative = cfg.threshold_kind == ThresholdKind::relative;
    for (std::size_t i = 0; i < task.candidates.size(); ++i) {
        const double s = mean_score(oracle, plan.per_candidate[i], cfg);
        r.ranking.push_back({task.candidates[i], s, base - s});
    }
    rank(r.ranking);
    for (const auto& c : r.ranking) {
        const bool positive = relative ? c.score < base * (1.0 - cfg.threshold) : c.score < base - cfg.threshold;
        if (positive) r.positive_sources.push_back(c);
    }
    apply_top_k(r, cfg);
    return r;
}

std::map<std::string, SelectionResult> run_all_targets(const std::vector<LanguageCode>& languages,
                                                       ScoringOracle& oracle, Strategy strategy,
                                                       const SelectionConfig& cfg) {
    if (languages.size() < 2) throw UsageError("source selection needs at least 2 languages");
    std::map<std::string, SelectionResult> out;
    for (const auto& t : languages) {
        const auto task = SelectionTask::for_target(t, languages, cfg.mode);
        try {
            out.emplace(t.code(), strategy == Strategy::forward ? forward_select(task, oracle, cfg)
                                                                : backward_select(task, oracle, cfg));
        } catch (const ExperimentError& e) {
            throw ExperimentError(fmt::format("target '{}': {}", t.code(), e.what()));
        }
    }
    return out;
}

std::map<std::string, std::vector<LanguageCode>> group_by_family(
    const std::vector<LanguageCode>& languages, Mode mode) {
    for (const auto& l : languages) {
        if (l.top_level_family().empty()) {
            throw DataError(fmt::format("language '{}' has no family metadata", l.code()));
        }
    }
    std::map<std::string, std::vector<LanguageCode>> out;
    for (const auto& t : languages) {
        std::vector<LanguageCode> group;
        for (const auto& l : languages) {
            if (l.top_level_family() != t.top_level_family()) continue;
            if (mode == Mode::zeroshot && l == t) continue;
            group.push_back(l);
        }
        std::sort(group.begin(), group.end());
        out.emplace(t.code(), std::move(group));
    }
    return out;
}

}  // namespace srcsel::selection
