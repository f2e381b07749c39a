#include "srcsel/harness/scorer.hpp"

#include <algorithm>

#include <fmt/format.h>
#include <fmt/ranges.h>

#include "srcsel/errors.hpp"
#include "srcsel/metrics.hpp"

namespace srcsel::harness {
namespace {

// Languages whose task data is involved in a spec: sources plus the target.
std::vector<std::string> spec_languages(const ExperimentSpec& spec) {
    std::vector<std::string> langs = spec.sources;
    if (!std::binary_search(langs.begin(), langs.end(), spec.target)) {
        langs.insert(std::upper_bound(langs.begin(), langs.end(), spec.target), spec.target);
    }
    return langs;
}

bool uses_tapt(Adaptation a) { return a == Adaptation::tapt || a == Adaptation::lapt_tapt; }
bool uses_lapt(Adaptation a) { return a == Adaptation::lapt || a == Adaptation::lapt_tapt; }

}  // namespace

std::vector<corpus::Dataset> build_training_set(const ExperimentSpec& spec, const CorpusStore& store,
                                                std::uint64_t sample_seed) {
    spec.validate();
    std::vector<corpus::Dataset> out;
    for (const auto& code : spec.sources) {
        const auto& train = store.train(code);
        out.push_back(spec.sample_cap ? corpus::sample_dataset(train, *spec.sample_cap, sample_seed) : train);
    }
    return out;
}

std::vector<corpus::Dataset> adaptation_corpus(const ExperimentSpec& spec, const CorpusStore& store) {
    std::vector<corpus::Dataset> out(store.base_corpus().begin(), store.base_corpus().end());
    for (const auto& code : spec_languages(spec)) {
        const auto& d = store.language(code);
        if (uses_tapt(spec.adaptation)) {
            // A zero-shot target contributes no training text, only its dev text.
            const bool zeroshot_target = spec.mode == selection::Mode::zeroshot && code == spec.target;
            if (d.train && !zeroshot_target) out.push_back(corpus::strip_labels(*d.train));
            if (d.dev) out.push_back(corpus::strip_labels(*d.dev));
        }
        if (uses_lapt(spec.adaptation) && d.lapt) out.push_back(*d.lapt);
    }
    return out;
}

Scorer::Scorer(const HarnessConfig& config, const CorpusStore& store, ScoreCache* cache)
    : config_(config), store_(store), cache_(cache) {}

std::shared_ptr<const textmodel::AdaptationStats> Scorer::stats_for(const ExperimentSpec& spec) {
    const auto langs = spec_languages(spec);
    const std::string tag = spec.adaptation == Adaptation::none
                                ? std::string("none")
                                : fmt::format("{}:{}{}", to_string(spec.adaptation), fmt::join(langs, "+"),
                                              spec.mode == selection::Mode::zeroshot
                                                  ? fmt::format("/zs:{}", spec.target)
                                                  : std::string());
    {
        std::lock_guard lock(stats_mu_);
        if (auto it = stats_.find(tag); it != stats_.end()) return it->second;
    }
    const auto corpora = adaptation_corpus(spec, store_);
    bool any_text = false;
    for (const auto& c : corpora) any_text = any_text || !c.empty();
    auto stats = std::make_shared<const textmodel::AdaptationStats>(
        any_text ? textmodel::pretrain(corpora, tag, config_.learner.space())
                 : textmodel::AdaptationStats::neutral(config_.learner.space()));
    std::lock_guard lock(stats_mu_);
    return stats_.emplace(tag, std::move(stats)).first->second;
}

textmodel::Model Scorer::train(const ExperimentSpec& spec, std::uint64_t seed) {
    const auto rows = build_training_set(spec, store_, config_.sample_seed);
    std::size_t n = 0;
    for (const auto& r : rows) n += r.size();
    if (n == 0) throw ExperimentError(fmt::format("training set empty for {}", spec.canonical()));
    auto stats = stats_for(spec);
    textmodel::LearnerConfig lc = config_.learner;
    lc.seed = seed;
    ++trainings_;
    return textmodel::fine_tune(*stats, rows, lc);
}

Evaluation Scorer::evaluate(const ExperimentSpec& spec, std::uint64_t seed) {
    try {
        const auto& eval = store_.eval(spec.target, spec.eval_split);
        if (eval.empty()) {
            throw ExperimentError(fmt::format("'{}' has an empty {} split", spec.target,
                                              corpus::to_string(spec.eval_split)));
        }
        const auto model = train(spec, seed);
        Evaluation ev;
        std::vector<std::string> texts;
        for (const auto& ex : eval.examples()) {
            ev.ids.push_back(ex.id);
            ev.gold.push_back(*ex.label);
            texts.push_back(ex.text);
        }
        ev.predictions = textmodel::predict_batch(model, texts);
        std::vector<Label> pred;
        for (const auto& p : ev.predictions) pred.push_back(p.label);
        ev.weighted_f1 = metrics::weighted_f1(metrics::confusion(ev.gold, pred));
        return ev;
    } catch (const Error& e) {
        throw ExperimentError(fmt::format("{} seed {}: {}", spec.canonical(), seed, e.what()));
    }
}

std::optional<double> Scorer::remembered(const std::string& key, std::uint64_t seed) const {
    std::lock_guard lock(memo_mu_);
    if (auto it = memo_.find({key, seed}); it != memo_.end()) return it->second;
    return std::nullopt;
}

void Scorer::remember(const std::string& key, std::uint64_t seed, double score) {
    std::lock_guard lock(memo_mu_);
    memo_[{key, seed}] = score;
}

double Scorer::score(const ExperimentSpec& spec, std::uint64_t seed) {
    const std::string k = key(spec);
    if (auto hit = remembered(k, seed)) return *hit;
    if (cache_) {
        if (auto hit = cache_->get(k, seed)) {
            remember(k, seed, *hit);
            return *hit;
        }
    }
    const double s = evaluate(spec, seed).weighted_f1;
    if (cache_) cache_->put(k, seed, s);
    remember(k, seed, s);
    return s;
}

double HarnessOracle::score(const selection::CellSpec& cell, std::uint64_t seed) {
    return scorer_.score(spec_from_cell(cell, adaptation_, scorer_.config().learner.digest()), seed);
}

}  // namespace srcsel::harness
