#include "srcsel/harness/session.hpp"

#include <algorithm>
#include <fstream>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "srcsel/errors.hpp"
#include "srcsel/metrics.hpp"

namespace srcsel::harness {
namespace fs = std::filesystem;
using selection::Mode;
using selection::Strategy;

namespace {

std::vector<std::string> codes(const std::vector<corpus::LanguageCode>& langs) {
    std::vector<std::string> out;
    for (const auto& l : langs) out.push_back(l.code());
    return out;
}

std::vector<std::string> without(std::vector<std::string> v, const std::string& x) {
    v.erase(std::remove(v.begin(), v.end(), x), v.end());
    return v;
}

const selection::SelectionResult* result_for(const std::vector<selection::SelectionResult>& v,
                                             const std::string& target) {
    for (const auto& r : v) {
        if (r.target.code() == target) return &r;
    }
    return nullptr;
}

std::ofstream open_out(const fs::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError(fmt::format("cannot write '{}'", path.string()));
    return out;
}

// Evaluations of every (spec, seed), specs outer; parallel over the pairs.
std::vector<Evaluation> evaluate_all(Scorer& scorer, const std::vector<ExperimentSpec>& specs,
                                     const std::vector<std::uint64_t>& seeds, int parallelism) {
    const auto n = static_cast<std::int64_t>(specs.size() * seeds.size());
    std::vector<Evaluation> out(static_cast<std::size_t>(n));
    std::vector<std::string> errors(static_cast<std::size_t>(n));
#pragma omp parallel for schedule(dynamic, 1) num_threads(std::max(parallelism, 1))
    for (std::int64_t i = 0; i < n; ++i) {
        const auto u = static_cast<std::size_t>(i);
        try {
            out[u] = scorer.evaluate(specs[u / seeds.size()], seeds[u % seeds.size()]);
        } catch (const std::exception& e) {
            errors[u] = e.what();
        }
    }
    for (const auto& e : errors) {
        if (!e.empty()) throw ExperimentError(e);
    }
    return out;
}

}  // namespace

Session::Session(HarnessConfig config) : config_(std::move(config)) {
    config_.validate();
    store_ = std::make_unique<CorpusStore>(config_);
    if (!config_.cache_dir.empty()) cache_ = std::make_unique<ScoreCache>(config_.cache_dir);
    scorer_ = std::make_unique<Scorer>(config_, *store_, cache_.get());
}

std::vector<std::string> Session::targets() const {
    if (!config_.targets.empty()) return config_.targets;
    return codes(pool());
}

std::vector<corpus::LanguageCode> Session::pool() const {
    std::vector<corpus::LanguageCode> out;
    for (const auto& [code, d] : store_->languages()) {
        if (d.train) out.push_back(d.language);
    }
    return out;  // map order is ascending by code
}

std::vector<IngestRow> Session::ingest(const fs::path& out_dir) const {
    fs::create_directories(out_dir);
    std::vector<IngestRow> rows;
    for (const auto& [code, d] : store_->languages()) {
        IngestRow r{code};
        r.train_rows = d.train ? d.train->size() : 0;
        r.dropped_rows = d.dropped_rows;
        r.dev_rows = d.dev ? d.dev->size() : 0;
        r.devstar_rows = d.devstar ? d.devstar->size() : 0;
        r.dev_overlaps_removed = d.dev_overlaps_removed;
        if (d.devstar) {
            auto out = open_out(out_dir / (code + ".devstar.tsv"));
            corpus::write_labeled_tsv(out, *d.devstar);
        }
        rows.push_back(r);
    }
    return rows;
}

ExperimentSpec Session::spec(const std::string& target, std::vector<std::string> sources, Mode mode,
                             Adaptation adaptation, std::optional<corpus::Split> split,
                             std::optional<std::size_t> cap) const {
    return ExperimentSpec::make(target, std::move(sources), mode, adaptation, config_.learner.digest(), cap,
                                split.value_or(config_.report_split));
}

selection::SelectionTask Session::task(const std::string& target) const {
    selection::SelectionTask t{store_->language(target).language, {}, config_.selection.mode};
    for (const auto& l : pool()) {
        if (l.code() != target) t.candidates.push_back(l);
    }
    return t;
}

std::vector<ExperimentSpec> Session::selection_plan(Strategy strategy) const {
    std::vector<ExperimentSpec> plan;
    for (const auto& t : targets()) {
        for (const auto& cell : selection::plan_target(task(t), strategy, config_.selection)) {
            plan.push_back(spec_from_cell(cell, config_.selection_adaptation, config_.learner.digest()));
        }
    }
    return plan;
}

ScoreMatrix Session::matrix(const std::vector<ExperimentSpec>& plan, int parallelism) {
    spdlog::info("scoring {} experiment(s) x {} seed(s) with {} worker(s)", plan.size(), seeds().size(),
                 parallelism);
    return run_matrix(*scorer_, plan, seeds(), parallelism);
}

std::vector<selection::SelectionResult> Session::select(Strategy strategy, int parallelism) {
    // Fill the scorer's memo in parallel; selection then runs on memo hits.
    matrix(selection_plan(strategy), parallelism);
    HarnessOracle oracle(*scorer_, config_.selection_adaptation);
    std::vector<selection::SelectionResult> out;
    for (const auto& t : targets()) {
        const auto tk = task(t);
        out.push_back(strategy == Strategy::forward ? selection::forward_select(tk, oracle, config_.selection)
                                                    : selection::backward_select(tk, oracle, config_.selection));
    }
    return out;
}

std::vector<std::string> selected_sources(const selection::SelectionResult& r, const selection::SelectionConfig& cfg) {
    std::vector<std::string> out;
    for (const auto& s : r.positive_sources) out.push_back(s.language.code());
    if (r.mode == Mode::multilingual) {
        out.push_back(r.target.code());
    } else if (out.empty()) {
        const std::size_t k = std::max<std::size_t>(cfg.top_k.value_or(1), 1);
        for (std::size_t i = 0; i < std::min(k, r.ranking.size()); ++i) out.push_back(r.ranking[i].language.code());
    }
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<SystemSpec> Session::systems(const std::vector<selection::SelectionResult>& fwd,
                                         const std::vector<selection::SelectionResult>& bwd) const {
    const Mode mode = config_.selection.mode;
    const auto all = codes(pool());
    std::vector<corpus::LanguageCode> known;
    for (const auto& [code, d] : store_->languages()) known.push_back(d.language);
    const auto families = selection::group_by_family(known, mode);

    enum class Kind { multilingual, monolingual, family, forward, backward };
    std::vector<std::pair<Kind, std::string>> kinds{{Kind::multilingual, "Multilingual"}};
    if (mode == Mode::multilingual) kinds.emplace_back(Kind::monolingual, "Monolingual");
    kinds.emplace_back(Kind::family, "Language family grouping");
    kinds.emplace_back(Kind::forward, "Fwd source transfer");
    kinds.emplace_back(Kind::backward, "Bwd source transfer");

    std::vector<SystemSpec> out;
    for (const auto& [kind, name] : kinds) {
        for (const auto a : config_.report_adaptations) {
            SystemSpec sys{name + std::string(display_suffix(a)), {}};
            for (const auto& t : targets()) {
                std::vector<std::string> sources;
                switch (kind) {
                    case Kind::multilingual: sources = mode == Mode::multilingual ? all : without(all, t); break;
                    case Kind::monolingual: sources = {t}; break;
                    case Kind::family:
                        if (auto it = families.find(t); it != families.end()) {
                            for (const auto& l : it->second) {
                                if (store_->language(l.code()).train) sources.push_back(l.code());
                            }
                        }
                        break;
                    case Kind::forward:
                    case Kind::backward: {
                        const auto* r = result_for(kind == Kind::forward ? fwd : bwd, t);
                        if (r) sources = selected_sources(*r, config_.selection);
                        break;
                    }
                }
                if (sources.empty()) continue;
                sys.specs.push_back(spec(t, sources, mode, a));
            }
            if (!sys.specs.empty()) out.push_back(std::move(sys));
        }
    }
    return out;
}

EnsembleOutcome Session::ensemble(const std::vector<ExperimentSpec>& specs, int parallelism) {
    if (specs.empty()) throw UsageError("ensemble needs at least one experiment");
    const auto evals = evaluate_all(*scorer_, specs, seeds(), parallelism);
    std::vector<std::vector<textmodel::Prediction>> per_seed;
    EnsembleOutcome out;
    for (const auto& e : evals) {
        if (e.ids != evals.front().ids) throw ExperimentError("ensemble members evaluate on different examples");
        per_seed.push_back(e.predictions);
        out.member_f1.push_back(e.weighted_f1);
    }
    const auto voted = ensemble::majority_vote(ensemble::VotePool(std::move(per_seed)));
    for (std::size_t i = 0; i < voted.size(); ++i) {
        textmodel::Prediction p;
        p.label = voted[i];
        p.probs[index_of(voted[i])] = 1.0;
        out.rows.push_back({evals.front().ids[i], p, false});
    }
    out.weighted_f1 = metrics::weighted_f1(metrics::confusion(evals.front().gold, voted));
    return out;
}

Report Session::report(int parallelism) {
    Report rep;
    rep.forward = select(Strategy::forward, parallelism);
    rep.backward = select(Strategy::backward, parallelism);
    const auto sys = systems(rep.forward, rep.backward);

    std::vector<ExperimentSpec> plan;
    for (const auto& s : sys) plan.insert(plan.end(), s.specs.begin(), s.specs.end());
    rep.matrix = matrix(plan, parallelism);
    rep.languages = targets();

    for (const auto& s : sys) {
        SystemRow row{s.name, {}};
        for (const auto& spec : s.specs) {
            const auto& e = rep.matrix.at(spec, store_->fingerprint());
            row.per_language[spec.target] = Cell{e.mean, e.eval_size};
        }
        rep.per_language.push_back(row);
    }

    // Seed ensembles pooling the forward and backward selected models.
    for (const auto a : config_.report_adaptations) {
        SystemRow row{fmt::format("Ensemble (fwd+bwd{})", display_suffix(a)), {}};
        for (const auto& t : rep.languages) {
            std::vector<ExperimentSpec> members;
            for (const auto* list : {&rep.forward, &rep.backward}) {
                if (const auto* r = result_for(*list, t)) {
                    members.push_back(spec(t, selected_sources(*r, config_.selection), config_.selection.mode, a));
                }
            }
            if (members.empty()) continue;
            const auto outcome = ensemble(members, parallelism);
            row.per_language[t] = Cell{outcome.weighted_f1, store_->eval(t, config_.report_split).size()};
        }
        if (!row.per_language.empty()) rep.per_language.push_back(row);
    }
    rep.strategies = rep.per_language;
    return rep;
}

Report run_pipeline(Session& session, const fs::path& out_dir, int parallelism) {
    fs::create_directories(out_dir);
    session.ingest(out_dir / "devstar");
    Report rep = session.report(parallelism);
    {
        auto out = open_out(out_dir / "matrix.jsonl");
        rep.matrix.write_jsonl(out);
    }
    {
        auto out = open_out(out_dir / "selection.tsv");
        for (const auto* list : {&rep.forward, &rep.backward}) {
            for (const auto& r : *list) out << r.to_report_row() << '\n';
        }
    }
    for (const auto& [ext, fmt_kind] : {std::pair{"md", ReportFormat::markdown}, std::pair{"tsv", ReportFormat::tsv},
                                         std::pair{"jsonl", ReportFormat::jsonl}}) {
        auto out = open_out(out_dir / fmt::format("report.{}", ext));
        write_report(out, rep, fmt_kind);
    }
    return rep;
}

std::vector<ensemble::PredictionRow> predict_file(const textmodel::Model& model, const fs::path& input) {
    const auto ds = corpus::load_text_tsv(input, corpus::LanguageCode("input"), corpus::Split::test);
    std::vector<std::string> texts;
    for (const auto& ex : ds.examples()) texts.push_back(ex.text);
    const auto preds = textmodel::predict_batch(model, texts);
    std::vector<ensemble::PredictionRow> rows;
    for (std::size_t i = 0; i < preds.size(); ++i) rows.push_back({ds.examples()[i].id, preds[i], true});
    return rows;
}

}  // namespace srcsel::harness
