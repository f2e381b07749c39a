// srcsel: command-line front end of the source-selection harness.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <fmt/format.h>
#include <fmt/ranges.h>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "CLI11.hpp"
#include "srcsel/ensemble.hpp"
#include "srcsel/errors.hpp"
#include "srcsel/harness/session.hpp"
#include "srcsel/metrics.hpp"

namespace {

using namespace srcsel;
using harness::Session;

enum Exit { kOk = 0, kUsage = 1, kData = 2, kExperiment = 3 };

struct Globals {
    std::string config;
    std::vector<std::uint64_t> seeds;
    std::optional<int> parallelism;
    bool verbose = false;
    bool quiet = false;
};

harness::HarnessConfig load_config(const Globals& g) {
    if (g.config.empty()) throw UsageError("--config is required");
    auto cfg = harness::HarnessConfig::load(g.config);
    if (!g.seeds.empty()) cfg.selection.seeds = g.seeds;
    if (g.parallelism) cfg.parallelism = *g.parallelism;
    return cfg;
}

// Writes to the named file, or stdout for "" or "-".
template <typename F>
void emit(const std::string& path, F&& body) {
    if (path.empty() || path == "-") {
        body(std::cout);
        std::cout.flush();
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError(fmt::format("cannot write '{}'", path));
    body(out);
}

struct SpecArgs {
    std::string target;
    std::vector<std::string> sources;
    std::string mode = "multilingual";
    std::string adaptation = "none";
    std::string split = "devstar";
    std::optional<std::size_t> cap;

    void add(CLI::App* cmd, bool with_split) {
        cmd->add_option("--target", target, "Target language code")->required();
        cmd->add_option("--sources", sources, "Source language codes (default: the target)")->delimiter(',');
        cmd->add_option("--mode", mode, "multi|zeroshot");
        cmd->add_option("--adaptation", adaptation, "none|tapt|lapt|lapt+tapt");
        cmd->add_option("--cap", cap, "Per-language training sample cap");
        if (with_split) cmd->add_option("--split", split, "devstar|test");
    }

    harness::ExperimentSpec spec(const Session& s) const {
        auto src = sources.empty() ? std::vector<std::string>{target} : sources;
        return s.spec(target, src, selection::parse_mode(mode), harness::parse_adaptation(adaptation),
                      corpus::parse_split(split), cap);
    }
};

int run(int argc, char** argv) {
    CLI::App app{"Source-language selection harness for low-resource sentiment classification"};
    app.require_subcommand(1);
    Globals g;
    app.add_option("--config", g.config, "Harness config (JSON)");
    app.add_option("--seed-list", g.seeds, "Comma-separated seeds, overriding the config")->delimiter(',');
    app.add_option("--parallelism", g.parallelism, "Concurrent experiments")->check(CLI::PositiveNumber);
    app.add_flag("-v,--verbose", g.verbose, "Debug logging");
    app.add_flag("-q,--quiet", g.quiet, "Warnings and errors only");

    auto* ingest = app.add_subcommand("ingest", "Validate, normalise and dedup; write devstar files");
    std::string ingest_out = "devstar";
    ingest->add_option("--out", ingest_out, "Output directory");

    auto* train = app.add_subcommand("train", "Train one experiment and save the model");
    SpecArgs train_args;
    train_args.add(train, false);
    std::uint64_t train_seed = 1;
    std::string model_out;
    train->add_option("--seed", train_seed, "Training seed");
    train->add_option("--out", model_out, "Model file")->required();

    auto* score = app.add_subcommand("score", "Score one experiment over the seed list");
    SpecArgs score_args;
    score_args.add(score, true);

    auto* matrix = app.add_subcommand("matrix", "Run every experiment a selection strategy needs");
    std::string matrix_strategy = "fwd", matrix_mode, matrix_out;
    matrix->add_option("--strategy", matrix_strategy, "fwd|bwd");
    matrix->add_option("--mode", matrix_mode, "multi|zeroshot (default: config)");
    matrix->add_option("--out", matrix_out, "JSON-lines output (default: stdout)");

    auto* select = app.add_subcommand("select", "Forward or backward source selection");
    std::string select_strategy = "fwd", select_mode, select_out;
    std::optional<std::size_t> top_k;
    select->add_option("--strategy", select_strategy, "fwd|bwd");
    select->add_option("--mode", select_mode, "multi|zeroshot (default: config)");
    select->add_option("--top-k", top_k, "Keep at most K positive sources")->check(CLI::PositiveNumber);
    select->add_option("--out", select_out, "Report rows (default: stdout)");

    auto* ens = app.add_subcommand("ensemble", "Majority vote over prediction files");
    std::vector<std::string> ens_inputs;
    std::string ens_out, ens_gold;
    ens->add_option("inputs", ens_inputs, "Prediction TSV files")->required()->check(CLI::ExistingFile);
    ens->add_option("--out", ens_out, "Output TSV (default: stdout)");
    ens->add_option("--gold", ens_gold, "Labeled TSV to score the vote against")->check(CLI::ExistingFile);

    auto* report = app.add_subcommand("report", "Selection, system scores and ensembles as a report");
    std::string report_format = "markdown", report_out;
    report->add_option("--format", report_format, "markdown|tsv|jsonl");
    report->add_option("--out", report_out, "Output file (default: stdout)");

    auto* predict = app.add_subcommand("predict", "Label an id/text TSV with a saved model");
    std::string predict_model, predict_input, predict_out;
    bool with_probs = false;
    predict->add_option("--model", predict_model, "Model file")->required()->check(CLI::ExistingFile);
    predict->add_option("--input", predict_input, "TSV with id and text columns")->required()->check(CLI::ExistingFile);
    predict->add_option("--out", predict_out, "Output TSV (default: stdout)");
    predict->add_flag("--with-probs", with_probs, "Append class probabilities");

    auto* pipeline = app.add_subcommand("pipeline", "ingest, matrix, select, ensemble and report in one go");
    std::string pipeline_out = "srcsel-out";
    pipeline->add_option("--out", pipeline_out, "Output directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kUsage;
    }

    auto logger = spdlog::stderr_color_mt("srcsel");
    spdlog::set_default_logger(logger);
    spdlog::set_level(g.verbose ? spdlog::level::debug : g.quiet ? spdlog::level::warn : spdlog::level::info);

    if (*ens) {
        std::vector<std::vector<ensemble::PredictionRow>> files;
        for (const auto& f : ens_inputs) files.push_back(ensemble::read_predictions(f));
        const auto rows = ensemble::ensemble_files(files);
        emit(ens_out, [&](std::ostream& out) { ensemble::write_predictions(out, rows, false); });
        if (!ens_gold.empty()) {
            const auto gold = corpus::load_labeled_tsv(ens_gold, corpus::LanguageCode("gold"), corpus::Split::test);
            if (gold.size() != rows.size()) throw DataError("gold file and predictions differ in length");
            std::vector<Label> g_labels, p_labels;
            for (std::size_t i = 0; i < rows.size(); ++i) {
                if (gold.examples()[i].id != rows[i].id) {
                    throw DataError(fmt::format("gold id '{}' does not match prediction id '{}'",
                                                gold.examples()[i].id, rows[i].id));
                }
                g_labels.push_back(*gold.examples()[i].label);
                p_labels.push_back(rows[i].prediction.label);
            }
            spdlog::info("ensemble weighted F1 {:.4f}", metrics::weighted_f1(metrics::confusion(g_labels, p_labels)));
        }
        return kOk;
    }
    if (*predict) {
        const auto model = textmodel::load_model(predict_model);
        const auto rows = harness::predict_file(model, predict_input);
        emit(predict_out, [&](std::ostream& out) { ensemble::write_predictions(out, rows, with_probs); });
        return kOk;
    }

    auto cfg = load_config(g);
    if (*select && !select_mode.empty()) cfg.selection.mode = selection::parse_mode(select_mode);
    if (*matrix && !matrix_mode.empty()) cfg.selection.mode = selection::parse_mode(matrix_mode);
    if (*select && top_k) cfg.selection.top_k = top_k;
    const int par = cfg.parallelism;
    Session session(std::move(cfg));

    if (*ingest) {
        for (const auto& r : session.ingest(ingest_out)) {
            std::cout << fmt::format("{}\ttrain={}\tdropped={}\tdev={}\tdevstar={}\toverlaps_removed={}\n",
                                     r.language, r.train_rows, r.dropped_rows, r.dev_rows, r.devstar_rows,
                                     r.dev_overlaps_removed);
        }
    } else if (*train) {
        const auto spec = train_args.spec(session);
        const auto model = session.scorer().train(spec, train_seed);
        textmodel::save_model(model_out, model);
        spdlog::info("saved model for {} (seed {}) to {}", spec.canonical(), train_seed, model_out);
    } else if (*score) {
        const auto spec = score_args.spec(session);
        const auto m = session.matrix({spec}, par);
        const auto& e = m.at(spec, session.store().fingerprint());
        for (const auto& [seed, s] : e.per_seed) std::cout << fmt::format("seed {}\t{:.4f}\n", seed, s);
        std::cout << fmt::format("mean\t{:.4f}\nstddev\t{:.4f}\n", e.mean, e.stddev);
    } else if (*matrix) {
        const auto m = session.matrix(session.selection_plan(selection::parse_strategy(matrix_strategy)), par);
        emit(matrix_out, [&](std::ostream& out) { m.write_jsonl(out); });
    } else if (*select) {
        const auto results = session.select(selection::parse_strategy(select_strategy), par);
        emit(select_out, [&](std::ostream& out) {
            for (const auto& r : results) out << r.to_report_row() << '\n';
        });
    } else if (*report) {
        const auto format = harness::parse_report_format(report_format);
        const auto rep = session.report(par);
        emit(report_out, [&](std::ostream& out) { harness::write_report(out, rep, format); });
    } else if (*pipeline) {
        harness::run_pipeline(session, pipeline_out, par);
        spdlog::info("pipeline outputs written to {}", pipeline_out);
    }
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const srcsel::UsageError& e) {
        spdlog::error("{}", e.what());
        return kUsage;
    } catch (const srcsel::DataError& e) {
        spdlog::error("{}", e.what());
        return kData;
    } catch (const srcsel::ExperimentError& e) {
        spdlog::error("{}", e.what());
        return kExperiment;
    } catch (const std::exception& e) {
        spdlog::error("{}", e.what());
        return kExperiment;
    }
}
