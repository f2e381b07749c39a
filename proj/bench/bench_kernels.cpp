// Serial references against the OpenMP kernels. Thread count follows
// OMP_NUM_THREADS; on one core the parallel numbers show the overhead only.
#include <benchmark/benchmark.h>
#include <spdlog/spdlog.h>

#include "srcsel/corpus.hpp"
#include "srcsel/harness/config.hpp"
#include "srcsel/harness/matrix.hpp"
#include "srcsel/harness/session.hpp"
#include "srcsel/synthetic.hpp"
#include "srcsel/textmodel.hpp"
#include "test_support.hpp"

using namespace srcsel;

namespace {

struct Kernels {
    std::vector<std::string> texts;
    textmodel::AdaptationStats stats;
    textmodel::Model model;

    static const Kernels& get() {
        static const Kernels k = [] {
            synthetic::LanguagePlan plan{"bb", "Family", false, 5000, 0, 0, 0, 0};
            const auto lang = synthetic::generate_language(plan, synthetic::TweetStyle{}, 1);
            std::vector<corpus::Example> ex;
            for (const auto& r : lang.train) {
                ex.push_back({r.id, corpus::normalize_text(r.text), r.label, corpus::LanguageCode("bb")});
            }
            const std::vector<corpus::Dataset> train{
                corpus::Dataset(corpus::LanguageCode("bb"), corpus::Split::train, ex)};
            const std::vector<corpus::Dataset> unlabeled{corpus::strip_labels(train[0])};
            textmodel::LearnerConfig cfg;
            cfg.epochs = 1;
            auto stats = textmodel::pretrain(unlabeled, "bb", cfg.space());
            auto model = textmodel::fine_tune(stats, train, cfg);
            std::vector<std::string> texts;
            for (const auto& e : ex) texts.push_back(e.text);
            return Kernels{std::move(texts), std::move(stats), std::move(model)};
        }();
        return k;
    }
};

void BM_featurize_serial(benchmark::State& st) {
    const auto& k = Kernels::get();
    for (auto _ : st) benchmark::DoNotOptimize(textmodel::featurize_batch_serial(k.texts, k.stats));
    st.SetItemsProcessed(st.iterations() * static_cast<std::int64_t>(k.texts.size()));
}

void BM_featurize_omp(benchmark::State& st) {
    const auto& k = Kernels::get();
    for (auto _ : st) benchmark::DoNotOptimize(textmodel::featurize_batch(k.texts, k.stats));
    st.SetItemsProcessed(st.iterations() * static_cast<std::int64_t>(k.texts.size()));
}

void BM_predict_serial(benchmark::State& st) {
    const auto& k = Kernels::get();
    for (auto _ : st) benchmark::DoNotOptimize(textmodel::predict_batch_serial(k.model, k.texts));
    st.SetItemsProcessed(st.iterations() * static_cast<std::int64_t>(k.texts.size()));
}

void BM_predict_omp(benchmark::State& st) {
    const auto& k = Kernels::get();
    for (auto _ : st) benchmark::DoNotOptimize(textmodel::predict_batch(k.model, k.texts));
    st.SetItemsProcessed(st.iterations() * static_cast<std::int64_t>(k.texts.size()));
}

// Full matrix on the 4-language fixture; a fresh scorer per iteration so
// nothing is served from the memo.
void run_matrix_bench(benchmark::State& st, bool serial) {
    testsupport::TempDir tmp;
    const auto cfg = harness::HarnessConfig::load(synthetic::write_pipeline_fixture(tmp.path()));
    harness::Session session(cfg);
    const auto plan = session.selection_plan(selection::Strategy::forward);
    for (auto _ : st) {
        harness::Scorer scorer(cfg, session.store(), nullptr);
        if (serial) {
            benchmark::DoNotOptimize(harness::run_matrix_serial(scorer, plan, cfg.selection.seeds));
        } else {
            benchmark::DoNotOptimize(harness::run_matrix(scorer, plan, cfg.selection.seeds, static_cast<int>(st.range(0))));
        }
    }
}

void BM_matrix_serial(benchmark::State& st) { run_matrix_bench(st, true); }
void BM_matrix_omp(benchmark::State& st) { run_matrix_bench(st, false); }

}  // namespace

BENCHMARK(BM_featurize_serial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_featurize_omp)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_predict_serial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_predict_omp)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_matrix_serial)->Unit(benchmark::kMillisecond)->Iterations(1);
BENCHMARK(BM_matrix_omp)->Arg(1)->Arg(4)->Unit(benchmark::kMillisecond)->Iterations(1);

int main(int argc, char** argv) {
    spdlog::set_level(spdlog::level::err);
    benchmark::Initialize(&argc, argv);
    if (benchmark::ReportUnrecognizedArguments(argc, argv)) return 1;
    benchmark::RunSpecifiedBenchmarks();
    benchmark::Shutdown();
    return 0;
}
