#include "doctest.h"

#include <omp.h>

#include "srcsel/corpus.hpp"
#include "srcsel/random.hpp"
#include "srcsel/synthetic.hpp"
#include "srcsel/textmodel.hpp"

using namespace srcsel;

namespace {

std::vector<std::string> tweets(std::size_t n, std::uint64_t seed) {
    synthetic::LanguagePlan plan{"pp", "Family", false, n, 0, 0, 0, 0};
    const auto lang = synthetic::generate_language(plan, synthetic::TweetStyle{}, seed);
    std::vector<std::string> raw;
    for (const auto& r : lang.train) raw.push_back(r.text);
    return raw;
}

corpus::Dataset dataset(const std::vector<std::string>& texts, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<corpus::Example> ex;
    for (std::size_t i = 0; i < texts.size(); ++i) {
        ex.push_back({"r" + std::to_string(i), texts[i], label_at(rng.below(3)), corpus::LanguageCode("pp")});
    }
    return corpus::Dataset(corpus::LanguageCode("pp"), corpus::Split::train, std::move(ex));
}

struct Threads {
    explicit Threads(int n) : saved(omp_get_max_threads()) { omp_set_num_threads(n); }
    ~Threads() { omp_set_num_threads(saved); }
    int saved;
};

}  // namespace

TEST_CASE("normalize_batch matches the serial reference at any thread count") {
    const auto raw = tweets(2000, 1);
    const auto ref = corpus::normalize_batch_serial(raw);
    for (int t : {1, 2, 8}) {
        Threads guard(t);
        CHECK(corpus::normalize_batch(raw) == ref);
    }
}

TEST_CASE("featurize_batch and predict_batch match their serial references") {
    const auto texts = corpus::normalize_batch_serial(tweets(1500, 2));
    textmodel::LearnerConfig cfg;
    cfg.hash_buckets = 1U << 12;
    cfg.epochs = 2;
    const std::vector<corpus::Dataset> corpus{corpus::strip_labels(dataset(texts, 3))};
    const auto stats = textmodel::pretrain(corpus, "pp", cfg.space());
    const std::vector<corpus::Dataset> train{dataset(texts, 4)};
    const auto model = textmodel::fine_tune(stats, train, cfg);

    const auto fref = textmodel::featurize_batch_serial(texts, stats);
    const auto pref = textmodel::predict_batch_serial(model, texts);
    for (int t : {1, 3, 8}) {
        Threads guard(t);
        CHECK(textmodel::featurize_batch(texts, stats) == fref);
        CHECK(textmodel::predict_batch(model, texts) == pref);
    }
    // nested use from an outer parallel region stays correct
    std::vector<int> ok(4, 0);
    Threads guard(4);
#pragma omp parallel for
    for (int i = 0; i < 4; ++i) ok[i] = textmodel::predict_batch(model, texts) == pref ? 1 : 0;
    CHECK(std::count(ok.begin(), ok.end(), 1) == 4);
}

TEST_CASE("batch kernels handle empty and tiny inputs") {
    textmodel::LearnerConfig cfg;
    cfg.hash_buckets = 1U << 8;
    const auto stats = textmodel::AdaptationStats::neutral(cfg.space());
    const std::vector<std::string> none;
    CHECK(textmodel::featurize_batch(none, stats).empty());
    const std::vector<std::string> one{""};
    const auto f = textmodel::featurize_batch(one, stats);
    REQUIRE(f.size() == 1);
    CHECK(f[0].nnz() == 0);
}
