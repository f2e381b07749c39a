#include "doctest.h"

#include <cmath>
#include <map>
#include <sstream>

#include "srcsel/errors.hpp"
#include "srcsel/random.hpp"
#include "srcsel/textmodel.hpp"

using namespace srcsel;
using namespace srcsel::textmodel;
using corpus::Dataset;
using corpus::Example;
using corpus::LanguageCode;
using corpus::Split;

namespace {

const LanguageCode kLang("xx");

// Textbook FNV-1a 64, written out again so features are checked against an
// independent hash.
std::uint64_t fnv(const std::string& s) {
    std::uint64_t h = 14695981039346656037ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

Dataset labeled(const std::vector<std::pair<std::string, Label>>& rows) {
    std::vector<Example> ex;
    for (std::size_t i = 0; i < rows.size(); ++i) ex.push_back({std::to_string(i), rows[i].first, rows[i].second, kLang});
    return Dataset(kLang, Split::train, ex);
}

Dataset unlabeled(const std::vector<std::string>& texts) {
    std::vector<Example> ex;
    for (std::size_t i = 0; i < texts.size(); ++i) ex.push_back({std::to_string(i), texts[i], std::nullopt, kLang});
    return Dataset(kLang, Split::train, ex);
}

LearnerConfig small_config(std::uint32_t buckets = 16, int nmax = 2) {
    LearnerConfig c;
    c.ngram_min = 1;
    c.ngram_max = nmax;
    c.hash_buckets = buckets;
    return c;
}

std::string random_text(Rng& rng, int max_len = 8) {
    static const std::string letters = "abcde ";
    std::string s;
    const auto n = 1 + rng.below(static_cast<std::uint64_t>(max_len));
    for (std::uint64_t i = 0; i < n; ++i) s += letters[rng.below(letters.size())];
    return s;
}

double gaussian(Rng& rng) {
    // Box-Muller; test-only
    const double u1 = std::max(rng.uniform01(), 1e-300), u2 = rng.uniform01();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

Model random_model(Rng& rng, const LearnerConfig& cfg) {
    std::vector<Dataset> corpus{unlabeled({random_text(rng), random_text(rng), random_text(rng)})};
    Model m = Model::zeros(cfg, pretrain(corpus, "rand", cfg.space()));
    for (auto& w : m.weights) w = 0.5 * gaussian(rng);
    for (auto& b : m.bias) b = 0.5 * gaussian(rng);
    return m;
}

std::vector<LabeledVector> random_batch(Rng& rng, const Model& m, std::size_t n) {
    std::vector<LabeledVector> out;
    for (std::size_t i = 0; i < n; ++i) out.push_back({featurize(random_text(rng), m.stats), label_at(rng.below(3))});
    return out;
}

}  // namespace

TEST_CASE("gram hash is FNV-1a 64") {
    CHECK(gram_hash("") == 0xcbf29ce484222325ULL);
    CHECK(gram_hash("a") == 0xaf63dc4c8601ec8cULL);
    CHECK(gram_hash("foobar") == 0x85944171f73967e8ULL);
}

TEST_CASE("learner config validation") {
    LearnerConfig c;
    CHECK_NOTHROW(c.validate());
    c.ngram_min = 0;
    CHECK_THROWS_AS(c.validate(), UsageError);
    c = LearnerConfig{};
    c.ngram_min = 3;
    c.ngram_max = 2;
    CHECK_THROWS_AS(c.validate(), UsageError);
    c = LearnerConfig{};
    c.ngram_max = 9;
    CHECK_THROWS_AS(c.validate(), UsageError);
    c = LearnerConfig{};
    c.hash_buckets = 1000;
    CHECK_THROWS_AS(c.validate(), UsageError);
    c = LearnerConfig{};
    c.epochs = 0;
    CHECK_THROWS_AS(c.validate(), UsageError);
    c = LearnerConfig{};
    c.learning_rate = 0;
    CHECK_THROWS_AS(c.validate(), UsageError);
    LearnerConfig a, b;
    b.seed = 99;
    CHECK(a.digest() == b.digest());
    b.l2_lambda = 0.5;
    CHECK(a.digest() != b.digest());
}

TEST_CASE("bucket counts enumerate padded n-grams") {
    const FeatureSpace space{1, 2, 1U << 20};
    // "ab" padded: unigrams a, b (bare markers skipped); bigrams ^a, ab, b$
    std::map<std::uint32_t, std::uint32_t> expect;
    for (const std::string g : {"a", "b", "\x02" "a", "ab", "b\x03"}) ++expect[static_cast<std::uint32_t>(fnv(g) & ((1U << 20) - 1))];
    const auto got = bucket_counts("ab", space);
    CHECK(got.size() == expect.size());
    for (const auto& [b, c] : got) CHECK(expect[b] == c);
    CHECK(bucket_counts("", space).empty());
}

TEST_CASE("featurize: log tf times idf, L2 normalised") {
    const FeatureSpace space{1, 2, 1U << 20};
    const auto neutral = AdaptationStats::neutral(space);
    // "aa": a x2, ^a, aa, a$ under a constant idf
    const auto v = featurize("aa", neutral);
    const std::uint32_t mask = (1U << 20) - 1;
    std::map<std::uint32_t, double> raw{{fnv("a") & mask, 1 + std::log(2.0)},
                                        {fnv("\x02" "a") & mask, 1.0},
                                        {fnv("aa") & mask, 1.0},
                                        {fnv("a\x03") & mask, 1.0}};
    double norm = 0;
    for (auto& [b, x] : raw) norm += x * x;
    norm = std::sqrt(norm);
    REQUIRE(v.nnz() == raw.size());
    for (std::size_t k = 0; k < v.nnz(); ++k) {
        CHECK(v.values[k] == doctest::Approx(raw[v.indices[k]] / norm).epsilon(1e-12));
        if (k) CHECK(v.indices[k - 1] < v.indices[k]);
    }
    CHECK(featurize("", neutral).nnz() == 0);
}

TEST_CASE("featurize weights rare buckets by idf") {
    const FeatureSpace space{1, 1, 1U << 20};
    // 3 documents; "x" in all, "y" in one
    const std::vector<Dataset> corpus{unlabeled({"x y", "x", "x"})};
    const auto stats = pretrain(corpus, "t", space);
    const auto v = featurize("xy", stats);
    const std::uint32_t mask = (1U << 20) - 1;
    const double idf_x = std::log(4.0 / 4.0) + 1, idf_y = std::log(4.0 / 2.0) + 1;
    std::map<std::uint32_t, double> got;
    for (std::size_t k = 0; k < v.nnz(); ++k) got[v.indices[k]] = v.values[k];
    const double n = std::hypot(idf_x, idf_y);
    CHECK(got[fnv("x") & mask] == doctest::Approx(idf_x / n));
    CHECK(got[fnv("y") & mask] == doctest::Approx(idf_y / n));
}

TEST_CASE("property: nonzero feature vectors have unit norm") {
    Rng rng(3);
    const auto stats = AdaptationStats::neutral(FeatureSpace{1, 5, 1U << 12});
    for (int i = 0; i < 500; ++i) {
        const auto text = random_text(rng, 40);
        const auto v = featurize(text, stats);
        double n = 0;
        for (double x : v.values) n += x * x;
        CHECK(std::sqrt(n) == doctest::Approx(1.0).epsilon(1e-9));
        CHECK(v == featurize(text, stats));
    }
}

TEST_CASE("pretrain counts documents, not occurrences") {
    const FeatureSpace space{1, 1, 1U << 20};
    const std::vector<Dataset> corpus{unlabeled({"bb b", "b"})};
    const auto stats = pretrain(corpus, "TAPT:xx", space);
    CHECK(stats.num_documents() == 2);
    CHECK(stats.df(static_cast<std::uint32_t>(fnv("b") & ((1U << 20) - 1))) == 2);
    CHECK(stats.source_tag() == "TAPT:xx");
    for (const auto& [b, c] : stats.entries()) {
        CHECK(c >= 1);
        CHECK(c <= stats.num_documents());
    }
    const std::vector<Dataset> reversed{unlabeled({"b", "bb b"})};
    CHECK(pretrain(reversed, "TAPT:xx", space).entries() == stats.entries());
}

TEST_CASE("pretrain rejects labels and empty corpora") {
    const FeatureSpace space{1, 2, 1024};
    const std::vector<Dataset> with_labels{labeled({{"x", Label::positive}})};
    CHECK_THROWS_AS(pretrain(with_labels, "t", space), UsageError);
    try {
        pretrain(std::vector<Dataset>{unlabeled({})}, "t", space);
        FAIL("expected LearnerError");
    } catch (const LearnerError& e) {
        CHECK(std::string(e.what()) == "adaptation corpus empty");
    }
}

TEST_CASE("merging statistics equals pretraining on the union") {
    const FeatureSpace space{1, 3, 1U << 10};
    const Dataset a = unlabeled({"abc", "bcd cd"}), b = unlabeled({"x abc", "dd"});
    const auto merged = merge(pretrain(std::vector<Dataset>{a}, "a", space), pretrain(std::vector<Dataset>{b}, "b", space), "ab");
    const auto joint = pretrain(std::vector<Dataset>{a, b}, "ab", space);
    CHECK(merged == joint);
}

TEST_CASE("zero model predicts uniform and the first class") {
    const auto cfg = small_config();
    const Model m = Model::zeros(cfg, AdaptationStats::neutral(cfg.space()));
    const auto p = predict(m, "anything");
    for (double x : p.probs) CHECK(x == doctest::Approx(1.0 / 3.0));
    CHECK(p.label == Label::negative);
}

TEST_CASE("property: predictions are distributions") {
    Rng rng(17);
    const auto cfg = small_config(64, 3);
    for (int i = 0; i < 200; ++i) {
        Model m = random_model(rng, cfg);
        for (auto& w : m.weights) w *= 20;  // push towards saturation
        const auto p = predict(m, random_text(rng));
        double sum = 0;
        for (double x : p.probs) {
            CHECK(x >= 0.0);
            sum += x;
        }
        CHECK(std::abs(sum - 1.0) < 1e-9);
    }
}

TEST_CASE("loss of the uniform model on a balanced batch is ln 3") {
    const auto cfg = small_config();
    Model m = Model::zeros(cfg, AdaptationStats::neutral(cfg.space()));
    const auto lg = loss_and_gradient(
        m, std::vector<LabeledVector>{{featurize("a", m.stats), Label::negative},
                                      {featurize("b", m.stats), Label::neutral},
                                      {featurize("c", m.stats), Label::positive}});
    CHECK(lg.loss == doctest::Approx(std::log(3.0)).epsilon(1e-12));
}

TEST_CASE("duplicating a batch leaves loss and gradient unchanged") {
    Rng rng(8);
    const auto cfg = small_config();
    const Model m = random_model(rng, cfg);
    auto batch = random_batch(rng, m, 5);
    const auto once = loss_and_gradient(m, batch);
    auto doubled = batch;
    doubled.insert(doubled.end(), batch.begin(), batch.end());
    const auto twice = loss_and_gradient(m, doubled);
    CHECK(twice.loss == doctest::Approx(once.loss).epsilon(1e-12));
    for (std::size_t i = 0; i < once.weight_grad.size(); ++i) {
        CHECK(twice.weight_grad[i] == doctest::Approx(once.weight_grad[i]).epsilon(1e-12));
    }
}

TEST_CASE("property: analytic gradient matches central differences") {
    Rng rng(2718);
    const double h = 1e-5;
    double worst = 0;
    for (int draw = 0; draw < 100; ++draw) {
        auto cfg = small_config(16, 2);
        cfg.l2_lambda = rng.uniform01() * 0.1;
        Model m = random_model(rng, cfg);
        const auto batch = random_batch(rng, m, 1 + rng.below(6));
        const auto lg = loss_and_gradient(m, batch);
        auto check = [&](double& param, double analytic) {
            const double saved = param;
            param = saved + h;
            const double up = loss_and_gradient(m, batch).loss;
            param = saved - h;
            const double down = loss_and_gradient(m, batch).loss;
            param = saved;
            const double numeric = (up - down) / (2 * h);
            const double rel = std::abs(analytic - numeric) / std::max(1e-6, std::abs(analytic) + std::abs(numeric));
            worst = std::max(worst, rel);
        };
        for (std::size_t i = 0; i < m.weights.size(); ++i) check(m.weights[i], lg.weight_grad[i]);
        for (std::size_t c = 0; c < kNumClasses; ++c) check(m.bias[c], lg.bias_grad[c]);
    }
    CHECK(worst < 1e-4);
}

TEST_CASE("fine-tuning fits a separable toy set with defaults") {
    std::vector<std::pair<std::string, Label>> rows;
    for (int i = 0; i < 10; ++i) {
        rows.emplace_back("good", Label::positive);
        rows.emplace_back("bad", Label::negative);
    }
    const LearnerConfig cfg;
    const std::vector<Dataset> train{labeled(rows)};
    const Model m = fine_tune(AdaptationStats::neutral(cfg.space()), train, cfg);
    CHECK(predict(m, "good").label == Label::positive);
    CHECK(predict(m, "bad").label == Label::negative);
    REQUIRE(m.loss_history.size() == static_cast<std::size_t>(cfg.epochs));
    CHECK(m.loss_history.back() <= m.loss_history.front());
    for (double w : m.weights) REQUIRE(std::isfinite(w));
}

TEST_CASE("fine-tuning is deterministic in (data, config, seed)") {
    Rng rng(4);
    std::vector<std::pair<std::string, Label>> rows;
    for (int i = 0; i < 70; ++i) rows.emplace_back(random_text(rng, 20), label_at(rng.below(3)));
    const std::vector<Dataset> train{labeled(rows)};
    auto cfg = small_config(1U << 12, 4);
    cfg.seed = 5;
    const auto stats = AdaptationStats::neutral(cfg.space());
    const Model a = fine_tune(stats, train, cfg), b = fine_tune(stats, train, cfg);
    CHECK(a.weights == b.weights);
    CHECK(a.bias == b.bias);
    cfg.seed = 6;
    CHECK(fine_tune(stats, train, cfg).weights != a.weights);
}

TEST_CASE("optimised trainer agrees with the dense reference") {
    Rng rng(12);
    std::vector<std::pair<std::string, Label>> rows;
    for (int i = 0; i < 75; ++i) rows.emplace_back(random_text(rng, 20), label_at(rng.below(3)));
    const std::vector<Dataset> train{labeled(rows)};
    auto cfg = small_config(1U << 10, 3);
    cfg.l2_lambda = 0.05;
    cfg.learning_rate = 0.5;
    cfg.seed = 3;
    const std::vector<Dataset> corpus{unlabeled({"abc", "cde ab"})};
    const auto stats = pretrain(corpus, "t", cfg.space());
    const Model fast = fine_tune(stats, train, cfg);
    const Model ref = fine_tune_reference(stats, train, cfg);
    for (std::size_t i = 0; i < fast.weights.size(); ++i) {
        REQUIRE(fast.weights[i] == doctest::Approx(ref.weights[i]).epsilon(1e-9).scale(1e-12));
    }
    for (std::size_t c = 0; c < kNumClasses; ++c) CHECK(fast.bias[c] == doctest::Approx(ref.bias[c]).epsilon(1e-9));
    for (std::size_t e = 0; e < fast.loss_history.size(); ++e) {
        CHECK(fast.loss_history[e] == doctest::Approx(ref.loss_history[e]).epsilon(1e-9));
    }
}

TEST_CASE("huge ridge penalty drives predictions to uniform") {
    std::vector<std::pair<std::string, Label>> rows;
    for (int i = 0; i < 10; ++i) {
        rows.emplace_back("good", Label::positive);
        rows.emplace_back("bad", Label::negative);
        rows.emplace_back("bad good", Label::negative);
    }
    LearnerConfig cfg;
    cfg.l2_lambda = 1e6;
    const std::vector<Dataset> train{labeled(rows)};
    const Model m = fine_tune(AdaptationStats::neutral(cfg.space()), train, cfg);
    for (const auto* t : {"good", "bad", "other"}) {
        for (double p : predict(m, t).probs) CHECK(std::abs(p - 1.0 / 3.0) <= 0.01);
    }
}

TEST_CASE("fine-tuning errors") {
    const auto cfg = small_config();
    const auto stats = AdaptationStats::neutral(cfg.space());
    CHECK_THROWS_AS(fine_tune(stats, std::vector<Dataset>{labeled({})}, cfg), LearnerError);
    CHECK_THROWS_AS(fine_tune(stats, std::vector<Dataset>{unlabeled({"x"})}, cfg), LearnerError);
    auto wild = cfg;
    // squared weights overflow after one step
    wild.learning_rate = 1e307;
    wild.l2_lambda = 0.0;
    try {
        fine_tune(stats, std::vector<Dataset>{labeled({{"a", Label::positive}, {"b", Label::negative}})}, wild);
        FAIL("expected divergence");
    } catch (const LearnerError& e) {
        CHECK(std::string(e.what()) == "divergence: reduce learning_rate");
    }
    // single-class data is allowed; the model predicts that class
    const Model m = fine_tune(stats, std::vector<Dataset>{labeled({{"a", Label::neutral}, {"b", Label::neutral}})}, cfg);
    CHECK(predict(m, "a").label == Label::neutral);
    // stats from another feature space are refused
    auto other = cfg;
    other.hash_buckets = 32;
    CHECK_THROWS_AS(fine_tune(stats, std::vector<Dataset>{labeled({{"a", Label::neutral}})}, other), UsageError);
}

TEST_CASE("model save and load round-trip") {
    Rng rng(21);
    std::vector<std::pair<std::string, Label>> rows;
    for (int i = 0; i < 40; ++i) rows.emplace_back(random_text(rng, 12), label_at(rng.below(3)));
    auto cfg = small_config(1U << 8, 3);
    const std::vector<Dataset> corpus{unlabeled({"abc", "de"})};
    const Model m = fine_tune(pretrain(corpus, "TAPT:xx", cfg.space()), std::vector<Dataset>{labeled(rows)}, cfg);
    std::stringstream buf;
    save_model(buf, m);
    const Model back = load_model(buf);
    CHECK(back.weights == m.weights);
    CHECK(back.bias == m.bias);
    CHECK(back.stats == m.stats);
    CHECK(back.config == m.config);
    CHECK(back.loss_history == m.loss_history);
    for (int i = 0; i < 50; ++i) {
        const auto t = random_text(rng, 12);
        CHECK(predict(back, t) == predict(m, t));
    }
    std::stringstream bad("not a model");
    CHECK_THROWS_AS(load_model(bad), DataError);
}
