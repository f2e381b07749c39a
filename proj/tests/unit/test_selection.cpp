#include "doctest.h"

#include <map>

#include "srcsel/errors.hpp"
#include "srcsel/random.hpp"
#include "srcsel/selection.hpp"
#include "test_support.hpp"

using namespace srcsel;
using namespace srcsel::selection;
using corpus::LanguageCode;
using testsupport::MockOracle;
using testsupport::set_key;

namespace {

std::vector<LanguageCode> langs(std::initializer_list<const char*> codes) {
    std::vector<LanguageCode> out;
    for (auto c : codes) out.emplace_back(c);
    return out;
}

std::vector<std::string> codes(const std::vector<RankedSource>& v) {
    std::vector<std::string> out;
    for (const auto& r : v) out.push_back(r.language.code());
    return out;
}

SelectionConfig one_seed(Mode mode = Mode::multilingual) {
    SelectionConfig cfg;
    cfg.seeds = {1};
    cfg.mode = mode;
    return cfg;
}

// Table lookup keyed by the source set; missing sets fail loudly.
MockOracle::Fn table(std::map<std::string, double> t) {
    return [t = std::move(t)](const std::string&, const std::vector<std::string>& s, std::uint64_t) {
        const auto it = t.find(set_key(s));
        if (it == t.end()) throw std::runtime_error("unexpected cell " + set_key(s));
        return it->second;
    };
}

// Score depends on (target, sources, seed) through a hash: arbitrary but fixed.
MockOracle::Fn random_oracle(std::uint64_t salt) {
    return [salt](const std::string& t, const std::vector<std::string>& s, std::uint64_t seed) {
        std::uint64_t h = salt * 0x9E3779B97F4A7C15ULL + seed;
        for (char c : t + "|" + set_key(s)) h = (h ^ static_cast<unsigned char>(c)) * 1099511628211ULL;
        Rng rng(h);
        return 0.3 + 0.6 * rng.uniform01();
    };
}

}  // namespace

TEST_CASE("forward: the hand-derived four-language example") {
    MockOracle oracle(table({{"t,", 0.50}, {"a,t,", 0.60}, {"b,t,", 0.52}, {"c,t,", 0.40}}));
    const SelectionTask task{LanguageCode("t"), langs({"a", "b", "c"}), Mode::multilingual};
    const auto r = forward_select(task, oracle, one_seed());
    CHECK(r.baseline_score == doctest::Approx(0.50));
    CHECK(codes(r.positive_sources) == std::vector<std::string>{"a"});
    CHECK(r.positive_sources[0].gain == doctest::Approx(0.10));
    CHECK(codes(r.ranking) == std::vector<std::string>{"a", "b", "c"});
    CHECK(oracle.calls() == 4);
    CHECK(r.to_report_row() == "t\tfwd\t0.5000\ta(+0.1000)");
}

TEST_CASE("backward: the hand-derived four-language example") {
    MockOracle oracle(table({{"a,b,c,t,", 0.70}, {"b,c,t,", 0.60}, {"a,c,t,", 0.69}, {"a,b,t,", 0.70}}));
    const SelectionTask task{LanguageCode("t"), langs({"a", "b", "c"}), Mode::multilingual};
    const auto r = backward_select(task, oracle, one_seed());
    CHECK(r.baseline_score == doctest::Approx(0.70));
    CHECK(codes(r.positive_sources) == std::vector<std::string>{"a"});
    CHECK(r.positive_sources[0].gain == doctest::Approx(0.10));
    CHECK(oracle.calls() == 4);
}

TEST_CASE("backward cells are capped, forward cells are not") {
    SelectionConfig cfg = one_seed();
    cfg.baseline_samples_per_language = 300;
    const SelectionTask task{LanguageCode("t"), langs({"a", "b"}), Mode::multilingual};
    for (const auto& c : plan_target(task, Strategy::backward, cfg)) CHECK(c.sample_cap == 300u);
    for (const auto& c : plan_target(task, Strategy::forward, cfg)) CHECK_FALSE(c.sample_cap);
}

TEST_CASE("scores equal to the baseline are not positive") {
    MockOracle flat([](auto&&...) { return 0.5; });
    const SelectionTask task{LanguageCode("t"), langs({"a", "b", "c"}), Mode::multilingual};
    CHECK(forward_select(task, flat, one_seed()).positive_sources.empty());
    CHECK(backward_select(task, flat, one_seed()).positive_sources.empty());
}

TEST_CASE("top_k keeps the highest gains") {
    MockOracle oracle(table({{"t,", 0.50}, {"a,t,", 0.60}, {"b,t,", 0.70}, {"c,t,", 0.65}}));
    const SelectionTask task{LanguageCode("t"), langs({"a", "b", "c"}), Mode::multilingual};
    auto cfg = one_seed();
    CHECK(codes(forward_select(task, oracle, cfg).positive_sources) == std::vector<std::string>{"b", "c", "a"});
    cfg.top_k = 1;
    CHECK(codes(forward_select(task, oracle, cfg).positive_sources) == std::vector<std::string>{"b"});
}

TEST_CASE("equal gains are ordered by code") {
    MockOracle oracle(table({{"t,", 0.50}, {"a,t,", 0.60}, {"b,t,", 0.60}, {"c,t,", 0.60}}));
    const SelectionTask task{LanguageCode("t"), langs({"c", "a", "b"}), Mode::multilingual};
    CHECK(codes(forward_select(task, oracle, one_seed()).positive_sources) ==
          std::vector<std::string>{"a", "b", "c"});
}

TEST_CASE("scores are averaged over seeds") {
    MockOracle oracle([](const std::string&, const std::vector<std::string>& s, std::uint64_t seed) {
        if (s.size() == 1) return 0.50;
        return seed == 1 ? 0.70 : 0.40;  // mean 0.55 > 0.525
    });
    SelectionConfig cfg;
    cfg.seeds = {1, 2};
    const SelectionTask task{LanguageCode("t"), langs({"a"}), Mode::multilingual};
    const auto r = forward_select(task, oracle, cfg);
    CHECK(r.ranking[0].score == doctest::Approx(0.55));
    CHECK(r.positive_sources.size() == 1);
}

TEST_CASE("absolute thresholds are read in F1 points") {
    MockOracle oracle(table({{"t,", 0.50}, {"a,t,", 0.54}, {"b,t,", 0.56}}));
    auto cfg = one_seed();
    cfg.threshold_kind = ThresholdKind::absolute;
    cfg.threshold = 0.05;
    const SelectionTask task{LanguageCode("t"), langs({"a", "b"}), Mode::multilingual};
    CHECK(codes(forward_select(task, oracle, cfg).positive_sources) == std::vector<std::string>{"b"});
}

TEST_CASE("all targets: N x N distinct cells per strategy per seed") {
    const auto l4 = langs({"a", "b", "c", "d"});
    for (auto strategy : {Strategy::forward, Strategy::backward}) {
        for (auto mode : {Mode::multilingual, Mode::zeroshot}) {
            MockOracle oracle(random_oracle(3));
            const auto cfg = one_seed(mode);
            const auto out = run_all_targets(l4, oracle, strategy, cfg);
            CHECK(out.size() == 4);
            CHECK(oracle.distinct_cells() == 16);
            CHECK(oracle.zeroshot_violations() == 0);
            CHECK(plan_all(l4, strategy, cfg).size() == 16);
        }
    }
    MockOracle oracle(random_oracle(3));
    SelectionConfig five;
    run_all_targets(langs({"a", "b", "c", "d", "e", "f", "g", "h", "i", "j", "k", "l"}), oracle,
                    Strategy::forward, five);
    CHECK(oracle.distinct_cells() == 144 * 5);
}

TEST_CASE("warm memo: a rerun makes no new inner calls") {
    MockOracle inner(random_oracle(5));
    MemoizingOracle memo(inner);
    const auto l4 = langs({"a", "b", "c", "d"});
    SelectionConfig cfg;
    const auto first = run_all_targets(l4, memo, Strategy::backward, cfg);
    const auto calls = inner.calls();
    CHECK(calls == 16 * 5);
    CHECK(memo.inner_calls() == calls);
    const auto second = run_all_targets(l4, memo, Strategy::backward, cfg);
    CHECK(inner.calls() == calls);
    for (const auto& [t, r] : first) CHECK(codes(second.at(t).positive_sources) == codes(r.positive_sources));
}

TEST_CASE("zero-shot forward scores single sources against all candidates") {
    // baseline {a,b,c}=0.60; 0.57 is within 5% (>= 0.57), 0.50 is not
    MockOracle oracle(table({{"a,b,c,", 0.60}, {"a,", 0.57}, {"b,", 0.50}, {"c,", 0.65}}));
    const SelectionTask task{LanguageCode("t"), langs({"a", "b", "c"}), Mode::zeroshot};
    const auto r = forward_select(task, oracle, one_seed(Mode::zeroshot));
    CHECK(codes(r.positive_sources) == std::vector<std::string>{"c", "a"});
    CHECK(codes(r.ranking) == std::vector<std::string>{"c", "a", "b"});
    CHECK(oracle.zeroshot_violations() == 0);
}

TEST_CASE("errors") {
    MockOracle oracle(random_oracle(1));
    CHECK_THROWS_AS(forward_select(SelectionTask{LanguageCode("t"), {}, Mode::multilingual}, oracle, one_seed()),
                    UsageError);
    CHECK_THROWS_AS(forward_select(SelectionTask{LanguageCode("t"), langs({"t", "a"}), Mode::multilingual},
                                   oracle, one_seed()),
                    UsageError);
    CHECK_THROWS_AS(run_all_targets(langs({"a"}), oracle, Strategy::forward, one_seed()), UsageError);
    CHECK_THROWS_AS(CellSpec::make("t", {"t", "a"}, std::nullopt, Mode::zeroshot), UsageError);
    auto cfg = one_seed();
    cfg.threshold = 0;
    CHECK_THROWS_AS(cfg.validate(), UsageError);
    cfg = one_seed();
    cfg.top_k = 0;
    CHECK_THROWS_AS(cfg.validate(), UsageError);
    cfg = one_seed();
    cfg.seeds.clear();
    CHECK_THROWS_AS(cfg.validate(), UsageError);
    CHECK_THROWS_AS(parse_mode("both"), UsageError);
    CHECK(parse_strategy("bwd") == Strategy::backward);

    MockOracle failing([](const std::string&, const std::vector<std::string>& s, std::uint64_t) -> double {
        if (s.size() == 2) throw std::runtime_error("boom");
        return 0.5;
    });
    try {
        run_all_targets(langs({"a", "b"}), failing, Strategy::forward, one_seed());
        FAIL("expected an error");
    } catch (const ExperimentError& e) {
        const std::string msg = e.what();
        CHECK(msg.find("target 'a'") != std::string::npos);
        CHECK(msg.find("a <- {a,b}") != std::string::npos);
        CHECK(msg.find("boom") != std::string::npos);
    }
}

TEST_CASE("property: matches the brute-force rules for N <= 5") {
    Rng rng(2024);
    for (int trial = 0; trial < 300; ++trial) {
        const std::size_t n = 2 + rng.below(4);
        std::vector<LanguageCode> all;
        for (std::size_t i = 0; i < n; ++i) all.emplace_back(std::string(1, static_cast<char>('a' + i)));
        auto cfg = one_seed(rng.below(2) ? Mode::zeroshot : Mode::multilingual);
        cfg.seeds = {1, 2, 3};
        cfg.threshold = 0.01 + 0.1 * rng.uniform01();
        cfg.threshold_kind = rng.below(2) ? ThresholdKind::absolute : ThresholdKind::relative;
        if (rng.below(2)) cfg.top_k = 1 + rng.below(3);
        const auto strategy = rng.below(2) ? Strategy::backward : Strategy::forward;
        const auto fn = random_oracle(rng.next());
        MockOracle oracle(fn);
        const auto out = run_all_targets(all, oracle, strategy, cfg);
        CHECK(oracle.zeroshot_violations() == 0);
        for (const auto& t : all) {
            std::vector<std::string> cands;
            for (const auto& l : all) {
                if (l != t) cands.push_back(l.code());
            }
            const auto brute = testsupport::brute_select(t.code(), cands, cfg.mode, strategy, cfg, fn);
            const auto& r = out.at(t.code());
            CHECK(r.baseline_score == doctest::Approx(brute.baseline).epsilon(1e-12));
            CHECK(codes(r.positive_sources) == brute.positives);
        }
    }
}

TEST_CASE("property: raising the threshold never enlarges a gain-based positive set") {
    Rng rng(99);
    const auto l5 = langs({"a", "b", "c", "d", "e"});
    for (int trial = 0; trial < 100; ++trial) {
        MockOracle oracle(random_oracle(rng.next()));
        MemoizingOracle memo(oracle);
        const auto strategy = rng.below(2) ? Strategy::backward : Strategy::forward;
        auto cfg = one_seed(rng.below(2) ? Mode::zeroshot : Mode::multilingual);
        // zero-shot forward reads the threshold as a tolerance below the baseline,
        // so there it can only grow
        const bool tolerance = strategy == Strategy::forward && cfg.mode == Mode::zeroshot;
        std::map<std::string, std::size_t> previous;
        for (double thr : {0.01, 0.03, 0.05, 0.1, 0.2, 0.5}) {
            cfg.threshold = thr;
            for (const auto& [t, r] : run_all_targets(l5, memo, strategy, cfg)) {
                if (previous.contains(t)) {
                    if (tolerance) {
                        CHECK(r.positive_sources.size() >= previous[t]);
                    } else {
                        CHECK(r.positive_sources.size() <= previous[t]);
                    }
                }
                previous[t] = r.positive_sources.size();
            }
        }
    }
}

TEST_CASE("determinism: identical output across runs") {
    const auto l5 = langs({"a", "b", "c", "d", "e"});
    for (auto strategy : {Strategy::forward, Strategy::backward}) {
        MockOracle o1(random_oracle(11)), o2(random_oracle(11));
        const auto r1 = run_all_targets(l5, o1, strategy, SelectionConfig{});
        const auto r2 = run_all_targets(l5, o2, strategy, SelectionConfig{});
        for (const auto& [t, r] : r1) CHECK(r.to_report_row() == r2.at(t).to_report_row());
    }
}

TEST_CASE("language families from the bundled metadata") {
    const auto meta = corpus::load_language_metadata(SRCSEL_DATA_DIR "/afrisenti_languages.tsv");
    REQUIRE(meta.size() == 14);
    const auto multi = group_by_family(meta, Mode::multilingual);
    std::vector<std::string> ha;
    for (const auto& l : multi.at("ha")) ha.push_back(l.code());
    CHECK(ha == std::vector<std::string>{"am", "dz", "ha", "ma", "or", "tg"});
    CHECK(multi.at("pcm").size() == 1);
    CHECK(multi.at("pt").size() == 1);
    CHECK(multi.at("pt")[0].code() == "pt");
    CHECK(multi.at("sw").size() == 6);
    const auto zero = group_by_family(meta, Mode::zeroshot);
    CHECK(zero.at("pcm").empty());
    CHECK(zero.at("ha").size() == 5);

    CHECK_THROWS_AS(group_by_family({LanguageCode("xx")}, Mode::multilingual), DataError);
    try {
        group_by_family({LanguageCode("ha", "Afro-Asiatic"), LanguageCode("xx")}, Mode::multilingual);
    } catch (const DataError& e) {
        CHECK(std::string(e.what()).find("'xx'") != std::string::npos);
    }
}
