#include "srcsel/synthetic.hpp"

#include <fstream>
#include <set>
#include <unordered_set>

#include <fmt/format.h>

#include "json.hpp"
#include "srcsel/corpus.hpp"
#include "srcsel/errors.hpp"
#include "srcsel/hash.hpp"
#include "srcsel/random.hpp"

namespace srcsel::synthetic {
namespace fs = std::filesystem;

namespace {

constexpr std::string_view kTaskLetters = "nopqrstuvwxyz";
constexpr std::string_view kGenericLetters = "abcdefghijklm";

std::string random_word(Rng& rng, std::string_view letters, int min_len, int max_len) {
    const auto len = min_len + static_cast<int>(rng.below(static_cast<std::uint64_t>(max_len - min_len + 1)));
    std::string w;
    for (int i = 0; i < len; ++i) w += letters[rng.below(letters.size())];
    return w;
}

// `count` distinct words not already in `taken`.
std::vector<std::string> vocabulary(Rng& rng, std::size_t count, std::string_view letters, int min_len,
                                    int max_len, std::set<std::string>& taken) {
    std::vector<std::string> out;
    while (out.size() < count) {
        auto w = random_word(rng, letters, min_len, max_len);
        if (taken.insert(w).second) out.push_back(std::move(w));
    }
    return out;
}

std::uint64_t lang_seed(std::uint64_t seed, std::string_view code) { return hash_combine(seed, fnv1a64(code)); }

class TweetMaker {
public:
    TweetMaker(const LanguagePlan& plan, const TweetStyle& style, std::uint64_t seed)
        : style_(style), rng_(lang_seed(seed, plan.code)), cues_(cue_lexicon(style.cues_per_class, seed)) {
        if (plan.flipped) std::swap(cues_[index_of(Label::negative)], cues_[index_of(Label::positive)]);
        for (const auto& c : cues_) taken_.insert(c.begin(), c.end());
        // Boilerplate is shared by every language of one seed.
        Rng shared(hash_combine(seed, 0xb0b0));
        boilerplate_ = vocabulary(shared, static_cast<std::size_t>(style.boilerplate_vocabulary), kTaskLetters, 2, 3, taken_);
        noise_ = vocabulary(rng_, static_cast<std::size_t>(style.noise_vocabulary), kTaskLetters, 3, 6, taken_);
    }

    Row tweet(std::string id) {
        const auto label = label_at(rng_.below(kNumClasses));
        std::vector<std::string> words;
        for (int i = 0; i < style_.boilerplate_per_tweet; ++i) words.push_back(boilerplate_[rng_.below(boilerplate_.size())]);
        for (int i = 0; i < style_.cues_per_tweet; ++i) {
            const auto cls = rng_.uniform01() < style_.cue_purity ? index_of(label) : rng_.below(kNumClasses);
            const auto& list = cues_[cls];
            words.push_back(list[rng_.below(list.size())]);
        }
        for (int i = 0; i < style_.noise_per_tweet; ++i) words.push_back(noise_[rng_.below(noise_.size())]);
        rng_.shuffle(std::span<std::string>(words));
        return Row{std::move(id), decorate(words), label};
    }

    std::string plain_line() {
        std::string line;
        const int n = 6 + static_cast<int>(rng_.below(6));
        for (int i = 0; i < n; ++i) {
            if (i) line += ' ';
            line += noise_[rng_.below(noise_.size())];
        }
        return line;
    }

private:
    // Twitter surface noise the normaliser removes: mentions, links,
    // elongations, punctuation runs, stray whitespace.
    std::string decorate(const std::vector<std::string>& words) {
        std::string out;
        if (rng_.uniform01() < 0.5) out += fmt::format("@user{} ", rng_.below(1000));
        for (std::size_t i = 0; i < words.size(); ++i) {
            if (i) out += rng_.uniform01() < 0.1 ? "   " : " ";
            std::string w = words[i];
            if (rng_.uniform01() < 0.08) w += std::string(4 + rng_.below(4), w.back());
            out += w;
            if (rng_.uniform01() < 0.08) out += "!!!";
        }
        if (rng_.uniform01() < 0.4) out += fmt::format(" https://t.co/{}", random_word(rng_, kGenericLetters, 6, 6));
        return out;
    }

    TweetStyle style_;
    Rng rng_;
    std::vector<std::vector<std::string>> cues_;
    std::set<std::string> taken_;
    std::vector<std::string> boilerplate_;
    std::vector<std::string> noise_;
};

void write_rows(const fs::path& path, const std::vector<Row>& rows) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError(fmt::format("cannot write '{}'", path.string()));
    out << "id\ttext\tlabel\n";
    for (const auto& r : rows) out << r.id << '\t' << r.text << '\t' << to_string(r.label) << '\n';
}

void write_lines(const fs::path& path, const std::vector<std::string>& lines) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError(fmt::format("cannot write '{}'", path.string()));
    for (const auto& l : lines) out << l << '\n';
}

}  // namespace

std::vector<std::vector<std::string>> cue_lexicon(int cues_per_class, std::uint64_t seed) {
    Rng rng(hash_combine(seed, 0xc0e5));
    std::set<std::string> taken;
    std::vector<std::vector<std::string>> out;
    for (std::size_t c = 0; c < kNumClasses; ++c) {
        out.push_back(vocabulary(rng, static_cast<std::size_t>(cues_per_class), kTaskLetters, 5, 7, taken));
    }
    return out;
}

Language generate_language(const LanguagePlan& plan, const TweetStyle& style, std::uint64_t seed) {
    TweetMaker maker(plan, style, seed);
    Language lang{plan.code, plan.family, {}, {}, {}, {}};
    // Normalised texts seen so far; only planted rows may repeat one.
    std::unordered_set<std::string> seen;
    auto fresh = [&](const std::string& prefix, std::size_t i) {
        for (;;) {
            auto row = maker.tweet(fmt::format("{}-{}-{}", plan.code, prefix, i));
            if (seen.insert(corpus::normalize_text(row.text)).second) return row;
        }
    };
    for (std::size_t i = 0; i < plan.train; ++i) lang.train.push_back(fresh("train", i));
    for (std::size_t i = 0; i < plan.dev; ++i) {
        if (i < plan.planted_overlaps && i < lang.train.size()) {
            // Spread planted copies through the train split.
            const auto& src = lang.train[(i * 7919) % lang.train.size()];
            lang.dev.push_back(Row{fmt::format("{}-dev-{}", plan.code, i), src.text, src.label});
        } else {
            lang.dev.push_back(fresh("dev", i));
        }
    }
    for (std::size_t i = 0; i < plan.test; ++i) lang.test.push_back(fresh("test", i));
    for (std::size_t i = 0; i < plan.lapt; ++i) lang.lapt.push_back(maker.plain_line());
    return lang;
}

std::vector<std::string> generic_corpus(std::size_t lines, std::uint64_t seed) {
    Rng rng(hash_combine(seed, 0x6e6e));
    std::set<std::string> taken;
    const auto vocab = vocabulary(rng, 400, kGenericLetters, 2, 8, taken);
    std::vector<std::string> out;
    for (std::size_t i = 0; i < lines; ++i) {
        std::string line;
        const int n = 8 + static_cast<int>(rng.below(8));
        for (int w = 0; w < n; ++w) {
            if (w) line += ' ';
            line += vocab[rng.below(vocab.size())];
        }
        out.push_back(std::move(line));
    }
    return out;
}

std::vector<Language> transfer_universe(std::size_t same, std::size_t flipped, std::size_t target_train,
                                        std::size_t source_train, std::uint64_t seed) {
    TweetStyle style;
    std::vector<Language> out;
    out.push_back(generate_language({"tgt", "Family A", false, target_train, 200, 0, 0, 0}, style, seed));
    for (std::size_t i = 0; i < same; ++i) {
        out.push_back(generate_language({fmt::format("s{}", i + 1), "Family A", false, source_train, 100, 0, 0, 0},
                                        style, seed));
    }
    for (std::size_t i = 0; i < flipped; ++i) {
        out.push_back(generate_language({fmt::format("f{}", i + 1), "Family B", true, source_train, 100, 0, 0, 0},
                                        style, seed));
    }
    return out;
}

fs::path write_fixture(const fs::path& dir, const std::vector<Language>& languages, const FixtureOptions& options) {
    using nlohmann::json;
    fs::create_directories(dir);
    json langs = json::array();
    for (const auto& l : languages) {
        fs::create_directories(dir / l.code);
        json e{{"code", l.code}, {"family", l.family}};
        if (!l.train.empty()) {
            write_rows(dir / l.code / "train.tsv", l.train);
            e["train"] = l.code + "/train.tsv";
        }
        if (!l.dev.empty()) {
            write_rows(dir / l.code / "dev.tsv", l.dev);
            e["dev"] = l.code + "/dev.tsv";
        }
        if (!l.test.empty()) {
            write_rows(dir / l.code / "test.tsv", l.test);
            e["test"] = l.code + "/test.tsv";
        }
        if (!l.lapt.empty()) {
            write_lines(dir / l.code / "lapt.txt", l.lapt);
            e["lapt"] = l.code + "/lapt.txt";
        }
        langs.push_back(std::move(e));
    }
    json doc;
    doc["languages"] = std::move(langs);
    if (options.generic_lines > 0) {
        write_lines(dir / "generic.txt", generic_corpus(options.generic_lines, options.seed));
        doc["base_corpus"] = "generic.txt";
    }
    doc["learner"] = {{"hash_buckets", options.hash_buckets}, {"epochs", options.epochs},
                      {"learning_rate", options.learning_rate}};
    json sel{{"seeds", options.seeds}, {"mode", options.selection_mode}, {"adaptation", options.selection_adaptation}};
    if (options.baseline_samples_per_language) sel["baseline_samples_per_language"] = *options.baseline_samples_per_language;
    doc["selection"] = std::move(sel);
    doc["report"] = {{"adaptations", options.report_adaptations}};
    if (!options.targets.empty()) doc["selection"]["targets"] = options.targets;
    doc["cache_dir"] = nullptr;
    const auto path = dir / "config.json";
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError(fmt::format("cannot write '{}'", path.string()));
    out << doc.dump(2) << '\n';
    return path;
}

std::vector<Language> pipeline_languages(std::uint64_t seed) {
    TweetStyle style;
    return {
        generate_language({"xa", "Family A / North", false, 150, 60, 60, 120, kPlantedOverlaps}, style, seed),
        generate_language({"xb", "Family A / South", false, 150, 60, 60, 120, kPlantedOverlaps}, style, seed),
        generate_language({"xc", "Family B", true, 150, 60, 60, 120, kPlantedOverlaps}, style, seed),
        generate_language({"xd", "Family C", false, 150, 60, 60, 120, kPlantedOverlaps}, style, seed),
    };
}

fs::path write_pipeline_fixture(const fs::path& dir, std::uint64_t seed) {
    FixtureOptions opt;
    opt.generic_lines = 300;
    opt.seed = seed;
    opt.baseline_samples_per_language = 100;
    return write_fixture(dir, pipeline_languages(seed), opt);
}

fs::path write_tapt_fixture(const fs::path& dir, std::uint64_t seed) {
    FixtureOptions opt;
    opt.generic_lines = 300;
    opt.seed = seed;
    return write_fixture(dir, {generate_language({"tt", "Family A", false, 200, 300, 0, 0, 0}, TweetStyle{}, seed)},
                         opt);
}

fs::path write_universe_fixture(const fs::path& dir, std::uint64_t seed) {
    FixtureOptions opt;
    opt.seed = seed;
    opt.report_adaptations = {"none"};
    opt.targets = {"tgt"};
    return write_fixture(dir, transfer_universe(2, 3, 80, 200, seed), opt);
}

}  // namespace srcsel::synthetic
