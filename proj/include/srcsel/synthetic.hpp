#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "srcsel/labels.hpp"

namespace srcsel::synthetic {

/// Generated data for one language, as raw (un-normalised) tweet-like rows.
struct Row {
    std::string id;
    std::string text;
    Label label = Label::negative;
};

struct Language {
    std::string code;
    std::string family;
    std::vector<Row> train;
    std::vector<Row> dev;
    std::vector<Row> test;
    std::vector<std::string> lapt;  // unlabeled lines; empty means none
};

/// Knobs of the tweet generator.
struct TweetStyle {
    /// Cue words per class; a cue word marks its class.
    int cues_per_class = 6;
    /// Cue words per tweet.
    int cues_per_tweet = 1;
    /// Probability a cue comes from the tweet's own class.
    double cue_purity = 0.85;
    /// Noise words per tweet, drawn from the language's noise vocabulary.
    int noise_per_tweet = 8;
    int noise_vocabulary = 40;
    /// Boilerplate tokens shared by nearly every tweet of the task.
    int boilerplate_per_tweet = 3;
    int boilerplate_vocabulary = 4;
};

/// Cue vocabulary shared across languages; class c's cue list under the
/// "same" mapping. A flipped language swaps the positive and negative lists.
std::vector<std::vector<std::string>> cue_lexicon(int cues_per_class, std::uint64_t seed);

struct LanguagePlan {
    std::string code;
    std::string family;
    bool flipped = false;
    std::size_t train = 200;
    std::size_t dev = 200;
    std::size_t test = 0;
    std::size_t lapt = 0;
    /// Exact train texts copied into dev; dedup must remove these.
    std::size_t planted_overlaps = 0;
};

/// Generates one language. Text depends on (plan, style, seed) only.
Language generate_language(const LanguagePlan& plan, const TweetStyle& style, std::uint64_t seed);

/// Generic statistics corpus: text with a different character distribution
/// from the task (letters a-m only), so task n-grams look rare in it.
std::vector<std::string> generic_corpus(std::size_t lines, std::uint64_t seed);

/// Universe with a target, languages sharing its cue mapping and languages
/// with the positive/negative cues flipped.
std::vector<Language> transfer_universe(std::size_t same, std::size_t flipped, std::size_t target_train,
                                        std::size_t source_train, std::uint64_t seed);

struct FixtureOptions {
    std::uint32_t hash_buckets = 1U << 16;
    int epochs = 20;
    // Synthetic tweets are short and the data small; the library default
    // step size barely moves the weights in 20 epochs.
    double learning_rate = 4.0;
    std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5};
    std::optional<std::size_t> baseline_samples_per_language;
    std::vector<std::string> report_adaptations{"none", "tapt"};
    std::string selection_mode = "multilingual";
    std::string selection_adaptation = "none";
    std::size_t generic_lines = 0;
    std::vector<std::string> targets;  // empty: every language
    std::uint64_t seed = 7;
};

/// Writes <dir>/<code>/{train,dev,test}.tsv, lapt.txt, generic.txt and
/// <dir>/config.json (cache disabled). Returns the config path.
std::filesystem::path write_fixture(const std::filesystem::path& dir, const std::vector<Language>& languages,
                                    const FixtureOptions& options);

/// The bundled 4-language pipeline fixture: two languages sharing the
/// mapping, one flipped, one extra same-mapping language in another family;
/// planted dev overlaps, LAPT corpora and a generic base corpus.
std::vector<Language> pipeline_languages(std::uint64_t seed);
std::filesystem::path write_pipeline_fixture(const std::filesystem::path& dir, std::uint64_t seed = 7);

/// One language "tt" whose tweets carry frequent task boilerplate and noise
/// words, plus a generic base corpus that never uses the task's letters.
std::filesystem::path write_tapt_fixture(const std::filesystem::path& dir, std::uint64_t seed = 7);

/// Target "tgt" with 80 training rows, "s1" and "s2" sharing its mapping and
/// "f1".."f3" flipped, 200 training rows each. Targets only "tgt".
std::filesystem::path write_universe_fixture(const std::filesystem::path& dir, std::uint64_t seed = 7);

/// Number of planted train/dev overlaps per language in pipeline_languages.
inline constexpr std::size_t kPlantedOverlaps = 5;

}  // namespace srcsel::synthetic
