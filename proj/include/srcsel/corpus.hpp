#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "srcsel/labels.hpp"

namespace srcsel::corpus {

/// Language identifier plus family metadata. Equality looks at the code only.
class LanguageCode {
public:
    LanguageCode() = default;
    /// Throws DataError if code is empty, has uppercase letters or whitespace.
    explicit LanguageCode(std::string code, std::string family = {},
                          std::optional<std::string> subgroup = std::nullopt);

    const std::string& code() const noexcept { return code_; }
    const std::string& family() const noexcept { return family_; }
    const std::optional<std::string>& subgroup() const noexcept { return subgroup_; }

    /// Family label up to the first '/', trimmed ("Afro-Asiatic / Semitic" -> "Afro-Asiatic").
    std::string top_level_family() const;

    friend bool operator==(const LanguageCode& a, const LanguageCode& b) noexcept {
        return a.code_ == b.code_;
    }
    friend auto operator<=>(const LanguageCode& a, const LanguageCode& b) noexcept {
        return a.code_ <=> b.code_;
    }

private:
    std::string code_;
    std::string family_;
    std::optional<std::string> subgroup_;
};

enum class Split : std::uint8_t { train, dev, devstar, test };

std::string_view to_string(Split s) noexcept;
Split parse_split(std::string_view s);

struct Example {
    std::string id;
    std::string text;
    std::optional<Label> label;
    LanguageCode language;

    friend bool operator==(const Example&, const Example&) = default;
};

/// Rows of one language and split. Immutable once constructed; the
/// constructor enforces the shared-language and unique-id invariants.
class Dataset {
public:
    Dataset(LanguageCode language, Split split, std::vector<Example> examples);

    const LanguageCode& language() const noexcept { return language_; }
    Split split() const noexcept { return split_; }
    std::span<const Example> examples() const noexcept { return examples_; }
    std::size_t size() const noexcept { return examples_.size(); }
    bool empty() const noexcept { return examples_.empty(); }
    bool labeled() const noexcept;

    friend bool operator==(const Dataset&, const Dataset&) = default;

private:
    LanguageCode language_;
    Split split_;
    std::vector<Example> examples_;
};

/// Copy of the dataset with every label removed.
Dataset strip_labels(const Dataset& ds);

// --- normalization -------------------------------------------------------

/// Tweet normalization. In order: URLs -> "HTTPURL", @-mentions -> "USER",
/// runs of one non-whitespace character capped at 3, runs of one ASCII
/// punctuation character capped at 1, whitespace runs -> single space, trim.
/// The pass is repeated until it reaches a fixed point, so the function is
/// idempotent even when a collapse creates a new URL or mention.
std::string normalize_text(std::string_view raw);

/// Single application of the five rules; exposed for tests.
std::string normalize_once(std::string_view raw);

/// normalize_text over a batch, OpenMP-parallel.
std::vector<std::string> normalize_batch(std::span<const std::string> raw);
/// Serial reference for normalize_batch.
std::vector<std::string> normalize_batch_serial(std::span<const std::string> raw);

// --- ingestion -------------------------------------------------------------

struct LoadStats {
    std::size_t rows = 0;
    std::size_t dropped_empty = 0;
};

/// Reads `id<TAB>text<TAB>label` rows after a header line. Extra trailing
/// columns are ignored, blank lines skipped, CRLF accepted.
Dataset load_labeled_tsv(const std::filesystem::path& path, const LanguageCode& language,
                         Split split, LoadStats* stats = nullptr);
Dataset parse_labeled_tsv(std::istream& in, const LanguageCode& language, Split split,
                          LoadStats* stats = nullptr);

/// Like load_labeled_tsv, but the label column is optional and rows that
/// normalize to nothing are kept. Used for prediction inputs.
Dataset load_text_tsv(const std::filesystem::path& path, const LanguageCode& language, Split split);
Dataset parse_text_tsv(std::istream& in, const LanguageCode& language, Split split);

/// Writes the header plus one row per example. Unlabeled rows get an empty label column.
void write_labeled_tsv(std::ostream& out, const Dataset& ds);
void write_labeled_tsv(const std::filesystem::path& path, const Dataset& ds);

/// One unlabeled example per non-blank line; ids are "<code>:<line>".
Dataset load_unlabeled_text(const std::filesystem::path& path, const LanguageCode& language);
Dataset parse_unlabeled_text(std::string_view content, const LanguageCode& language);

/// Language metadata TSV: header, then `code<TAB>family[<TAB>subgroup]`.
std::vector<LanguageCode> load_language_metadata(const std::filesystem::path& path);
std::vector<LanguageCode> parse_language_metadata(std::istream& in);

// --- evaluation split hygiene --------------------------------------------

struct DedupResult {
    Dataset devstar;
    std::size_t removed = 0;
};

/// Drops every dev example whose text equals some train text; keeps order.
DedupResult dedup_dev(const Dataset& train, const Dataset& dev);

// --- sampling -------------------------------------------------------------

/// For each dataset, min(k, size) rows drawn uniformly without replacement,
/// returned in their original order. The generator is seeded from
/// (seed, language code), so output does not depend on list order.
std::vector<Dataset> sample_per_language(std::span<const Dataset> datasets, std::int64_t k,
                                         std::uint64_t seed);
Dataset sample_dataset(const Dataset& ds, std::size_t k, std::uint64_t seed);

}  // namespace srcsel::corpus
