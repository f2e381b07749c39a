#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "srcsel/corpus.hpp"
#include "srcsel/errors.hpp"
#include "srcsel/utf8.hpp"

namespace srcsel::corpus {
namespace {

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string_view> split_tabs(std::string_view line) {
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    while (true) {
        const auto tab = line.find('\t', start);
        if (tab == std::string_view::npos) {
            fields.push_back(line.substr(start));
            return fields;
        }
        fields.push_back(line.substr(start, tab - start));
        start = tab + 1;
    }
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError(fmt::format("cannot open '{}'", path.string()));
    std::ostringstream ss;
    ss << in.rdbuf();
    return std::move(ss).str();
}

void require_utf8(std::string_view content, std::string_view what) {
    if (auto bad = utf8::first_invalid(content)) {
        throw DataError(fmt::format("{}: invalid UTF-8 at byte offset {}", what, *bad));
    }
}

// Splits on LF and drops a trailing CR from each line.
std::vector<std::string_view> split_lines(std::string_view content) {
    std::vector<std::string_view> lines;
    std::size_t start = 0;
    while (start < content.size()) {
        auto nl = content.find('\n', start);
        if (nl == std::string_view::npos) nl = content.size();
        auto line = content.substr(start, nl - start);
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        lines.push_back(line);
        start = nl + 1;
    }
    return lines;
}

// text_only: labels optional, two fields suffice, empty texts are kept so
// every input id gets a prediction.
Dataset parse_labeled_content(std::string_view content, const LanguageCode& language, Split split,
                              LoadStats* stats, std::string_view origin, bool text_only = false) {
    require_utf8(content, origin);
    const auto lines = split_lines(content);
    if (lines.empty()) throw DataError(fmt::format("{}: missing header line", origin));

    std::vector<Example> examples;
    std::unordered_set<std::string> ids;
    std::size_t dropped = 0;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        const std::size_t lineno = i + 1;
        if (trim(lines[i]).empty()) continue;
        const auto fields = split_tabs(lines[i]);
        const std::size_t min_fields = text_only ? 2 : 3;
        if (fields.size() < min_fields) {
            throw DataError(fmt::format(
                "{}: malformed row at line {}: expected at least {} tab-separated fields, got {}",
                origin, lineno, min_fields, fields.size()));
        }
        const std::string label_text = fields.size() > 2 ? trim(fields[2]) : std::string();
        std::optional<Label> label;
        if (!text_only || !label_text.empty()) {
            label = parse_label(label_text);
            if (!label) {
                throw DataError(fmt::format("unknown label '{}' at line {}", label_text, lineno));
            }
        }
        std::string id(fields[0]);
        if (!ids.insert(id).second) {
            throw DataError(fmt::format("{}: duplicate id '{}' at line {}", origin, id, lineno));
        }
        std::string text = normalize_text(fields[1]);
        if (text.empty() && !text_only) {
            ++dropped;
            continue;
        }
        examples.push_back(Example{std::move(id), std::move(text), label, language});
    }
    if (dropped > 0) {
        spdlog::warn("{}: dropped {} row(s) empty after normalization", origin, dropped);
    }
    if (stats) *stats = LoadStats{examples.size(), dropped};
    return Dataset(language, split, std::move(examples));
}

}  // namespace

LanguageCode::LanguageCode(std::string code, std::string family,
                           std::optional<std::string> subgroup)
    : code_(std::move(code)), family_(std::move(family)), subgroup_(std::move(subgroup)) {
    if (code_.empty()) throw DataError("language code must be non-empty");
    for (unsigned char c : code_) {
        if (std::isspace(c) || std::isupper(c)) {
            throw DataError(fmt::format("language code '{}' must be lowercase without whitespace",
                                        code_));
        }
    }
}

std::string LanguageCode::top_level_family() const {
    return trim(std::string_view(family_).substr(0, family_.find('/')));
}

std::string_view to_string(Split s) noexcept {
    switch (s) {
        case Split::train: return "train";
        case Split::dev: return "dev";
        case Split::devstar: return "devstar";
        case Split::test: return "test";
    }
    return "?";
}

Split parse_split(std::string_view s) {
    for (Split sp : {Split::train, Split::dev, Split::devstar, Split::test}) {
        if (s == to_string(sp)) return sp;
    }
    throw UsageError(fmt::format("unknown split '{}'", s));
}

Dataset::Dataset(LanguageCode language, Split split, std::vector<Example> examples)
    : language_(std::move(language)), split_(split), examples_(std::move(examples)) {
    std::unordered_set<std::string_view> ids;
    ids.reserve(examples_.size());
    for (const auto& ex : examples_) {
        if (ex.language != language_) {
            throw DataError(fmt::format("example '{}' has language '{}' in a '{}' dataset", ex.id,
                                        ex.language.code(), language_.code()));
        }
        if (!ids.insert(ex.id).second) {
            throw DataError(fmt::format("duplicate id '{}' in {}/{}", ex.id, language_.code(),
                                        to_string(split_)));
        }
    }
}

bool Dataset::labeled() const noexcept {
    return std::all_of(examples_.begin(), examples_.end(),
                       [](const Example& e) { return e.label.has_value(); });
}

Dataset strip_labels(const Dataset& ds) {
    std::vector<Example> rows(ds.examples().begin(), ds.examples().end());
    for (auto& r : rows) r.label.reset();
    return Dataset(ds.language(), ds.split(), std::move(rows));
}

Dataset load_labeled_tsv(const std::filesystem::path& path, const LanguageCode& language,
                         Split split, LoadStats* stats) {
    const std::string content = read_file(path);
    return parse_labeled_content(content, language, split, stats, path.string());
}

Dataset parse_labeled_tsv(std::istream& in, const LanguageCode& language, Split split,
                          LoadStats* stats) {
    std::ostringstream ss;
    ss << in.rdbuf();
    const std::string content = std::move(ss).str();
    return parse_labeled_content(content, language, split, stats, "<stream>");
}

Dataset load_text_tsv(const std::filesystem::path& path, const LanguageCode& language, Split split) {
    const std::string content = read_file(path);
    return parse_labeled_content(content, language, split, nullptr, path.string(), true);
}

Dataset parse_text_tsv(std::istream& in, const LanguageCode& language, Split split) {
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_labeled_content(std::move(ss).str(), language, split, nullptr, "<stream>", true);
}

void write_labeled_tsv(std::ostream& out, const Dataset& ds) {
    out << "id\ttext\tlabel\n";
    for (const auto& ex : ds.examples()) {
        out << ex.id << '\t' << ex.text << '\t';
        if (ex.label) out << to_string(*ex.label);
        out << '\n';
    }
}

void write_labeled_tsv(const std::filesystem::path& path, const Dataset& ds) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError(fmt::format("cannot write '{}'", path.string()));
    write_labeled_tsv(out, ds);
}

Dataset parse_unlabeled_text(std::string_view content, const LanguageCode& language) {
    require_utf8(content, "unlabeled corpus");
    std::vector<Example> examples;
    const auto lines = split_lines(content);
    for (std::size_t i = 0; i < lines.size(); ++i) {
        std::string text = normalize_text(lines[i]);
        if (text.empty()) continue;
        examples.push_back(
            Example{fmt::format("{}:{}", language.code(), i + 1), std::move(text), std::nullopt,
                    language});
    }
    if (examples.empty()) {
        spdlog::warn("unlabeled corpus for '{}' is empty", language.code());
    }
    return Dataset(language, Split::train, std::move(examples));
}

Dataset load_unlabeled_text(const std::filesystem::path& path, const LanguageCode& language) {
    const std::string content = read_file(path);
    if (auto bad = utf8::first_invalid(content)) {
        throw DataError(
            fmt::format("{}: invalid UTF-8 at byte offset {}", path.string(), *bad));
    }
    return parse_unlabeled_text(content, language);
}

std::vector<LanguageCode> parse_language_metadata(std::istream& in) {
    std::vector<LanguageCode> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (lineno == 1 || trim(line).empty() || line[0] == '#') continue;
        const auto f = split_tabs(line);
        if (f.size() < 2) {
            throw DataError(fmt::format("language metadata line {}: expected code and family",
                                        lineno));
        }
        std::optional<std::string> subgroup;
        if (f.size() >= 3 && !trim(f[2]).empty()) subgroup = trim(f[2]);
        out.emplace_back(trim(f[0]), trim(f[1]), std::move(subgroup));
    }
    return out;
}

std::vector<LanguageCode> load_language_metadata(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError(fmt::format("cannot open '{}'", path.string()));
    return parse_language_metadata(in);
}

DedupResult dedup_dev(const Dataset& train, const Dataset& dev) {
    if (train.language() != dev.language()) {
        throw DataError(fmt::format("dedup_dev: language mismatch ('{}' vs '{}')",
                                    train.language().code(), dev.language().code()));
    }
    std::unordered_set<std::string_view> seen;
    seen.reserve(train.size());
    for (const auto& ex : train.examples()) seen.insert(ex.text);

    std::vector<Example> kept;
    for (const auto& ex : dev.examples()) {
        if (!seen.contains(ex.text)) kept.push_back(ex);
    }
    const std::size_t removed = dev.size() - kept.size();
    if (kept.empty() && !dev.empty()) {
        spdlog::warn("devstar for '{}' is empty: every dev text occurs in train",
                     dev.language().code());
    }
    return DedupResult{Dataset(dev.language(), Split::devstar, std::move(kept)), removed};
}

}  // namespace srcsel::corpus
