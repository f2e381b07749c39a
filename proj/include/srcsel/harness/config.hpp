#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "srcsel/corpus.hpp"
#include "srcsel/selection.hpp"
#include "srcsel/textmodel.hpp"

namespace srcsel::harness {

/// Which unlabeled corpora feed the pretraining phase.
enum class Adaptation : std::uint8_t { none, tapt, lapt, lapt_tapt };

std::string_view to_string(Adaptation a) noexcept;  // none|tapt|lapt|lapt+tapt
Adaptation parse_adaptation(std::string_view s);
/// Suffix used in report row names: "", " + TAPT", " + LAPT", " + LAPT & TAPT".
std::string_view display_suffix(Adaptation a) noexcept;

struct LanguageEntry {
    corpus::LanguageCode language;
    std::optional<std::filesystem::path> train;
    std::optional<std::filesystem::path> dev;
    std::optional<std::filesystem::path> test;
    std::optional<std::filesystem::path> lapt;
};

/// Environment variable overriding the cache directory.
inline constexpr const char* kCacheDirEnv = "SRCSEL_CACHE_DIR";

/// One JSON document; relative paths resolve against the config file's directory.
struct HarnessConfig {
    std::vector<LanguageEntry> languages;
    std::vector<std::filesystem::path> base_corpus;
    textmodel::LearnerConfig learner;
    selection::SelectionConfig selection;
    /// Adaptation used for selection-time experiments.
    Adaptation selection_adaptation = Adaptation::none;
    /// Targets for selection and reports; empty means every language with train data.
    std::vector<std::string> targets;
    std::vector<Adaptation> report_adaptations{Adaptation::none, Adaptation::tapt};
    corpus::Split report_split = corpus::Split::devstar;
    std::uint64_t sample_seed = 0;
    int parallelism = 1;
    std::filesystem::path cache_dir;

    static HarnessConfig from_json(const nlohmann::json& doc, const std::filesystem::path& base_dir);
    /// Reads the file and applies the SRCSEL_CACHE_DIR override.
    static HarnessConfig load(const std::filesystem::path& path);

    const LanguageEntry& entry(std::string_view code) const;
    void validate() const;
};

}  // namespace srcsel::harness
