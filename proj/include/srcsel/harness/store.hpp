#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "srcsel/corpus.hpp"
#include "srcsel/harness/config.hpp"

namespace srcsel::harness {

struct LanguageData {
    corpus::LanguageCode language;
    std::optional<corpus::Dataset> train;
    std::optional<corpus::Dataset> dev;
    std::optional<corpus::Dataset> devstar;
    std::optional<corpus::Dataset> test;
    std::optional<corpus::Dataset> lapt;
    std::size_t dropped_rows = 0;
    std::size_t dev_overlaps_removed = 0;
};

/// Every corpus named by a config, loaded and normalised once. Read-only
/// afterwards, so it is shared freely between worker threads.
class CorpusStore {
public:
    explicit CorpusStore(const HarnessConfig& config);

    const LanguageData& language(std::string_view code) const;
    const std::map<std::string, LanguageData>& languages() const noexcept { return data_; }
    const std::vector<corpus::Dataset>& base_corpus() const noexcept { return base_; }

    /// Labeled train split; throws DataError if the language has none.
    const corpus::Dataset& train(std::string_view code) const;
    /// devstar or test of the language; throws DataError if missing.
    const corpus::Dataset& eval(std::string_view code, corpus::Split split) const;

    /// Hash over every loaded text and label; changes whenever the data does.
    const std::string& fingerprint() const noexcept { return fingerprint_; }

private:
    std::map<std::string, LanguageData> data_;
    std::vector<corpus::Dataset> base_;
    std::string fingerprint_;
};

}  // namespace srcsel::harness
