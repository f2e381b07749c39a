#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <string>

namespace srcsel::harness {

/// Append-only score journal at <dir>/scores.journal. One record per line:
///
///     score<TAB>key<TAB>seed<TAB>weighted_f1<TAB>unix_time
///
/// Scores are written with 17 significant digits so they reload bit-exact.
/// Each record goes out in a single O_APPEND write, so concurrent writers
/// never interleave partial lines. Readers skip unparseable lines and let
/// the last record win for a repeated (key, seed).
class ScoreCache {
public:
    explicit ScoreCache(std::filesystem::path dir);

    std::optional<double> get(const std::string& key, std::uint64_t seed) const;
    void put(const std::string& key, std::uint64_t seed, double score);
    std::size_t size() const;
    const std::filesystem::path& journal() const noexcept { return journal_; }

    /// Parses one journal line; nullopt if malformed.
    struct Record {
        std::string key;
        std::uint64_t seed = 0;
        double score = 0.0;
    };
    static std::optional<Record> parse_line(const std::string& line);

private:
    std::filesystem::path journal_;
    mutable std::mutex mu_;
    std::map<std::pair<std::string, std::uint64_t>, double> entries_;
};

}  // namespace srcsel::harness
