#include "srcsel/harness/cache.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <charconv>
#include <chrono>
#include <fstream>
#include <vector>

#include <fmt/format.h>

#include "srcsel/errors.hpp"

namespace srcsel::harness {

ScoreCache::ScoreCache(std::filesystem::path dir) : journal_(dir / "scores.journal") {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw UsageError(fmt::format("cannot create cache directory '{}': {}", dir.string(), ec.message()));
    std::ifstream in(journal_);
    std::string line;
    while (std::getline(in, line)) {
        if (auto r = parse_line(line)) entries_[{r->key, r->seed}] = r->score;
    }
}

std::optional<ScoreCache::Record> ScoreCache::parse_line(const std::string& line) {
    std::vector<std::string_view> f;
    std::string_view rest(line);
    while (true) {
        const auto tab = rest.find('\t');
        f.push_back(rest.substr(0, tab));
        if (tab == std::string_view::npos) break;
        rest.remove_prefix(tab + 1);
    }
    if (f.size() != 5 || f[0] != "score" || f[1].empty()) return std::nullopt;
    Record r;
    r.key = std::string(f[1]);
    if (std::from_chars(f[2].data(), f[2].data() + f[2].size(), r.seed).ec != std::errc{}) return std::nullopt;
    const auto [ptr, ec] = std::from_chars(f[3].data(), f[3].data() + f[3].size(), r.score);
    if (ec != std::errc{} || ptr != f[3].data() + f[3].size()) return std::nullopt;
    return r;
}

std::optional<double> ScoreCache::get(const std::string& key, std::uint64_t seed) const {
    std::lock_guard lock(mu_);
    auto it = entries_.find({key, seed});
    if (it == entries_.end()) return std::nullopt;
    return it->second;
}

void ScoreCache::put(const std::string& key, std::uint64_t seed, double score) {
    const auto now = std::chrono::duration_cast<std::chrono::seconds>(
                         std::chrono::system_clock::now().time_since_epoch())
                         .count();
    const std::string line = fmt::format("score\t{}\t{}\t{:.17g}\t{}\n", key, seed, score, now);
    std::lock_guard lock(mu_);
    const int fd = ::open(journal_.c_str(), O_WRONLY | O_APPEND | O_CREAT, 0644);
    if (fd < 0) throw ExperimentError(fmt::format("cannot open cache journal '{}'", journal_.string()));
    const auto written = ::write(fd, line.data(), line.size());
    ::close(fd);
    if (written != static_cast<ssize_t>(line.size())) {
        throw ExperimentError(fmt::format("short write to cache journal '{}'", journal_.string()));
    }
    entries_[{key, seed}] = score;
}

std::size_t ScoreCache::size() const {
    std::lock_guard lock(mu_);
    return entries_.size();
}

}  // namespace srcsel::harness
