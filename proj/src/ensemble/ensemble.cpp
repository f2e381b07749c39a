#include "srcsel/ensemble.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>

#include <fmt/format.h>

#include "srcsel/errors.hpp"

namespace srcsel::ensemble {

VotePool::VotePool(std::vector<std::vector<textmodel::Prediction>> per_seed)
    : per_seed_(std::move(per_seed)) {
    if (per_seed_.empty()) throw UsageError("vote pool is empty");
    for (const auto& p : per_seed_) {
        if (p.size() != per_seed_.front().size()) {
            throw UsageError("vote pool: prediction lists differ in length");
        }
    }
}

std::vector<Label> majority_vote(const VotePool& pool) {
    const auto& seeds = pool.per_seed();
    std::vector<Label> out(pool.examples());
    std::vector<double> column(seeds.size());
    for (std::size_t i = 0; i < out.size(); ++i) {
        std::array<std::size_t, kNumClasses> votes{};
        for (const auto& s : seeds) ++votes[index_of(s[i].label)];
        const std::size_t top = *std::max_element(votes.begin(), votes.end());

        // Sorting before summing makes the mean independent of seed order.
        std::array<double, kNumClasses> prob_sum{};
        for (std::size_t c = 0; c < kNumClasses; ++c) {
            if (votes[c] != top) continue;
            for (std::size_t k = 0; k < seeds.size(); ++k) column[k] = seeds[k][i].probs[c];
            std::sort(column.begin(), column.end());
            for (double p : column) prob_sum[c] += p;
        }
        std::size_t best = kNumClasses;
        for (std::size_t c = 0; c < kNumClasses; ++c) {
            if (votes[c] != top) continue;
            if (best == kNumClasses || prob_sum[c] > prob_sum[best]) best = c;
        }
        out[i] = label_at(best);
    }
    return out;
}

std::vector<PredictionRow> read_predictions(std::istream& in, const std::string& origin) {
    std::vector<PredictionRow> rows;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<std::string> f;
        std::size_t start = 0;
        while (true) {
            const auto tab = line.find('\t', start);
            f.push_back(line.substr(start, tab == std::string::npos ? std::string::npos : tab - start));
            if (tab == std::string::npos) break;
            start = tab + 1;
        }
        if (lineno == 1 && f.size() >= 2 && f[0] == "id" && f[1] == "label") continue;
        if (f.size() != 2 && f.size() != 5) {
            throw DataError(fmt::format("{}: line {}: expected 2 or 5 columns, got {}", origin,
                                        lineno, f.size()));
        }
        const auto label = parse_label(f[1]);
        if (!label) {
            throw DataError(fmt::format("{}: unknown label '{}' at line {}", origin, f[1], lineno));
        }
        PredictionRow row{f[0], {*label, {}}, f.size() == 5};
        if (row.has_probs) {
            for (std::size_t c = 0; c < kNumClasses; ++c) {
                const std::string& s = f[2 + c];
                double v = 0.0;
                const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
                if (ec != std::errc{} || ptr != s.data() + s.size()) {
                    throw DataError(fmt::format("{}: bad probability '{}' at line {}", origin, s, lineno));
                }
                row.prediction.probs[c] = v;
            }
        } else {
            row.prediction.probs[index_of(*label)] = 1.0;
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

std::vector<PredictionRow> read_predictions(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError(fmt::format("cannot open '{}'", path.string()));
    return read_predictions(in, path.string());
}

void write_predictions(std::ostream& out, const std::vector<PredictionRow>& rows, bool with_probs) {
    for (const auto& r : rows) {
        out << r.id << '\t' << to_string(r.prediction.label);
        if (with_probs) {
            for (double p : r.prediction.probs) out << '\t' << fmt::format("{:.17g}", p);
        }
        out << '\n';
    }
}

std::vector<PredictionRow> ensemble_files(const std::vector<std::vector<PredictionRow>>& files) {
    if (files.empty()) throw UsageError("ensemble: no prediction files");
    std::vector<std::vector<textmodel::Prediction>> per_seed;
    for (std::size_t f = 0; f < files.size(); ++f) {
        if (files[f].size() != files.front().size()) {
            throw DataError(fmt::format("ensemble: file {} has {} rows, expected {}", f + 1,
                                        files[f].size(), files.front().size()));
        }
        std::vector<textmodel::Prediction> preds;
        for (std::size_t i = 0; i < files[f].size(); ++i) {
            if (files[f][i].id != files.front()[i].id) {
                throw DataError(fmt::format("ensemble: row {} id '{}' does not match '{}'", i + 1,
                                            files[f][i].id, files.front()[i].id));
            }
            preds.push_back(files[f][i].prediction);
        }
        per_seed.push_back(std::move(preds));
    }
    const auto labels = majority_vote(VotePool(std::move(per_seed)));
    std::vector<PredictionRow> out;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        out.push_back({files.front()[i].id, {labels[i], {}}, false});
    }
    return out;
}

}  // namespace srcsel::ensemble
