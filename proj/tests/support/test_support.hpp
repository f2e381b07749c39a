#pragma once

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <map>
#include <mutex>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "srcsel/labels.hpp"
#include "srcsel/selection.hpp"

namespace testsupport {

namespace fs = std::filesystem;

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
public:
    TempDir() {
        std::string tmpl = (fs::temp_directory_path() / "srcsel-test-XXXXXX").string();
        if (!mkdtemp(tmpl.data())) throw std::runtime_error("mkdtemp failed");
        path_ = tmpl;
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;
    const fs::path& path() const { return path_; }

private:
    fs::path path_;
};

// --- F1 computed straight from label lists ---------------------------------

struct BruteF1 {
    double weighted = 0.0;
    double macro = 0.0;
};

inline BruteF1 brute_f1(const std::vector<srcsel::Label>& gold, const std::vector<srcsel::Label>& pred) {
    const std::vector<srcsel::Label> classes{srcsel::Label::negative, srcsel::Label::neutral,
                                             srcsel::Label::positive};
    double weighted_num = 0.0, macro_sum = 0.0;
    int present = 0;
    for (auto c : classes) {
        double tp = 0, predicted = 0, actual = 0;
        for (std::size_t i = 0; i < gold.size(); ++i) {
            if (pred[i] == c) predicted += 1;
            if (gold[i] == c) actual += 1;
            if (pred[i] == c && gold[i] == c) tp += 1;
        }
        if (actual == 0) continue;
        const double p = predicted > 0 ? tp / predicted : 0.0;
        const double r = tp / actual;
        const double f = p + r > 0 ? 2 * p * r / (p + r) : 0.0;
        weighted_num += actual * f;
        macro_sum += f;
        ++present;
    }
    return {weighted_num / static_cast<double>(gold.size()), macro_sum / present};
}

// --- selection mocks ------------------------------------------------------

inline std::string set_key(std::vector<std::string> sources) {
    std::sort(sources.begin(), sources.end());
    std::string k;
    for (const auto& s : sources) k += s + ",";
    return k;
}

/// Scores cells from a function of (target, sources, seed); counts calls and
/// checks that zero-shot cells never train on the target.
class MockOracle final : public srcsel::selection::ScoringOracle {
public:
    using Fn = std::function<double(const std::string&, const std::vector<std::string>&, std::uint64_t)>;
    explicit MockOracle(Fn fn) : fn_(std::move(fn)) {}

    double score(const srcsel::selection::CellSpec& cell, std::uint64_t seed) override {
        std::lock_guard lock(mu_);
        ++calls_;
        if (cell.mode == srcsel::selection::Mode::zeroshot &&
            std::find(cell.sources.begin(), cell.sources.end(), cell.target) != cell.sources.end()) {
            ++zeroshot_violations_;
        }
        cells_.insert({cell.describe(), seed});
        return fn_(cell.target, cell.sources, seed);
    }

    std::size_t calls() const { return calls_; }
    std::size_t distinct_cells() const { return cells_.size(); }
    std::size_t zeroshot_violations() const { return zeroshot_violations_; }

private:
    Fn fn_;
    std::mutex mu_;
    std::size_t calls_ = 0;
    std::size_t zeroshot_violations_ = 0;
    std::set<std::pair<std::string, std::uint64_t>> cells_;
};

/// Positive sources by direct reading of the selection rules, written
/// without the library's planning code. Returns codes in ranking order.
struct BruteSelection {
    double baseline = 0.0;
    std::vector<std::string> positives;
};

inline BruteSelection brute_select(const std::string& target, const std::vector<std::string>& candidates,
                                   srcsel::selection::Mode mode, srcsel::selection::Strategy strategy,
                                   const srcsel::selection::SelectionConfig& cfg, const MockOracle::Fn& fn) {
    using srcsel::selection::Mode;
    using srcsel::selection::Strategy;
    auto mean = [&](const std::vector<std::string>& sources) {
        double s = 0.0;
        for (auto seed : cfg.seeds) s += fn(target, sources, seed);
        return s / static_cast<double>(cfg.seeds.size());
    };
    const bool rel = cfg.threshold_kind == srcsel::selection::ThresholdKind::relative;
    const double thr = cfg.threshold;
    BruteSelection out;
    std::vector<std::pair<double, std::string>> scored;  // (-gain, code) sorts best first
    if (strategy == Strategy::forward) {
        if (mode == Mode::multilingual) {
            out.baseline = mean({target});
            const double bar = rel ? out.baseline * (1 + thr) : out.baseline + thr;
            for (const auto& c : candidates) {
                const double s = mean({target, c});
                if (s > bar) scored.emplace_back(-(s - out.baseline), c);
            }
        } else {
            out.baseline = mean(candidates);
            const double bar = rel ? out.baseline * (1 - thr) : out.baseline - thr;
            for (const auto& c : candidates) {
                const double s = mean({c});
                if (s >= bar) scored.emplace_back(-(s - out.baseline), c);
            }
        }
    } else {
        std::vector<std::string> full = candidates;
        if (mode == Mode::multilingual) full.push_back(target);
        out.baseline = mean(full);
        const double bar = rel ? out.baseline * (1 - thr) : out.baseline - thr;
        for (const auto& c : candidates) {
            std::vector<std::string> rest;
            for (const auto& f : full) {
                if (f != c) rest.push_back(f);
            }
            const double s = mean(rest);
            if (s < bar) scored.emplace_back(-(out.baseline - s), c);
        }
    }
    std::sort(scored.begin(), scored.end());
    for (const auto& [g, c] : scored) out.positives.push_back(c);
    if (cfg.top_k && out.positives.size() > *cfg.top_k) out.positives.resize(*cfg.top_k);
    return out;
}

}  // namespace testsupport
