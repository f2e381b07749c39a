#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "srcsel/harness/experiment.hpp"
#include "srcsel/harness/scorer.hpp"

namespace srcsel::harness {

struct MatrixEntry {
    ExperimentSpec spec;
    std::string key;
    std::vector<std::pair<std::uint64_t, double>> per_seed;  // in seed-list order
    double mean = 0.0;
    double stddev = 0.0;  // sample standard deviation; 0 for one seed
    std::size_t eval_size = 0;

    /// Recomputes mean and stddev from per_seed.
    void summarize();
    friend bool operator==(const MatrixEntry&, const MatrixEntry&) = default;
};

/// Seed-averaged scores keyed by experiment key.
class ScoreMatrix {
public:
    void insert(MatrixEntry entry);
    const MatrixEntry* find(const std::string& key) const;
    const MatrixEntry& at(const ExperimentSpec& spec, const std::string& fingerprint) const;
    const std::map<std::string, MatrixEntry>& entries() const noexcept { return entries_; }
    std::size_t size() const noexcept { return entries_.size(); }

    /// One JSON object per line, ordered by key.
    void write_jsonl(std::ostream& out) const;
    static ScoreMatrix read_jsonl(std::istream& in);

    friend bool operator==(const ScoreMatrix&, const ScoreMatrix&) = default;

private:
    std::map<std::string, MatrixEntry> entries_;
};

/// Scores every (spec, seed) of the plan with up to `parallelism` workers.
/// Duplicate specs are scored once. On failure the remaining queued work is
/// skipped, in-flight work drains, and one ExperimentError lists every
/// failed spec.
ScoreMatrix run_matrix(Scorer& scorer, const std::vector<ExperimentSpec>& plan,
                       const std::vector<std::uint64_t>& seeds, int parallelism);

/// Serial reference for run_matrix.
ScoreMatrix run_matrix_serial(Scorer& scorer, const std::vector<ExperimentSpec>& plan,
                              const std::vector<std::uint64_t>& seeds);

}  // namespace srcsel::harness
