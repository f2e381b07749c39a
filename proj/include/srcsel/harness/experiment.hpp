#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "srcsel/corpus.hpp"
#include "srcsel/harness/config.hpp"
#include "srcsel/selection.hpp"

namespace srcsel::harness {

/// A training-and-evaluation experiment, minus the seed. Seeds are applied
/// per run; the score matrix groups the seeds of one spec together.
struct ExperimentSpec {
    std::string target;
    std::vector<std::string> sources;  // ascending, unique
    selection::Mode mode = selection::Mode::multilingual;
    Adaptation adaptation = Adaptation::none;
    std::string learner_digest;
    std::optional<std::size_t> sample_cap;
    corpus::Split eval_split = corpus::Split::devstar;

    /// Sorts and dedups sources, then validates.
    static ExperimentSpec make(std::string target, std::vector<std::string> sources, selection::Mode mode,
                               Adaptation adaptation, std::string learner_digest,
                               std::optional<std::size_t> sample_cap, corpus::Split eval_split);

    /// Throws UsageError: empty sources, zero-shot spec training on its target,
    /// or an evaluation split other than devstar/test.
    void validate() const;

    /// Canonical one-line text of every field; the cache key hashes it.
    std::string canonical() const;
    /// 16 hex digits of FNV-1a over canonical() plus a data fingerprint.
    std::string key(std::string_view data_fingerprint) const;

    friend bool operator==(const ExperimentSpec&, const ExperimentSpec&) = default;
};

ExperimentSpec spec_from_cell(const selection::CellSpec& cell, Adaptation adaptation,
                              const std::string& learner_digest);

}  // namespace srcsel::harness
