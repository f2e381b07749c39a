#include "srcsel/harness/experiment.hpp"

#include <algorithm>

#include <fmt/format.h>
#include <fmt/ranges.h>

#include "srcsel/errors.hpp"
#include "srcsel/hash.hpp"

namespace srcsel::harness {

ExperimentSpec ExperimentSpec::make(std::string target, std::vector<std::string> sources,
                                    selection::Mode mode, Adaptation adaptation,
                                    std::string learner_digest, std::optional<std::size_t> sample_cap,
                                    corpus::Split eval_split) {
    std::sort(sources.begin(), sources.end());
    sources.erase(std::unique(sources.begin(), sources.end()), sources.end());
    ExperimentSpec s{std::move(target), std::move(sources), mode,      adaptation,
                     std::move(learner_digest), sample_cap, eval_split};
    s.validate();
    return s;
}

void ExperimentSpec::validate() const {
    if (sources.empty()) throw UsageError(fmt::format("experiment for '{}' has no source languages", target));
    if (!std::is_sorted(sources.begin(), sources.end())) throw UsageError("experiment sources must be sorted");
    if (mode == selection::Mode::zeroshot && std::binary_search(sources.begin(), sources.end(), target)) {
        throw UsageError(fmt::format("zero-shot experiment for '{}' lists the target among its sources", target));
    }
    if (eval_split != corpus::Split::devstar && eval_split != corpus::Split::test) {
        throw UsageError("experiments evaluate on devstar or test");
    }
    if (sample_cap && *sample_cap == 0) throw UsageError("sample cap must be >= 1");
}

std::string ExperimentSpec::canonical() const {
    return fmt::format("target={};sources={};mode={};adaptation={};learner={};cap={};split={}", target,
                       fmt::join(sources, ","), selection::to_string(mode), to_string(adaptation),
                       learner_digest, sample_cap ? std::to_string(*sample_cap) : "none",
                       corpus::to_string(eval_split));
}

std::string ExperimentSpec::key(std::string_view data_fingerprint) const {
    const std::uint64_t h = fnv1a64(data_fingerprint, fnv1a64(canonical() + "|"));
    return fmt::format("{:016x}", h);
}

ExperimentSpec spec_from_cell(const selection::CellSpec& cell, Adaptation adaptation,
                              const std::string& learner_digest) {
    return ExperimentSpec::make(cell.target, cell.sources, cell.mode, adaptation, learner_digest,
                                cell.sample_cap, corpus::Split::devstar);
}

}  // namespace srcsel::harness
