#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "srcsel/corpus.hpp"
#include "srcsel/errors.hpp"
#include "srcsel/hash.hpp"
#include "srcsel/random.hpp"

namespace srcsel::corpus {

Dataset sample_dataset(const Dataset& ds, std::size_t k, std::uint64_t seed) {
    const std::size_t n = ds.size();
    if (k >= n) return ds;
    Rng rng(hash_combine(seed, fnv1a64(ds.language().code())));
    // Selection sampling (Knuth's Algorithm S): uniform k-subsets, emitted in input order.
    std::vector<Example> picked;
    picked.reserve(k);
    std::size_t needed = k;
    for (std::size_t i = 0; i < n && needed > 0; ++i) {
        const std::size_t remaining = n - i;
        if (static_cast<double>(remaining) * rng.uniform01() < static_cast<double>(needed)) {
            picked.push_back(ds.examples()[i]);
            --needed;
        }
    }
    return Dataset(ds.language(), ds.split(), std::move(picked));
}

std::vector<Dataset> sample_per_language(std::span<const Dataset> datasets, std::int64_t k,
                                         std::uint64_t seed) {
    if (k <= 0) throw UsageError(fmt::format("sample size must be >= 1, got {}", k));
    std::vector<Dataset> out;
    out.reserve(datasets.size());
    for (const auto& ds : datasets) {
        if (ds.size() < static_cast<std::size_t>(k)) {
            spdlog::warn("language '{}' has {} rows, fewer than the requested {}; using all",
                         ds.language().code(), ds.size(), k);
        }
        out.push_back(sample_dataset(ds, static_cast<std::size_t>(k), seed));
    }
    return out;
}

}  // namespace srcsel::corpus
