#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "srcsel/errors.hpp"
#include "srcsel/hash.hpp"
#include "srcsel/parallel.hpp"
#include "srcsel/textmodel.hpp"
#include "srcsel/utf8.hpp"

namespace srcsel::textmodel {

void FeatureSpace::validate() const {
    if (ngram_min < 1 || ngram_min > ngram_max || ngram_max > 8) {
        throw UsageError(fmt::format("n-gram range must satisfy 1 <= min <= max <= 8, got {}..{}",
                                     ngram_min, ngram_max));
    }
    if (hash_buckets == 0 || (hash_buckets & (hash_buckets - 1)) != 0) {
        throw UsageError(fmt::format("hash_buckets must be a power of two, got {}", hash_buckets));
    }
}

void LearnerConfig::validate() const {
    space().validate();
    if (!(l2_lambda >= 0.0) || !std::isfinite(l2_lambda)) {
        throw UsageError("l2_lambda must be a finite non-negative number");
    }
    if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
        throw UsageError("learning_rate must be positive");
    }
    if (!(lr_decay > 0.0 && lr_decay <= 1.0)) throw UsageError("lr_decay must be in (0, 1]");
    if (batch_size < 1) throw UsageError("batch_size must be >= 1");
    if (epochs < 1) throw UsageError("epochs must be >= 1");
}

std::string LearnerConfig::digest() const {
    return fmt::format("ng={}-{};hb={};l2={:.17g};lr={:.17g};decay={:.17g};bs={};ep={}",
                       ngram_min, ngram_max, hash_buckets, l2_lambda, learning_rate, lr_decay,
                       batch_size, epochs);
}

AdaptationStats::AdaptationStats(FeatureSpace space, std::vector<std::uint32_t> document_frequency,
                                 std::uint64_t num_documents, std::string source_tag)
    : space_(space),
      df_(std::move(document_frequency)),
      num_documents_(num_documents),
      source_tag_(std::move(source_tag)) {
    space_.validate();
    if (df_.size() != space_.hash_buckets) {
        throw UsageError("document-frequency table size does not match hash_buckets");
    }
    if (num_documents_ < 1) throw LearnerError("adaptation corpus empty");
    for (auto c : df_) {
        if (c > num_documents_) {
            throw DataError("document frequency exceeds number of documents");
        }
    }
}

AdaptationStats AdaptationStats::neutral(FeatureSpace space) {
    space.validate();
    return AdaptationStats(space, std::vector<std::uint32_t>(space.hash_buckets, 0), 1, "none");
}

double AdaptationStats::idf(std::uint32_t bucket) const noexcept {
    return std::log((1.0 + static_cast<double>(num_documents_)) /
                    (1.0 + static_cast<double>(df_[bucket]))) +
           1.0;
}

std::vector<std::pair<std::uint32_t, std::uint32_t>> AdaptationStats::entries() const {
    std::vector<std::pair<std::uint32_t, std::uint32_t>> out;
    for (std::uint32_t b = 0; b < df_.size(); ++b) {
        if (df_[b] != 0) out.emplace_back(b, df_[b]);
    }
    return out;
}

AdaptationStats merge(const AdaptationStats& a, const AdaptationStats& b, std::string tag) {
    if (!(a.space() == b.space())) throw UsageError("cannot merge stats of different feature spaces");
    std::vector<std::uint32_t> df(a.space().hash_buckets);
    for (std::uint32_t i = 0; i < df.size(); ++i) df[i] = a.df(i) + b.df(i);
    return AdaptationStats(a.space(), std::move(df), a.num_documents() + b.num_documents(),
                           std::move(tag));
}

std::uint64_t gram_hash(std::string_view gram) noexcept { return fnv1a64(gram); }

std::vector<std::pair<std::uint32_t, std::uint32_t>> bucket_counts(std::string_view text,
                                                                   const FeatureSpace& space) {
    std::vector<std::pair<std::uint32_t, std::uint32_t>> out;
    if (text.empty()) return out;

    std::vector<std::string_view> units;
    units.reserve(text.size() + 2);
    units.push_back(kBeginMarker);
    for (auto u : utf8::units(text)) units.push_back(u);
    units.push_back(kEndMarker);

    const std::uint32_t mask = space.hash_buckets - 1;
    const auto nmin = static_cast<std::size_t>(space.ngram_min);
    const auto nmax = static_cast<std::size_t>(space.ngram_max);
    const std::size_t last = units.size() - 1;
    std::vector<std::uint32_t> buckets;
    buckets.reserve(units.size() * (nmax - nmin + 1));
    for (std::size_t p = 0; p < units.size(); ++p) {
        std::uint64_t h = kFnvOffset;
        for (std::size_t n = 1; n <= nmax && p + n <= units.size(); ++n) {
            h = fnv1a64(units[p + n - 1], h);
            if (n < nmin) continue;
            if (n == 1 && (p == 0 || p == last)) continue;  // a bare marker
            buckets.push_back(static_cast<std::uint32_t>(h & mask));
        }
    }
    std::sort(buckets.begin(), buckets.end());
    for (std::size_t i = 0; i < buckets.size();) {
        std::size_t j = i;
        while (j < buckets.size() && buckets[j] == buckets[i]) ++j;
        out.emplace_back(buckets[i], static_cast<std::uint32_t>(j - i));
        i = j;
    }
    return out;
}

SparseVector featurize(std::string_view text, const AdaptationStats& stats) {
    SparseVector v;
    const auto counts = bucket_counts(text, stats.space());
    v.indices.reserve(counts.size());
    v.values.reserve(counts.size());
    double norm2 = 0.0;
    for (const auto& [bucket, tf] : counts) {
        const double value = (1.0 + std::log(static_cast<double>(tf))) * stats.idf(bucket);
        v.indices.push_back(bucket);
        v.values.push_back(value);
        norm2 += value * value;
    }
    if (norm2 > 0.0) {
        const double inv = 1.0 / std::sqrt(norm2);
        for (auto& x : v.values) x *= inv;
    }
    return v;
}

std::vector<SparseVector> featurize_batch(std::span<const std::string> texts,
                                          const AdaptationStats& stats) {
    std::vector<SparseVector> out(texts.size());
    const auto n = static_cast<std::ptrdiff_t>(texts.size());
#pragma omp parallel for schedule(dynamic, 32) if (n > 128 && !in_parallel_region())
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        out[static_cast<std::size_t>(i)] = featurize(texts[static_cast<std::size_t>(i)], stats);
    }
    return out;
}

std::vector<SparseVector> featurize_batch_serial(std::span<const std::string> texts,
                                                 const AdaptationStats& stats) {
    std::vector<SparseVector> out;
    out.reserve(texts.size());
    for (const auto& t : texts) out.push_back(featurize(t, stats));
    return out;
}

AdaptationStats pretrain(std::span<const corpus::Dataset> corpus, std::string tag,
                         const FeatureSpace& space) {
    space.validate();
    std::vector<std::uint32_t> df(space.hash_buckets, 0);
    std::uint64_t docs = 0;
    for (const auto& ds : corpus) {
        for (const auto& ex : ds.examples()) {
            if (ex.label) {
                throw UsageError(fmt::format(
                    "pretrain received labeled example '{}'; adaptation uses unlabeled text only",
                    ex.id));
            }
            if (ex.text.empty()) continue;
            for (const auto& [bucket, tf] : bucket_counts(ex.text, space)) ++df[bucket];
            ++docs;
        }
    }
    if (docs == 0) throw LearnerError("adaptation corpus empty");
    return AdaptationStats(space, std::move(df), docs, std::move(tag));
}

}  // namespace srcsel::textmodel
