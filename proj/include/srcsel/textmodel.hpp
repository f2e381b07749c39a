#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "srcsel/corpus.hpp"
#include "srcsel/labels.hpp"

namespace srcsel::textmodel {

/// Hashed character n-gram feature space.
struct FeatureSpace {
    int ngram_min = 1;
    int ngram_max = 5;
    std::uint32_t hash_buckets = 1U << 18;

    void validate() const;
    friend bool operator==(const FeatureSpace&, const FeatureSpace&) = default;
};

struct LearnerConfig {
    int ngram_min = 1;
    int ngram_max = 5;
    std::uint32_t hash_buckets = 1U << 18;
    double l2_lambda = 1e-4;
    double learning_rate = 0.1;
    /// Multiplicative learning-rate decay applied after every epoch.
    double lr_decay = 0.9;
    int batch_size = 32;
    int epochs = 20;
    std::uint64_t seed = 0;

    /// Throws UsageError when an invariant is violated.
    void validate() const;
    FeatureSpace space() const { return {ngram_min, ngram_max, hash_buckets}; }
    /// Canonical text of every field except the seed; part of experiment cache keys.
    std::string digest() const;

    friend bool operator==(const LearnerConfig&, const LearnerConfig&) = default;
};

/// Document-frequency statistics estimated on an unlabeled adaptation corpus.
/// This is the state produced by the unsupervised pretraining phase; it sets
/// the IDF weighting used when featurizing text for the classifier.
class AdaptationStats {
public:
    /// document_frequency is dense (one count per bucket, 0 = unseen).
    AdaptationStats(FeatureSpace space, std::vector<std::uint32_t> document_frequency,
                    std::uint64_t num_documents, std::string source_tag);

    /// Statistics of a single empty document: every bucket gets the same IDF,
    /// so featurization reduces to log term frequency.
    static AdaptationStats neutral(FeatureSpace space);

    const FeatureSpace& space() const noexcept { return space_; }
    std::uint64_t num_documents() const noexcept { return num_documents_; }
    const std::string& source_tag() const noexcept { return source_tag_; }
    std::uint32_t df(std::uint32_t bucket) const noexcept { return df_[bucket]; }
    /// ln((1 + N) / (1 + df)) + 1
    double idf(std::uint32_t bucket) const noexcept;
    /// Non-zero (bucket, count) pairs in bucket order.
    std::vector<std::pair<std::uint32_t, std::uint32_t>> entries() const;

    friend bool operator==(const AdaptationStats&, const AdaptationStats&) = default;

private:
    FeatureSpace space_;
    std::vector<std::uint32_t> df_;
    std::uint64_t num_documents_ = 0;
    std::string source_tag_;
};

/// Sum of document frequencies and document counts. Pretraining on the union
/// of two corpora equals merging the stats of each.
AdaptationStats merge(const AdaptationStats& a, const AdaptationStats& b, std::string tag);

struct SparseVector {
    std::vector<std::uint32_t> indices;  // strictly increasing
    std::vector<double> values;

    std::size_t nnz() const noexcept { return indices.size(); }
    friend bool operator==(const SparseVector&, const SparseVector&) = default;
};

/// Hash of one n-gram's UTF-8 bytes (64-bit FNV-1a), before bucket reduction.
std::uint64_t gram_hash(std::string_view gram) noexcept;

/// Boundary markers placed around the text before n-gram extraction.
inline constexpr std::string_view kBeginMarker = "\x02";
inline constexpr std::string_view kEndMarker = "\x03";

/// Distinct buckets touched by the n-grams of text, with their counts.
std::vector<std::pair<std::uint32_t, std::uint32_t>> bucket_counts(std::string_view text,
                                                                   const FeatureSpace& space);

/// Log-TF x IDF over hashed character n-grams, L2-normalised. Empty text
/// gives the zero vector.
SparseVector featurize(std::string_view text, const AdaptationStats& stats);

std::vector<SparseVector> featurize_batch(std::span<const std::string> texts,
                                          const AdaptationStats& stats);
std::vector<SparseVector> featurize_batch_serial(std::span<const std::string> texts,
                                                 const AdaptationStats& stats);

/// Counts, per bucket, the number of documents containing it. Every example
/// must be unlabeled; labels never reach this phase.
AdaptationStats pretrain(std::span<const corpus::Dataset> corpus, std::string tag,
                         const FeatureSpace& space);

struct Model {
    LearnerConfig config;
    AdaptationStats stats;
    std::vector<double> weights;  // row-major, kNumClasses x hash_buckets
    std::array<double, kNumClasses> bias{};
    /// Mean mini-batch objective per epoch, recorded during fine_tune.
    std::vector<double> loss_history;

    /// All-zero model for the given config and statistics.
    static Model zeros(const LearnerConfig& config, AdaptationStats stats);

    double weight(std::size_t cls, std::uint32_t bucket) const {
        return weights[cls * config.hash_buckets + bucket];
    }
};

struct Prediction {
    Label label = Label::negative;
    std::array<double, kNumClasses> probs{};

    friend bool operator==(const Prediction&, const Prediction&) = default;
};

struct LabeledVector {
    SparseVector x;
    Label y = Label::negative;
};

struct LossGradient {
    double loss = 0.0;
    std::vector<double> weight_grad;  // same layout as Model::weights
    std::array<double, kNumClasses> bias_grad{};
};

/// Mean cross-entropy plus (l2_lambda / 2) * (|W|^2 + |b|^2), with its exact gradient.
LossGradient loss_and_gradient(const Model& model, std::span<const LabeledVector> batch);
LossGradient loss_and_gradient(const Model& model, std::span<const corpus::Example> batch);

/// Mini-batch proximal gradient descent on the L2-regularised softmax
/// objective. Training is single-threaded; (data, config) fix the result bits.
Model fine_tune(const AdaptationStats& stats, std::span<const corpus::Dataset> train,
                const LearnerConfig& config);

/// Dense, obviously-correct trainer built on loss_and_gradient. Same batches
/// and update rule as fine_tune; kept for cross-checking it.
Model fine_tune_reference(const AdaptationStats& stats, std::span<const corpus::Dataset> train,
                          const LearnerConfig& config);

/// Softmax over W x + b; argmax ties resolve to the first class in fixed order.
Prediction predict(const Model& model, std::string_view text);
Prediction predict_features(const Model& model, const SparseVector& x);

std::vector<Prediction> predict_batch(const Model& model, std::span<const std::string> texts);
std::vector<Prediction> predict_batch_serial(const Model& model,
                                             std::span<const std::string> texts);

// --- serialization ---------------------------------------------------------

void save_model(std::ostream& out, const Model& model);
Model load_model(std::istream& in);
void save_model(const std::filesystem::path& path, const Model& model);
Model load_model(const std::filesystem::path& path);

}  // namespace srcsel::textmodel
