#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "srcsel/labels.hpp"
#include "srcsel/textmodel.hpp"

namespace srcsel::ensemble {

/// Predictions of several seeds over the same examples in the same order.
class VotePool {
public:
    /// Throws UsageError if empty or if the lists differ in length.
    explicit VotePool(std::vector<std::vector<textmodel::Prediction>> per_seed);

    std::size_t seeds() const noexcept { return per_seed_.size(); }
    std::size_t examples() const noexcept { return per_seed_.front().size(); }
    const std::vector<std::vector<textmodel::Prediction>>& per_seed() const noexcept {
        return per_seed_;
    }

private:
    std::vector<std::vector<textmodel::Prediction>> per_seed_;
};

/// Plurality label per example. Ties go to the tied label with the highest
/// mean predicted probability, then to the fixed class order.
std::vector<Label> majority_vote(const VotePool& pool);

/// One row of a prediction file: `id<TAB>label[<TAB>p_neg<TAB>p_neu<TAB>p_pos]`.
struct PredictionRow {
    std::string id;
    textmodel::Prediction prediction;
    bool has_probs = false;
};

std::vector<PredictionRow> read_predictions(std::istream& in, const std::string& origin = "<stream>");
std::vector<PredictionRow> read_predictions(const std::filesystem::path& path);
void write_predictions(std::ostream& out, const std::vector<PredictionRow>& rows, bool with_probs);

/// Pools prediction files (rows matched by position; ids must agree) and
/// returns the voted `id, label` rows. Rows without probabilities count as
/// one-hot distributions.
std::vector<PredictionRow> ensemble_files(const std::vector<std::vector<PredictionRow>>& files);

}  // namespace srcsel::ensemble
