#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>

#include "srcsel/labels.hpp"

namespace srcsel::metrics {

/// counts[gold][predicted], classes in the fixed order negative, neutral, positive.
struct ConfusionMatrix {
    std::array<std::array<std::uint64_t, kNumClasses>, kNumClasses> counts{};

    std::uint64_t total() const noexcept;
    std::uint64_t support(std::size_t cls) const noexcept;
    friend bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) = default;
};

/// Throws DataError on length mismatch or empty input.
ConfusionMatrix confusion(std::span<const Label> gold, std::span<const Label> pred);

struct ScoreReport {
    std::array<double, kNumClasses> precision{};
    std::array<double, kNumClasses> recall{};
    std::array<double, kNumClasses> per_class_f1{};
    std::array<std::uint64_t, kNumClasses> support{};
    double weighted_f1 = 0.0;
    double macro_f1 = 0.0;

    /// Flat `key=value` record, tab-separated, fixed key order.
    std::string to_kv() const;
};

/// Per-class precision/recall/F1 with zero-denominator terms set to 0.
/// Averages cover only classes with gold support > 0.
ScoreReport score(const ConfusionMatrix& cm);

double weighted_f1(const ConfusionMatrix& cm);
double macro_f1(const ConfusionMatrix& cm);

}  // namespace srcsel::metrics
