#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string_view>

namespace srcsel {

/// Three-way sentiment label. The enumerator order is the fixed class order
/// used for every tie-break in the project.
enum class Label : std::uint8_t { negative = 0, neutral = 1, positive = 2 };

inline constexpr std::size_t kNumClasses = 3;
inline constexpr std::array<Label, kNumClasses> kAllLabels{Label::negative, Label::neutral,
                                                           Label::positive};

constexpr std::size_t index_of(Label l) noexcept { return static_cast<std::size_t>(l); }
constexpr Label label_at(std::size_t i) noexcept { return static_cast<Label>(i); }

constexpr std::string_view to_string(Label l) noexcept {
    switch (l) {
        case Label::negative: return "negative";
        case Label::neutral: return "neutral";
        case Label::positive: return "positive";
    }
    return "?";
}

/// Case-insensitive match against the three class names.
std::optional<Label> parse_label(std::string_view s) noexcept;

}  // namespace srcsel
