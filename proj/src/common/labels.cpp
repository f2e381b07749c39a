#include "srcsel/labels.hpp"

#include <algorithm>
#include <cctype>
#include <string>

namespace srcsel {

std::optional<Label> parse_label(std::string_view s) noexcept {
    std::string lower(s);
    std::transform(lower.begin(), lower.end(), lower.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    for (Label l : kAllLabels) {
        if (lower == to_string(l)) return l;
    }
    return std::nullopt;
}

}  // namespace srcsel
