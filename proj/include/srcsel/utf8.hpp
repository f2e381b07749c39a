#pragma once

#include <cstddef>
#include <optional>
#include <string_view>
#include <vector>

namespace srcsel::utf8 {

/// Byte offset of the first byte that does not start a well-formed UTF-8
/// sequence, or nullopt if the whole input is valid.
std::optional<std::size_t> first_invalid(std::string_view bytes) noexcept;

/// Length in bytes of the unit starting at bytes[pos]: a complete code point
/// when well-formed, otherwise 1 (the stray byte stands alone).
std::size_t unit_length(std::string_view bytes, std::size_t pos) noexcept;

/// Splits text into units as defined by unit_length.
std::vector<std::string_view> units(std::string_view bytes);

}  // namespace srcsel::utf8
