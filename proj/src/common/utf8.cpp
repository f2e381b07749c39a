#include "srcsel/utf8.hpp"

namespace srcsel::utf8 {
namespace {

bool is_cont(unsigned char c) { return (c & 0xC0U) == 0x80U; }

// Returns the length of a well-formed sequence at pos, 0 if malformed.
std::size_t sequence_length(std::string_view s, std::size_t pos) noexcept {
    const auto b0 = static_cast<unsigned char>(s[pos]);
    const std::size_t left = s.size() - pos;
    if (b0 < 0x80U) return 1;
    if (b0 >= 0xC2U && b0 <= 0xDFU) {
        return (left >= 2 && is_cont(static_cast<unsigned char>(s[pos + 1]))) ? 2 : 0;
    }
    if (b0 >= 0xE0U && b0 <= 0xEFU) {
        if (left < 3) return 0;
        const auto b1 = static_cast<unsigned char>(s[pos + 1]);
        const auto b2 = static_cast<unsigned char>(s[pos + 2]);
        if (!is_cont(b1) || !is_cont(b2)) return 0;
        if (b0 == 0xE0U && b1 < 0xA0U) return 0;  // overlong
        if (b0 == 0xEDU && b1 > 0x9FU) return 0;  // surrogates
        return 3;
    }
    if (b0 >= 0xF0U && b0 <= 0xF4U) {
        if (left < 4) return 0;
        const auto b1 = static_cast<unsigned char>(s[pos + 1]);
        if (!is_cont(b1) || !is_cont(static_cast<unsigned char>(s[pos + 2])) ||
            !is_cont(static_cast<unsigned char>(s[pos + 3]))) {
            return 0;
        }
        if (b0 == 0xF0U && b1 < 0x90U) return 0;
        if (b0 == 0xF4U && b1 > 0x8FU) return 0;
        return 4;
    }
    return 0;
}

}  // namespace

std::optional<std::size_t> first_invalid(std::string_view bytes) noexcept {
    std::size_t pos = 0;
    while (pos < bytes.size()) {
        const std::size_t n = sequence_length(bytes, pos);
        if (n == 0) return pos;
        pos += n;
    }
    return std::nullopt;
}

std::size_t unit_length(std::string_view bytes, std::size_t pos) noexcept {
    const std::size_t n = sequence_length(bytes, pos);
    return n == 0 ? 1 : n;
}

std::vector<std::string_view> units(std::string_view bytes) {
    std::vector<std::string_view> out;
    out.reserve(bytes.size());
    std::size_t pos = 0;
    while (pos < bytes.size()) {
        const std::size_t n = unit_length(bytes, pos);
        out.push_back(bytes.substr(pos, n));
        pos += n;
    }
    return out;
}

}  // namespace srcsel::utf8
