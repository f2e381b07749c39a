#include <string>
#include <string_view>
#include <vector>

#include "srcsel/corpus.hpp"
#include "srcsel/parallel.hpp"
#include "srcsel/utf8.hpp"

namespace srcsel::corpus {
namespace {

constexpr std::string_view kUrlToken = "HTTPURL";
constexpr std::string_view kUserToken = "USER";

bool is_space(char c) {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' || c == '\f';
}
bool is_alpha(char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z'); }
bool is_digit(char c) { return c >= '0' && c <= '9'; }
bool is_scheme_char(char c) {
    return is_alpha(c) || is_digit(c) || c == '+' || c == '.' || c == '-';
}
bool is_handle_char(char c) { return is_alpha(c) || is_digit(c) || c == '_'; }
bool is_ascii_punct(std::string_view unit) {
    if (unit.size() != 1) return false;
    const auto c = static_cast<unsigned char>(unit[0]);
    return (c >= 0x21 && c <= 0x2F) || (c >= 0x3A && c <= 0x40) || (c >= 0x5B && c <= 0x60) ||
           (c >= 0x7B && c <= 0x7E);
}

bool starts_www(std::string_view s, std::size_t i) {
    if (i + 4 > s.size()) return false;
    for (std::size_t k = 0; k < 3; ++k) {
        if (s[i + k] != 'w' && s[i + k] != 'W') return false;
    }
    return s[i + 3] == '.';
}

// URL = ([A-Za-z][A-Za-z0-9+.-]*://|www\.)\S*  (leftmost match)
std::string replace_urls(std::string_view s) {
    const std::size_t n = s.size();
    // scheme_end[i]: first index >= i that is not a scheme character
    std::vector<std::size_t> scheme_end(n + 1, n);
    for (std::size_t i = n; i-- > 0;) {
        scheme_end[i] = is_scheme_char(s[i]) ? scheme_end[i + 1] : i;
    }
    std::string out;
    out.reserve(n);
    std::size_t i = 0;
    while (i < n) {
        bool url = starts_www(s, i);
        if (!url && is_alpha(s[i])) {
            const std::size_t j = scheme_end[i];
            url = s.substr(j, 3) == "://";
        }
        if (url) {
            std::size_t end = i;
            while (end < n && !is_space(s[end])) ++end;
            out += kUrlToken;
            i = end;
        } else {
            out += s[i++];
        }
    }
    return out;
}

std::string replace_mentions(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    std::size_t i = 0;
    while (i < s.size()) {
        if (s[i] == '@' && i + 1 < s.size() && is_handle_char(s[i + 1])) {
            std::size_t end = i + 1;
            while (end < s.size() && is_handle_char(s[end])) ++end;
            out += kUserToken;
            i = end;
        } else {
            out += s[i++];
        }
    }
    return out;
}

// Rules 3-5 in one sweep over code-point units. Collapsing a run never merges
// its neighbours, so the sweep equals applying the rules one after another.
std::string collapse_runs(std::string_view s) {
    const auto units = utf8::units(s);
    std::string out;
    out.reserve(s.size());
    bool pending_space = false;
    std::size_t i = 0;
    while (i < units.size()) {
        const std::string_view u = units[i];
        if (u.size() == 1 && is_space(u[0])) {
            pending_space = !out.empty();
            ++i;
            continue;
        }
        std::size_t run = 1;
        while (i + run < units.size() && units[i + run] == u) ++run;
        if (pending_space) {
            out += ' ';
            pending_space = false;
        }
        const std::size_t keep = is_ascii_punct(u) ? 1 : std::min<std::size_t>(run, 3);
        for (std::size_t k = 0; k < keep; ++k) out += u;
        i += run;
    }
    return out;
}

}  // namespace

std::string normalize_once(std::string_view raw) {
    return collapse_runs(replace_mentions(replace_urls(raw)));
}

std::string normalize_text(std::string_view raw) {
    std::string current = normalize_once(raw);
    // Converges in at most a few passes; the bound only guards the loop.
    for (int pass = 0; pass < 16; ++pass) {
        std::string next = normalize_once(current);
        if (next == current) break;
        current = std::move(next);
    }
    return current;
}

std::vector<std::string> normalize_batch(std::span<const std::string> raw) {
    std::vector<std::string> out(raw.size());
    const auto n = static_cast<std::ptrdiff_t>(raw.size());
#pragma omp parallel for schedule(dynamic, 64) if (n > 256 && !in_parallel_region())
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        out[static_cast<std::size_t>(i)] = normalize_text(raw[static_cast<std::size_t>(i)]);
    }
    return out;
}

std::vector<std::string> normalize_batch_serial(std::span<const std::string> raw) {
    std::vector<std::string> out;
    out.reserve(raw.size());
    for (const auto& r : raw) out.push_back(normalize_text(r));
    return out;
}

}  // namespace srcsel::corpus
