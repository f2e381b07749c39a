#pragma once

#include <cstddef>
#include <iosfwd>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "srcsel/harness/matrix.hpp"
#include "srcsel/selection.hpp"

namespace srcsel::harness {

enum class ReportFormat : std::uint8_t { markdown, tsv, jsonl };
ReportFormat parse_report_format(std::string_view s);  // markdown|md|tsv|jsonl|json-lines

/// Score of one system on one target language.
struct Cell {
    double f1 = 0.0;  // weighted F1 in [0,1]
    std::size_t eval_size = 0;
};

struct SystemRow {
    std::string system;
    std::map<std::string, Cell> per_language;

    /// Unweighted mean over languages.
    double average() const;
    /// Mean weighted by evaluation-set size; approximates pooled F1.
    double overall() const;
};

struct Report {
    std::vector<std::string> languages;     // column order of the per-language table
    std::vector<SystemRow> per_language;    // one row per system, one column per language
    std::vector<SystemRow> strategies;      // system | overall
    std::vector<selection::SelectionResult> forward;   // per-target source columns
    std::vector<selection::SelectionResult> backward;
    ScoreMatrix matrix;
};

/// F1 scaled by 100 with two decimals ("74.78").
std::string format_f1(double f1);

/// `ha | fwd: kr, twi | bwd: dz` with "-" for an empty side.
std::string source_row(const std::string& target, const selection::SelectionResult* fwd,
                       const selection::SelectionResult* bwd);

void write_report(std::ostream& out, const Report& report, ReportFormat format);

}  // namespace srcsel::harness
