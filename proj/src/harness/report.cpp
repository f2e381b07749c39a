#include "srcsel/harness/report.hpp"

#include <algorithm>
#include <ostream>

#include <fmt/format.h>
#include <fmt/ranges.h>

#include "json.hpp"
#include "srcsel/errors.hpp"

namespace srcsel::harness {
namespace {

using nlohmann::json;

std::vector<std::string> source_names(const selection::SelectionResult& r) {
    std::vector<std::string> out;
    for (const auto& s : r.positive_sources) out.push_back(s.language.code());
    return out;
}

std::string side(std::string_view name, const selection::SelectionResult* r) {
    if (!r || r->positive_sources.empty()) return fmt::format("{}: -", name);
    return fmt::format("{}: {}", name, fmt::join(source_names(*r), ", "));
}

const selection::SelectionResult* find_result(const std::vector<selection::SelectionResult>& v,
                                              const std::string& target) {
    for (const auto& r : v) {
        if (r.target.code() == target) return &r;
    }
    return nullptr;
}

std::vector<std::string> selection_targets(const Report& r) {
    std::vector<std::string> t;
    for (const auto& x : r.forward) t.push_back(x.target.code());
    for (const auto& x : r.backward) t.push_back(x.target.code());
    std::sort(t.begin(), t.end());
    t.erase(std::unique(t.begin(), t.end()), t.end());
    return t;
}

std::string cell_text(const SystemRow& row, const std::string& lang) {
    auto it = row.per_language.find(lang);
    return it == row.per_language.end() ? "-" : format_f1(it->second.f1);
}

void markdown(std::ostream& out, const Report& r) {
    if (!r.per_language.empty()) {
        out << "## Per-language weighted F1\n\n| System |";
        for (const auto& l : r.languages) out << ' ' << l << " |";
        out << " Avg |\n|---|";
        for (std::size_t i = 0; i <= r.languages.size(); ++i) out << "---:|";
        out << '\n';
        for (const auto& row : r.per_language) {
            out << "| " << row.system << " |";
            for (const auto& l : r.languages) out << ' ' << cell_text(row, l) << " |";
            out << ' ' << format_f1(row.average()) << " |\n";
        }
        out << '\n';
    }
    if (!r.strategies.empty()) {
        out << "## Strategy comparison\n\n| System | Overall F1 |\n|---|---:|\n";
        for (const auto& row : r.strategies) out << "| " << row.system << " | " << format_f1(row.overall()) << " |\n";
        out << '\n';
    }
    const auto targets = selection_targets(r);
    if (!targets.empty()) {
        out << "## Selected sources\n\n";
        for (const auto& t : targets) {
            out << "- " << source_row(t, find_result(r.forward, t), find_result(r.backward, t)) << '\n';
        }
        out << '\n';
    }
}

void tsv(std::ostream& out, const Report& r) {
    out << "system";
    for (const auto& l : r.languages) out << '\t' << l;
    out << "\tavg\n";
    for (const auto& row : r.per_language) {
        out << row.system;
        for (const auto& l : r.languages) out << '\t' << cell_text(row, l);
        out << '\t' << format_f1(row.average()) << '\n';
    }
    out << "\nsystem\toverall\n";
    for (const auto& row : r.strategies) out << row.system << '\t' << format_f1(row.overall()) << '\n';
    out << "\ntarget\tstrategy\tbaseline\tsources\n";
    for (const auto* list : {&r.forward, &r.backward}) {
        for (const auto& res : *list) out << res.to_report_row() << '\n';
    }
}

json row_json(const char* type, const SystemRow& row) {
    json j;
    j["type"] = type;
    j["system"] = row.system;
    json langs = json::object();
    for (const auto& [l, c] : row.per_language) langs[l] = {{"f1", c.f1}, {"eval_size", c.eval_size}};
    j["per_language"] = std::move(langs);
    j["average"] = row.average();
    j["overall"] = row.overall();
    return j;
}

json selection_json(const selection::SelectionResult& r) {
    json j;
    j["type"] = "selection";
    j["target"] = r.target.code();
    j["strategy"] = selection::short_name(r.strategy);
    j["mode"] = selection::to_string(r.mode);
    j["baseline"] = r.baseline_score;
    json pos = json::array();
    for (const auto& s : r.positive_sources) pos.push_back({{"language", s.language.code()}, {"score", s.score}, {"gain", s.gain}});
    j["positive_sources"] = std::move(pos);
    json rank = json::array();
    for (const auto& s : r.ranking) rank.push_back({{"language", s.language.code()}, {"score", s.score}, {"gain", s.gain}});
    j["ranking"] = std::move(rank);
    return j;
}

void jsonl(std::ostream& out, const Report& r) {
    r.matrix.write_jsonl(out);
    for (const auto& row : r.per_language) out << row_json("language_row", row).dump() << '\n';
    for (const auto& row : r.strategies) out << row_json("strategy_row", row).dump() << '\n';
    for (const auto* list : {&r.forward, &r.backward}) {
        for (const auto& res : *list) out << selection_json(res).dump() << '\n';
    }
}

}  // namespace

ReportFormat parse_report_format(std::string_view s) {
    if (s == "markdown" || s == "md") return ReportFormat::markdown;
    if (s == "tsv") return ReportFormat::tsv;
    if (s == "jsonl" || s == "json-lines") return ReportFormat::jsonl;
    throw UsageError(fmt::format("unknown report format '{}' (markdown|tsv|jsonl)", s));
}

double SystemRow::average() const {
    if (per_language.empty()) return 0.0;
    double sum = 0.0;
    for (const auto& [l, c] : per_language) sum += c.f1;
    return sum / static_cast<double>(per_language.size());
}

double SystemRow::overall() const {
    double sum = 0.0;
    std::size_t n = 0;
    for (const auto& [l, c] : per_language) {
        sum += c.f1 * static_cast<double>(c.eval_size);
        n += c.eval_size;
    }
    return n == 0 ? average() : sum / static_cast<double>(n);
}

std::string format_f1(double f1) { return fmt::format("{:.2f}", f1 * 100.0); }

std::string source_row(const std::string& target, const selection::SelectionResult* fwd,
                       const selection::SelectionResult* bwd) {
    return fmt::format("{} | {} | {}", target, side("fwd", fwd), side("bwd", bwd));
}

void write_report(std::ostream& out, const Report& report, ReportFormat format) {
    switch (format) {
        case ReportFormat::markdown: markdown(out, report); break;
        case ReportFormat::tsv: tsv(out, report); break;
        case ReportFormat::jsonl: jsonl(out, report); break;
    }
}

}  // namespace srcsel::harness
