#include "srcsel/harness/config.hpp"

#include <cstdlib>
#include <fstream>
#include <set>

#include <fmt/format.h>

#include "srcsel/errors.hpp"

namespace srcsel::harness {
namespace {

using nlohmann::json;
namespace fs = std::filesystem;

void reject_unknown(const json& obj, std::initializer_list<std::string_view> known, std::string_view where) {
    for (const auto& [key, value] : obj.items()) {
        bool ok = false;
        for (auto k : known) ok = ok || key == k;
        if (!ok) throw UsageError(fmt::format("config: unknown key '{}' in {}", key, where));
    }
}

fs::path resolve(const fs::path& base, const json& v) {
    fs::path p = v.get<std::string>();
    return p.is_absolute() ? p : base / p;
}

std::optional<fs::path> opt_path(const json& obj, const char* key, const fs::path& base) {
    if (!obj.contains(key) || obj[key].is_null()) return std::nullopt;
    return resolve(base, obj[key]);
}

template <typename T>
void read_if(const json& obj, const char* key, T& out) {
    if (obj.contains(key) && !obj[key].is_null()) out = obj[key].get<T>();
}

}  // namespace

std::string_view to_string(Adaptation a) noexcept {
    switch (a) {
        case Adaptation::none: return "none";
        case Adaptation::tapt: return "tapt";
        case Adaptation::lapt: return "lapt";
        case Adaptation::lapt_tapt: return "lapt+tapt";
    }
    return "?";
}

std::string_view display_suffix(Adaptation a) noexcept {
    switch (a) {
        case Adaptation::none: return "";
        case Adaptation::tapt: return " + TAPT";
        case Adaptation::lapt: return " + LAPT";
        case Adaptation::lapt_tapt: return " + LAPT & TAPT";
    }
    return "";
}

Adaptation parse_adaptation(std::string_view s) {
    for (auto a : {Adaptation::none, Adaptation::tapt, Adaptation::lapt, Adaptation::lapt_tapt}) {
        if (s == to_string(a)) return a;
    }
    if (s == "TAPT") return Adaptation::tapt;
    if (s == "LAPT") return Adaptation::lapt;
    if (s == "LAPT+TAPT") return Adaptation::lapt_tapt;
    throw UsageError(fmt::format("unknown adaptation '{}' (expected none, tapt, lapt, lapt+tapt)", s));
}

HarnessConfig HarnessConfig::from_json(const json& doc, const fs::path& base_dir) {
    try {
        reject_unknown(doc,
                       {"languages", "metadata", "base_corpus", "learner", "selection", "report",
                        "sample_seed", "parallelism", "cache_dir"},
                       "top level");
        HarnessConfig cfg;

        std::vector<corpus::LanguageCode> metadata;
        if (auto meta = opt_path(doc, "metadata", base_dir)) {
            metadata = corpus::load_language_metadata(*meta);
        }
        if (!doc.contains("languages") || !doc["languages"].is_array()) {
            throw UsageError("config: 'languages' must be an array");
        }
        for (const auto& l : doc["languages"]) {
            reject_unknown(l, {"code", "family", "subgroup", "train", "dev", "test", "lapt"}, "language entry");
            const std::string code = l.at("code").get<std::string>();
            std::string family;
            std::optional<std::string> subgroup;
            for (const auto& m : metadata) {
                if (m.code() == code) {
                    family = m.family();
                    subgroup = m.subgroup();
                }
            }
            read_if(l, "family", family);
            if (l.contains("subgroup") && !l["subgroup"].is_null()) subgroup = l["subgroup"].get<std::string>();
            cfg.languages.push_back(LanguageEntry{corpus::LanguageCode(code, family, subgroup),
                                                  opt_path(l, "train", base_dir), opt_path(l, "dev", base_dir),
                                                  opt_path(l, "test", base_dir), opt_path(l, "lapt", base_dir)});
        }
        if (doc.contains("base_corpus")) {
            const auto& b = doc["base_corpus"];
            if (b.is_string()) {
                cfg.base_corpus.push_back(resolve(base_dir, b));
            } else {
                for (const auto& p : b) cfg.base_corpus.push_back(resolve(base_dir, p));
            }
        }
        if (doc.contains("learner")) {
            const auto& j = doc["learner"];
            reject_unknown(j, {"ngram_min", "ngram_max", "hash_buckets", "l2_lambda", "learning_rate",
                               "lr_decay", "batch_size", "epochs"},
                           "learner");
            auto& lc = cfg.learner;
            read_if(j, "ngram_min", lc.ngram_min);
            read_if(j, "ngram_max", lc.ngram_max);
            read_if(j, "hash_buckets", lc.hash_buckets);
            read_if(j, "l2_lambda", lc.l2_lambda);
            read_if(j, "learning_rate", lc.learning_rate);
            read_if(j, "lr_decay", lc.lr_decay);
            read_if(j, "batch_size", lc.batch_size);
            read_if(j, "epochs", lc.epochs);
        }
        if (doc.contains("selection")) {
            const auto& j = doc["selection"];
            reject_unknown(j, {"threshold", "threshold_kind", "baseline_samples_per_language", "top_k",
                               "seeds", "mode", "adaptation", "targets"},
                           "selection");
            auto& sc = cfg.selection;
            read_if(j, "threshold", sc.threshold);
            if (j.contains("threshold_kind")) {
                const auto k = j["threshold_kind"].get<std::string>();
                if (k == "relative") {
                    sc.threshold_kind = selection::ThresholdKind::relative;
                } else if (k == "absolute") {
                    sc.threshold_kind = selection::ThresholdKind::absolute;
                } else {
                    throw UsageError(fmt::format("config: threshold_kind '{}' is not relative|absolute", k));
                }
            }
            read_if(j, "baseline_samples_per_language", sc.baseline_samples_per_language);
            if (j.contains("top_k") && !j["top_k"].is_null()) sc.top_k = j["top_k"].get<std::size_t>();
            read_if(j, "seeds", sc.seeds);
            if (j.contains("mode")) sc.mode = selection::parse_mode(j["mode"].get<std::string>());
            if (j.contains("adaptation")) {
                cfg.selection_adaptation = parse_adaptation(j["adaptation"].get<std::string>());
            }
            read_if(j, "targets", cfg.targets);
        }
        if (doc.contains("report")) {
            const auto& j = doc["report"];
            reject_unknown(j, {"adaptations", "split"}, "report");
            if (j.contains("adaptations")) {
                cfg.report_adaptations.clear();
                for (const auto& a : j["adaptations"]) {
                    cfg.report_adaptations.push_back(parse_adaptation(a.get<std::string>()));
                }
            }
            if (j.contains("split")) cfg.report_split = corpus::parse_split(j["split"].get<std::string>());
        }
        read_if(doc, "sample_seed", cfg.sample_seed);
        read_if(doc, "parallelism", cfg.parallelism);
        // null disables the persistent cache
        if (!doc.contains("cache_dir")) {
            cfg.cache_dir = base_dir / ".srcsel-cache";
        } else if (!doc["cache_dir"].is_null()) {
            cfg.cache_dir = resolve(base_dir, doc["cache_dir"]);
        }
        cfg.validate();
        return cfg;
    } catch (const json::exception& e) {
        throw UsageError(fmt::format("config: {}", e.what()));
    }
}

HarnessConfig HarnessConfig::load(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw UsageError(fmt::format("cannot open config '{}'", path.string()));
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::exception& e) {
        throw UsageError(fmt::format("config '{}': {}", path.string(), e.what()));
    }
    auto cfg = from_json(doc, fs::absolute(path).parent_path());
    if (const char* env = std::getenv(kCacheDirEnv); env && *env) cfg.cache_dir = env;
    return cfg;
}

const LanguageEntry& HarnessConfig::entry(std::string_view code) const {
    for (const auto& e : languages) {
        if (e.language.code() == code) return e;
    }
    throw DataError(fmt::format("unknown language '{}'", code));
}

void HarnessConfig::validate() const {
    if (languages.empty()) throw UsageError("config: no languages");
    std::set<std::string> seen;
    for (const auto& e : languages) {
        if (!seen.insert(e.language.code()).second) {
            throw UsageError(fmt::format("config: language '{}' listed twice", e.language.code()));
        }
        if (!e.dev && !e.test) {
            throw UsageError(fmt::format("config: language '{}' needs a dev or test file", e.language.code()));
        }
    }
    for (const auto& t : targets) {
        if (!seen.contains(t)) throw UsageError(fmt::format("config: target '{}' is not a configured language", t));
    }
    learner.validate();
    selection.validate();
    if (parallelism < 1) throw UsageError("config: parallelism must be >= 1");
    if (report_adaptations.empty()) throw UsageError("config: report.adaptations is empty");
}

}  // namespace srcsel::harness
