#include "srcsel/harness/matrix.hpp"

#include <atomic>
#include <cmath>
#include <istream>
#include <mutex>
#include <ostream>
#include <set>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "json.hpp"
#include "srcsel/errors.hpp"

namespace srcsel::harness {
namespace {

using nlohmann::json;

struct Unit {
    std::size_t spec_index;
    std::size_t seed_index;
};

struct Prepared {
    std::vector<ExperimentSpec> specs;  // deduplicated, plan order
    std::vector<std::string> keys;
    std::vector<Unit> units;
};

Prepared prepare(const Scorer& scorer, const std::vector<ExperimentSpec>& plan,
                 const std::vector<std::uint64_t>& seeds) {
    if (seeds.empty()) throw UsageError("seed list is empty");
    Prepared p;
    std::set<std::string> seen;
    for (const auto& spec : plan) {
        spec.validate();
        auto key = scorer.key(spec);
        if (!seen.insert(key).second) continue;
        p.specs.push_back(spec);
        p.keys.push_back(std::move(key));
    }
    for (std::size_t i = 0; i < p.specs.size(); ++i) {
        for (std::size_t j = 0; j < seeds.size(); ++j) p.units.push_back({i, j});
    }
    return p;
}

ScoreMatrix assemble(const Scorer& scorer, const Prepared& p, const std::vector<std::uint64_t>& seeds,
                     const std::vector<double>& scores) {
    ScoreMatrix m;
    for (std::size_t i = 0; i < p.specs.size(); ++i) {
        MatrixEntry e;
        e.spec = p.specs[i];
        e.key = p.keys[i];
        for (std::size_t j = 0; j < seeds.size(); ++j) e.per_seed.emplace_back(seeds[j], scores[i * seeds.size() + j]);
        e.eval_size = scorer.store().eval(e.spec.target, e.spec.eval_split).size();
        e.summarize();
        m.insert(std::move(e));
    }
    return m;
}

json spec_to_json(const ExperimentSpec& s) {
    json j;
    j["target"] = s.target;
    j["sources"] = s.sources;
    j["mode"] = selection::to_string(s.mode);
    j["adaptation"] = to_string(s.adaptation);
    j["learner"] = s.learner_digest;
    j["sample_cap"] = s.sample_cap ? json(*s.sample_cap) : json(nullptr);
    j["split"] = corpus::to_string(s.eval_split);
    return j;
}

ExperimentSpec spec_from_json(const json& j) {
    std::optional<std::size_t> cap;
    if (!j.at("sample_cap").is_null()) cap = j.at("sample_cap").get<std::size_t>();
    return ExperimentSpec::make(j.at("target").get<std::string>(), j.at("sources").get<std::vector<std::string>>(),
                                selection::parse_mode(j.at("mode").get<std::string>()),
                                parse_adaptation(j.at("adaptation").get<std::string>()),
                                j.at("learner").get<std::string>(), cap,
                                corpus::parse_split(j.at("split").get<std::string>()));
}

}  // namespace

void MatrixEntry::summarize() {
    double sum = 0.0;
    for (const auto& [seed, s] : per_seed) sum += s;
    const auto n = static_cast<double>(per_seed.size());
    mean = per_seed.empty() ? 0.0 : sum / n;
    double ss = 0.0;
    for (const auto& [seed, s] : per_seed) ss += (s - mean) * (s - mean);
    stddev = per_seed.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
}

void ScoreMatrix::insert(MatrixEntry entry) {
    for (const auto& [seed, s] : entry.per_seed) {
        if (!(s >= 0.0 && s <= 1.0)) throw DataError(fmt::format("score {} outside [0,1] for {}", s, entry.key));
    }
    auto key = entry.key;
    entries_.insert_or_assign(std::move(key), std::move(entry));
}

const MatrixEntry* ScoreMatrix::find(const std::string& key) const {
    auto it = entries_.find(key);
    return it == entries_.end() ? nullptr : &it->second;
}

const MatrixEntry& ScoreMatrix::at(const ExperimentSpec& spec, const std::string& fingerprint) const {
    if (const auto* e = find(spec.key(fingerprint))) return *e;
    throw ExperimentError(fmt::format("no scores for {}", spec.canonical()));
}

void ScoreMatrix::write_jsonl(std::ostream& out) const {
    for (const auto& [key, e] : entries_) {
        json j;
        j["type"] = "score";
        j["key"] = key;
        j["spec"] = spec_to_json(e.spec);
        json seeds = json::array();
        for (const auto& [seed, s] : e.per_seed) seeds.push_back(json::array({seed, s}));
        j["per_seed"] = std::move(seeds);
        j["mean"] = e.mean;
        j["stddev"] = e.stddev;
        j["eval_size"] = e.eval_size;
        out << j.dump() << '\n';
    }
}

ScoreMatrix ScoreMatrix::read_jsonl(std::istream& in) {
    ScoreMatrix m;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        try {
            const auto j = json::parse(line);
            // Reports interleave other record types; only score records belong to the matrix.
            if (j.contains("type") && j["type"] != "score") continue;
            MatrixEntry e;
            e.key = j.at("key").get<std::string>();
            e.spec = spec_from_json(j.at("spec"));
            for (const auto& p : j.at("per_seed")) e.per_seed.emplace_back(p.at(0).get<std::uint64_t>(), p.at(1).get<double>());
            e.mean = j.at("mean").get<double>();
            e.stddev = j.at("stddev").get<double>();
            e.eval_size = j.at("eval_size").get<std::size_t>();
            m.insert(std::move(e));
        } catch (const json::exception& ex) {
            throw DataError(fmt::format("matrix line {}: {}", lineno, ex.what()));
        }
    }
    return m;
}

ScoreMatrix run_matrix(Scorer& scorer, const std::vector<ExperimentSpec>& plan,
                       const std::vector<std::uint64_t>& seeds, int parallelism) {
    if (parallelism < 1) throw UsageError("parallelism must be >= 1");
    const Prepared p = prepare(scorer, plan, seeds);
    std::vector<double> scores(p.units.size(), 0.0);
    std::atomic<bool> abort{false};
    std::mutex fail_mu;
    std::vector<std::pair<std::size_t, std::string>> failures;
    const auto n = static_cast<std::int64_t>(p.units.size());

#pragma omp parallel for schedule(dynamic, 1) num_threads(parallelism)
    for (std::int64_t u = 0; u < n; ++u) {
        if (abort.load(std::memory_order_relaxed)) continue;
        const Unit unit = p.units[static_cast<std::size_t>(u)];
        try {
            scores[static_cast<std::size_t>(u)] = scorer.score(p.specs[unit.spec_index], seeds[unit.seed_index]);
        } catch (const std::exception& e) {
            abort.store(true);
            std::lock_guard lock(fail_mu);
            failures.emplace_back(static_cast<std::size_t>(u), e.what());
        }
    }

    if (!failures.empty()) {
        std::sort(failures.begin(), failures.end());
        std::string msg = fmt::format("{} experiment(s) failed:", failures.size());
        for (const auto& [u, what] : failures) msg += "\n  " + what;
        throw ExperimentError(msg);
    }
    return assemble(scorer, p, seeds, scores);
}

ScoreMatrix run_matrix_serial(Scorer& scorer, const std::vector<ExperimentSpec>& plan,
                              const std::vector<std::uint64_t>& seeds) {
    const Prepared p = prepare(scorer, plan, seeds);
    std::vector<double> scores;
    scores.reserve(p.units.size());
    for (const auto& unit : p.units) scores.push_back(scorer.score(p.specs[unit.spec_index], seeds[unit.seed_index]));
    return assemble(scorer, p, seeds, scores);
}

}  // namespace srcsel::harness
