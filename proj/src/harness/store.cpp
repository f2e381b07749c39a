#include "srcsel/harness/store.hpp"

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "srcsel/errors.hpp"
#include "srcsel/hash.hpp"

namespace srcsel::harness {
namespace {

std::uint64_t hash_dataset(const corpus::Dataset& ds, std::uint64_t h) {
    h = fnv1a64(ds.language().code(), h);
    h = fnv1a64(corpus::to_string(ds.split()), h);
    for (const auto& ex : ds.examples()) {
        h = fnv1a64(ex.id, h);
        h = fnv1a64("\t", h);
        h = fnv1a64(ex.text, h);
        h = fnv1a64(ex.label ? to_string(*ex.label) : "-", h);
        h = fnv1a64("\n", h);
    }
    return h;
}

}  // namespace

CorpusStore::CorpusStore(const HarnessConfig& config) {
    using corpus::Split;
    std::uint64_t h = kFnvOffset;
    for (const auto& e : config.languages) {
        LanguageData d{e.language, {}, {}, {}, {}, {}, 0, 0};
        corpus::LoadStats ls;
        if (e.train) {
            d.train = corpus::load_labeled_tsv(*e.train, e.language, Split::train, &ls);
            d.dropped_rows += ls.dropped_empty;
        }
        if (e.dev) {
            d.dev = corpus::load_labeled_tsv(*e.dev, e.language, Split::dev, &ls);
            d.dropped_rows += ls.dropped_empty;
            if (d.train) {
                auto dd = corpus::dedup_dev(*d.train, *d.dev);
                d.devstar = std::move(dd.devstar);
                d.dev_overlaps_removed = dd.removed;
            } else {
                d.devstar = corpus::Dataset(e.language, Split::devstar,
                                            {d.dev->examples().begin(), d.dev->examples().end()});
            }
        }
        if (e.test) {
            d.test = corpus::load_labeled_tsv(*e.test, e.language, Split::test, &ls);
            d.dropped_rows += ls.dropped_empty;
        }
        if (e.lapt) d.lapt = corpus::load_unlabeled_text(*e.lapt, e.language);

        for (const auto* ds : {&d.train, &d.dev, &d.test, &d.lapt}) {
            if (*ds) h = hash_dataset(**ds, h);
        }
        data_.emplace(e.language.code(), std::move(d));
    }
    const corpus::LanguageCode base_lang("base", "generic");
    for (const auto& p : config.base_corpus) {
        base_.push_back(corpus::load_unlabeled_text(p, base_lang));
        h = hash_dataset(base_.back(), h);
    }
    fingerprint_ = fmt::format("{:016x}", h);
}

const LanguageData& CorpusStore::language(std::string_view code) const {
    auto it = data_.find(std::string(code));
    if (it == data_.end()) throw DataError(fmt::format("unknown language '{}'", code));
    return it->second;
}

const corpus::Dataset& CorpusStore::train(std::string_view code) const {
    const auto& d = language(code);
    if (!d.train) throw DataError(fmt::format("language '{}' has no train split", code));
    return *d.train;
}

const corpus::Dataset& CorpusStore::eval(std::string_view code, corpus::Split split) const {
    const auto& d = language(code);
    const auto& ds = split == corpus::Split::test ? d.test : d.devstar;
    if (!ds) {
        throw DataError(fmt::format("language '{}' has no {} split", code, corpus::to_string(split)));
    }
    return *ds;
}

}  // namespace srcsel::harness
