#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

#include <fmt/format.h>

#include "srcsel/errors.hpp"
#include "srcsel/textmodel.hpp"

// Binary container, little-endian:
//   "SRCSELM1"  config  stats(num_documents, tag, sparse df)  weights  bias  loss_history
namespace srcsel::textmodel {
namespace {

static_assert(std::endian::native == std::endian::little, "model files are little-endian");

constexpr char kMagic[8] = {'S', 'R', 'C', 'S', 'E', 'L', 'M', '1'};

template <typename T>
void put(std::ostream& out, const T& value) {
    out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T get(std::istream& in) {
    T value{};
    if (!in.read(reinterpret_cast<char*>(&value), sizeof(T))) {
        throw DataError("model file truncated");
    }
    return value;
}

void put_string(std::ostream& out, const std::string& s) {
    put<std::uint32_t>(out, static_cast<std::uint32_t>(s.size()));
    out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::string get_string(std::istream& in) {
    const auto n = get<std::uint32_t>(in);
    std::string s(n, '\0');
    if (!in.read(s.data(), n)) throw DataError("model file truncated");
    return s;
}

}  // namespace

void save_model(std::ostream& out, const Model& model) {
    const auto& c = model.config;
    out.write(kMagic, sizeof kMagic);
    put<std::int32_t>(out, c.ngram_min);
    put<std::int32_t>(out, c.ngram_max);
    put<std::uint32_t>(out, c.hash_buckets);
    put<double>(out, c.l2_lambda);
    put<double>(out, c.learning_rate);
    put<double>(out, c.lr_decay);
    put<std::int32_t>(out, c.batch_size);
    put<std::int32_t>(out, c.epochs);
    put<std::uint64_t>(out, c.seed);

    put<std::uint64_t>(out, model.stats.num_documents());
    put_string(out, model.stats.source_tag());
    const auto entries = model.stats.entries();
    put<std::uint64_t>(out, entries.size());
    for (const auto& [bucket, df] : entries) {
        put<std::uint32_t>(out, bucket);
        put<std::uint32_t>(out, df);
    }

    put<std::uint64_t>(out, model.weights.size());
    out.write(reinterpret_cast<const char*>(model.weights.data()),
              static_cast<std::streamsize>(model.weights.size() * sizeof(double)));
    for (double b : model.bias) put<double>(out, b);
    put<std::uint64_t>(out, model.loss_history.size());
    for (double l : model.loss_history) put<double>(out, l);
    if (!out) throw DataError("failed writing model");
}

Model load_model(std::istream& in) {
    char magic[8];
    if (!in.read(magic, sizeof magic) || std::memcmp(magic, kMagic, sizeof magic) != 0) {
        throw DataError("not a model file (bad magic)");
    }
    LearnerConfig c;
    c.ngram_min = get<std::int32_t>(in);
    c.ngram_max = get<std::int32_t>(in);
    c.hash_buckets = get<std::uint32_t>(in);
    c.l2_lambda = get<double>(in);
    c.learning_rate = get<double>(in);
    c.lr_decay = get<double>(in);
    c.batch_size = get<std::int32_t>(in);
    c.epochs = get<std::int32_t>(in);
    c.seed = get<std::uint64_t>(in);
    try {
        c.validate();
    } catch (const UsageError& e) {
        throw DataError(fmt::format("model file has invalid config: {}", e.what()));
    }

    const auto docs = get<std::uint64_t>(in);
    std::string tag = get_string(in);
    const auto n_entries = get<std::uint64_t>(in);
    std::vector<std::uint32_t> df(c.hash_buckets, 0);
    for (std::uint64_t i = 0; i < n_entries; ++i) {
        const auto bucket = get<std::uint32_t>(in);
        const auto count = get<std::uint32_t>(in);
        if (bucket >= c.hash_buckets) throw DataError("model file: bucket out of range");
        df[bucket] = count;
    }
    Model m = Model::zeros(c, AdaptationStats(c.space(), std::move(df), docs, std::move(tag)));

    const auto n_weights = get<std::uint64_t>(in);
    if (n_weights != m.weights.size()) throw DataError("model file: weight count mismatch");
    if (!in.read(reinterpret_cast<char*>(m.weights.data()),
                 static_cast<std::streamsize>(n_weights * sizeof(double)))) {
        throw DataError("model file truncated");
    }
    for (auto& b : m.bias) b = get<double>(in);
    const auto n_loss = get<std::uint64_t>(in);
    for (std::uint64_t i = 0; i < n_loss; ++i) m.loss_history.push_back(get<double>(in));
    return m;
}

void save_model(const std::filesystem::path& path, const Model& model) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError(fmt::format("cannot write '{}'", path.string()));
    save_model(out, model);
}

Model load_model(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError(fmt::format("cannot open '{}'", path.string()));
    return load_model(in);
}

}  // namespace srcsel::textmodel
