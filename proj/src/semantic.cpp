// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The toposearch Authors

#include "toposearch/semantic.hpp"

#include "toposearch/error.hpp"
#include "toposearch/utf8.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <unordered_set>

namespace toposearch {

namespace {

constexpr char kMagic[4] = {'T', 'V', 'E', 'C'};
constexpr std::uint8_t kVersion = 0x01;

template <typename T>
void put_le(std::ostream& out, T v) {
    unsigned char buf[sizeof(T)];
    for (std::size_t i = 0; i < sizeof(T); ++i) buf[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xFF);
    out.write(reinterpret_cast<const char*>(buf), sizeof(T));
}

template <typename T>
T get_le(std::istream& in, const char* what) {
    unsigned char buf[sizeof(T)];
    if (!in.read(reinterpret_cast<char*>(buf), sizeof(T))) throw FormatError(std::string("truncated TVEC file: ") + what);
    T v = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) v |= static_cast<T>(buf[i]) << (8 * i);
    return v;
}

bool by_score_then_id(const SemanticHit& a, const SemanticHit& b) {
    if (a.sem_score != b.sem_score) return a.sem_score > b.sem_score;
    return a.doc_id < b.doc_id;
}

} // namespace

double l2_norm(std::span<const float> v) noexcept {
    double s = 0.0;
    for (float x : v) s += static_cast<double>(x) * x;
    return std::sqrt(s);
}

void normalize(std::span<float> v) {
    const double n = l2_norm(v);
    if (!(n > 0.0) || !std::isfinite(n)) throw InvalidArgument("cannot normalize a zero or non-finite vector");
    for (auto& x : v) x = static_cast<float>(x / n);
}

double dot(std::span<const float> a, std::span<const float> b) noexcept {
    double s = 0.0;
    const std::size_t n = std::min(a.size(), b.size());
    for (std::size_t i = 0; i < n; ++i) s += static_cast<double>(a[i]) * b[i];
    return s;
}

std::uint64_t fnv1a64(std::string_view bytes) noexcept {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (char c : bytes) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ULL;
    }
    return h;
}

Embedding hash_encode(std::string_view text, std::size_t dim) {
    if (dim == 0) throw InvalidArgument("embedding dimension must be positive");
    if (text.empty()) throw InvalidArgument("cannot encode empty text");
    const std::u32string lower = utf8::to_lower(std::u32string_view(utf8::decode(text)));

    std::vector<double> acc(dim, 0.0);
    auto add = [&](std::u32string_view gram) {
        const std::uint64_t h = fnv1a64(utf8::encode(gram));
        const double sign = (h >> 63) ? -1.0 : 1.0;
        acc[h % dim] += sign;
    };
    if (lower.size() < 2) {
        add(lower);
    } else {
        for (std::size_t n = 2; n <= 4; ++n) {
            for (std::size_t i = 0; i + n <= lower.size(); ++i) add(std::u32string_view(lower).substr(i, n));
        }
    }

    double norm = 0.0;
    for (double x : acc) norm += x * x;
    norm = std::sqrt(norm);
    Embedding e;
    e.values.resize(dim);
    if (norm == 0.0) {
        // Every gram cancelled out; fall back to a fixed unit vector so the
        // contract (unit norm, determinism) still holds.
        e.values[fnv1a64(text) % dim] = 1.0f;
        return e;
    }
    for (std::size_t i = 0; i < dim; ++i) e.values[i] = static_cast<float>(acc[i] / norm);
    return e;
}

HashingProvider::HashingProvider(std::size_t dim) : dim_(dim) {
    if (dim == 0) throw InvalidArgument("embedding dimension must be positive");
}

VectorTable read_vectors(std::istream& in) {
    char magic[4];
    if (!in.read(magic, 4) || std::memcmp(magic, kMagic, 4) != 0) throw FormatError("not a TVEC file (bad magic)");
    const auto version = get_le<std::uint8_t>(in, "version");
    if (version != kVersion) throw FormatError("unsupported TVEC version " + std::to_string(version));
    VectorTable table;
    table.dim = get_le<std::uint32_t>(in, "dim");
    if (table.dim == 0) throw FormatError("TVEC dim must be positive");
    const auto count = get_le<std::uint64_t>(in, "count");

    std::unordered_set<std::string> seen;
    for (std::uint64_t r = 0; r < count; ++r) {
        const auto id_len = get_le<std::uint32_t>(in, "id length");
        std::string id(id_len, '\0');
        if (id_len > 0 && !in.read(id.data(), id_len)) throw FormatError("truncated TVEC file: id bytes");
        if (!seen.insert(id).second) throw FormatError("duplicate id in TVEC file: " + id);
        const std::size_t base = table.values.size();
        table.values.resize(base + table.dim);
        for (std::size_t d = 0; d < table.dim; ++d) {
            table.values[base + d] = std::bit_cast<float>(get_le<std::uint32_t>(in, "vector values"));
        }
        std::span<float> row(table.values.data() + base, table.dim);
        const double n = l2_norm(row);
        if (!std::isfinite(n) || n == 0.0) throw FormatError("TVEC row '" + id + "' has zero or non-finite norm");
        if (std::abs(n - 1.0) > 1e-3) {
            normalize(row);
            table.warnings.push_back("row '" + id + "' had norm " + std::to_string(n) + "; normalized on load");
        }
        table.ids.push_back(std::move(id));
    }
    return table;
}

VectorTable load_vectors(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open vector file: " + path.string());
    return read_vectors(in);
}

void write_vectors(std::ostream& out, const VectorTable& table) {
    if (table.values.size() != table.ids.size() * table.dim) throw InvalidArgument("vector table shape mismatch");
    out.write(kMagic, 4);
    put_le<std::uint8_t>(out, kVersion);
    put_le<std::uint32_t>(out, static_cast<std::uint32_t>(table.dim));
    put_le<std::uint64_t>(out, static_cast<std::uint64_t>(table.ids.size()));
    for (std::size_t r = 0; r < table.ids.size(); ++r) {
        put_le<std::uint32_t>(out, static_cast<std::uint32_t>(table.ids[r].size()));
        out.write(table.ids[r].data(), static_cast<std::streamsize>(table.ids[r].size()));
        for (float v : table.row(r)) put_le<std::uint32_t>(out, std::bit_cast<std::uint32_t>(v));
    }
}

void write_vectors(const std::filesystem::path& path, const VectorTable& table) {
    const auto tmp = std::filesystem::path(path.string() + ".tmp");
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot write vector file: " + path.string());
        write_vectors(out, table);
        if (!out) throw IoError("write failed for vector file: " + path.string());
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) throw IoError("cannot move vector file into place: " + ec.message());
}

VectorFileProvider::VectorFileProvider(std::string name, VectorTable table)
    : name_(std::move(name)), table_(std::move(table)) {
    for (std::size_t i = 0; i < table_.ids.size(); ++i) by_text_.emplace(table_.ids[i], i);
}

Embedding VectorFileProvider::encode_query(std::string_view text) const {
    auto it = by_text_.find(std::string(text));
    if (it == by_text_.end()) throw NotFound("no precomputed vector for text: " + std::string(text));
    auto row = table_.row(it->second);
    Embedding e{std::vector<float>(row.begin(), row.end())};
    normalize(e.values);
    return e;
}

VectorIndex::VectorIndex(VectorTable table) : table_(std::move(table)) {
    if (table_.dim == 0) throw InvalidArgument("vector index dimension must be positive");
    if (table_.values.size() != table_.ids.size() * table_.dim) throw InvalidArgument("vector table shape mismatch");
    for (std::size_t i = 0; i < table_.ids.size(); ++i) {
        if (!by_id_.emplace(table_.ids[i], i).second) throw InvalidArgument("duplicate document id: " + table_.ids[i]);
        std::span<float> row(table_.values.data() + i * table_.dim, table_.dim);
        if (std::abs(l2_norm(row) - 1.0) > 1e-6) normalize(row);
    }
}

std::span<const float> VectorIndex::row(const std::string& id) const {
    auto it = by_id_.find(id);
    if (it == by_id_.end()) throw InvalidArgument("unknown document id: " + id);
    return table_.row(it->second);
}

void VectorIndex::check_query(const Embedding& query) const {
    if (query.dim() != table_.dim) {
        throw InvalidArgument("query dimension " + std::to_string(query.dim()) + " does not match index dimension " +
                              std::to_string(table_.dim));
    }
}

std::vector<SemanticHit> VectorIndex::top_k(const Embedding& query, std::size_t k) const {
    check_query(query);
    if (k == 0) throw InvalidArgument("k must be at least 1");
    std::vector<SemanticHit> all;
    all.reserve(size());
    for (std::size_t i = 0; i < size(); ++i) all.push_back({table_.ids[i], dot(query.values, table_.row(i))});
    const std::size_t n = std::min(k, all.size());
    std::partial_sort(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(n), all.end(), by_score_then_id);
    all.resize(n);
    return all;
}

std::vector<SemanticHit> VectorIndex::score_subset(const Embedding& query, std::span<const std::string> ids) const {
    check_query(query);
    std::vector<SemanticHit> out;
    out.reserve(ids.size());
    for (const auto& id : ids) {
        auto it = by_id_.find(id);
        if (it == by_id_.end()) throw InvalidArgument("unknown document id: " + id);
        out.push_back({id, dot(query.values, table_.row(it->second))});
    }
    return out;
}

VectorTable encode_all(const EmbeddingProvider& provider, std::span<const std::string> ids,
                       std::span<const std::string> texts) {
    if (ids.size() != texts.size()) throw InvalidArgument("ids and texts differ in length");
    VectorTable table;
    table.dim = provider.dim();
    table.ids.assign(ids.begin(), ids.end());
    table.values.reserve(ids.size() * table.dim);
    for (const auto& text : texts) {
        auto e = provider.encode_document(text);
        if (e.dim() != table.dim) throw InvalidArgument("provider returned a vector of the wrong dimension");
        table.values.insert(table.values.end(), e.values.begin(), e.values.end());
    }
    return table;
}

} // namespace toposearch
