// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The toposearch Authors

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace toposearch {

/// Dense vector; unit L2 norm once produced by a provider or loaded into an index.
struct Embedding {
    std::vector<float> values;

    std::size_t dim() const noexcept { return values.size(); }
};

/// L2 norm with double accumulation.
double l2_norm(std::span<const float> v) noexcept;
/// In-place L2 normalization. Throws InvalidArgument on a zero vector.
void normalize(std::span<float> v);
/// Dot product accumulated in double.
double dot(std::span<const float> a, std::span<const float> b) noexcept;

/// Maps text to embeddings. Implementations must be deterministic and
/// safe to call concurrently.
class EmbeddingProvider {
public:
    virtual ~EmbeddingProvider() = default;
    virtual std::string name() const = 0;
    virtual std::size_t dim() const = 0;
    virtual Embedding encode_query(std::string_view text) const = 0;
    virtual Embedding encode_document(std::string_view text) const = 0;
};

/// 64-bit FNV-1a.
std::uint64_t fnv1a64(std::string_view bytes) noexcept;

inline constexpr std::size_t kDefaultHashDim = 256;

/// Character 2/3/4-gram feature hashing over lowercased text: bucket is
/// hash % dim, sign is taken from hash bit 63, counts accumulate, result is
/// L2-normalized. Throws InvalidArgument on empty text or dim == 0.
Embedding hash_encode(std::string_view text, std::size_t dim = kDefaultHashDim);

class HashingProvider final : public EmbeddingProvider {
public:
    explicit HashingProvider(std::size_t dim = kDefaultHashDim);
    std::string name() const override { return "hashing"; }
    std::size_t dim() const override { return dim_; }
    Embedding encode_query(std::string_view text) const override { return hash_encode(text, dim_); }
    Embedding encode_document(std::string_view text) const override { return hash_encode(text, dim_); }

private:
    std::size_t dim_;
};

// ---------------------------------------------------------------------------
// TVEC vector file: "TVEC", version 0x01, u32 dim, u64 count, then count x
// [u32 id_len, id bytes, dim x f32]. All integers and floats little-endian.

struct VectorTable {
    std::size_t dim = 0;
    std::vector<std::string> ids;
    std::vector<float> values; // row-major, ids.size() x dim
    std::vector<std::string> warnings;

    std::span<const float> row(std::size_t i) const { return {values.data() + i * dim, dim}; }
};

/// Throws FormatError (bad magic/version, dim 0, duplicate id, truncation)
/// or IoError. Rows whose norm deviates from 1 by more than 1e-3 are
/// normalized and reported in warnings.
VectorTable load_vectors(const std::filesystem::path& path);
VectorTable read_vectors(std::istream& in);
void write_vectors(const std::filesystem::path& path, const VectorTable& table);
void write_vectors(std::ostream& out, const VectorTable& table);

/// Provider backed by precomputed vectors keyed by text (e.g. exported query
/// embeddings). encode_* throws NotFound for text without a vector.
class VectorFileProvider final : public EmbeddingProvider {
public:
    VectorFileProvider(std::string name, VectorTable table);
    std::string name() const override { return name_; }
    std::size_t dim() const override { return table_.dim; }
    Embedding encode_query(std::string_view text) const override;
    Embedding encode_document(std::string_view text) const override { return encode_query(text); }

private:
    std::string name_;
    VectorTable table_;
    std::unordered_map<std::string, std::size_t> by_text_;
};

struct SemanticHit {
    std::string doc_id;
    double sem_score = 0.0;
};

/// Exact (flat) inner-product index over unit-norm rows.
class VectorIndex {
public:
    /// Throws InvalidArgument on duplicate ids or shape mismatch; rows are
    /// normalized on construction.
    explicit VectorIndex(VectorTable table);

    std::size_t size() const noexcept { return table_.ids.size(); }
    std::size_t dim() const noexcept { return table_.dim; }
    bool contains(const std::string& id) const { return by_id_.count(id) != 0; }
    std::span<const float> row(const std::string& id) const;
    const std::vector<std::string>& ids() const noexcept { return table_.ids; }

    /// Top min(k, N) by descending dot product, ties by doc_id.
    std::vector<SemanticHit> top_k(const Embedding& query, std::size_t k) const;

    /// Dot products for exactly `ids`, in input order. Throws InvalidArgument
    /// naming the first unknown id.
    std::vector<SemanticHit> score_subset(const Embedding& query, std::span<const std::string> ids) const;

private:
    void check_query(const Embedding& query) const;

    VectorTable table_;
    std::unordered_map<std::string, std::size_t> by_id_;
};

/// Encodes every (id, text) pair with provider.encode_document.
VectorTable encode_all(const EmbeddingProvider& provider, std::span<const std::string> ids,
                       std::span<const std::string> texts);

} // namespace toposearch
