// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The toposearch Authors

#pragma once

#include "toposearch/corpus.hpp"
#include "toposearch/geo.hpp"
#include "toposearch/lexical.hpp"
#include "toposearch/semantic.hpp"

#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace toposearch {

enum class Method { Hybrid, SemanticOnly, SpatialOnly, Bm25 };

std::string_view to_string(Method m) noexcept;
/// Accepts hybrid|semantic|spatial|bm25. Throws InvalidArgument otherwise.
Method parse_method(std::string_view name);

inline constexpr double kDefaultRadiusM = 50'000.0;
inline constexpr double kDefaultAlpha = 0.1;
inline constexpr std::size_t kDefaultK = 5;

struct SearchQuery {
    std::string text;
    std::optional<GeoPoint> point;
    double radius_m = kDefaultRadiusM;
    double alpha = kDefaultAlpha;
    std::size_t k = kDefaultK;
    Method method = Method::Hybrid;
};

/// One ranked result with every intermediate score that produced it.
struct ScoredHit {
    std::string doc_id;
    std::size_t rank = 0; // 1-based
    std::optional<double> sem_score;
    std::optional<double> distance_m;
    std::optional<double> geo_score;
    std::optional<double> sem_norm;
    std::optional<double> geo_norm;
    double combined = 0.0;
};

struct SearchResult {
    Method method = Method::Hybrid; // method actually executed
    std::vector<ScoredHit> hits;
    std::vector<std::string> diagnostics;
};

// Scoring primitives. Each throws InvalidArgument when its precondition fails.

/// exp(-distance / radius), for 0 <= distance <= radius.
double geo_score(double distance_m, double radius_m);
/// (s - min) / (max - min); all ones when max - min < 1e-9.
std::vector<double> min_max_normalize(std::span<const double> scores);
/// s / max(s) for strictly positive scores.
std::vector<double> max_normalize(std::span<const double> scores);
/// alpha * sem_norm + (1 - alpha) * geo_norm.
double combine(double sem_norm, double geo_norm, double alpha);

inline constexpr double kDegenerateRange = 1e-9;

/// Read-only search engine over one document snapshot: spatial KD-tree,
/// flat vector index and BM25 index.
class HybridSearcher {
public:
    /// Embeds documents with provider unless doc_vectors is given (it must
    /// cover every document id).
    HybridSearcher(std::vector<IndexedDocument> docs, std::shared_ptr<const EmbeddingProvider> provider,
                   std::optional<VectorTable> doc_vectors = std::nullopt);

    SearchResult search(const SearchQuery& query) const;

    const std::vector<IndexedDocument>& documents() const noexcept { return docs_; }
    const IndexedDocument* find(const std::string& doc_id) const;
    const SpatialIndex& spatial() const noexcept { return spatial_; }
    const VectorIndex& vectors() const noexcept { return vectors_; }
    const Bm25Index& lexical() const noexcept { return lexical_; }
    const EmbeddingProvider& provider() const noexcept { return *provider_; }

private:
    SearchResult search_hybrid(const SearchQuery& q) const;
    SearchResult search_semantic(const SearchQuery& q) const;
    SearchResult search_spatial(const SearchQuery& q) const;
    SearchResult search_bm25(const SearchQuery& q) const;

    std::vector<IndexedDocument> docs_;
    std::unordered_map<std::string, std::size_t> by_id_;
    std::shared_ptr<const EmbeddingProvider> provider_;
    SpatialIndex spatial_;
    VectorIndex vectors_;
    Bm25Index lexical_;
};

/// Validation query with its single relevant document.
struct LabeledQuery {
    SearchQuery query;
    std::string gold_doc_id;
};

struct AlphaScore {
    double alpha = 0.0;
    double mean_recall_at_5 = 0.0;
};

struct GridSearchResult {
    double best_alpha = 0.0;
    std::vector<AlphaScore> table;
};

inline const std::vector<double> kDefaultAlphaGrid{0.1, 0.3, 0.5, 0.7, 0.9};

/// Runs Hybrid search (k = 5, fixed radius) at every grid value and returns the
/// alpha maximizing mean Recall@5; ties go to the smallest alpha.
GridSearchResult grid_search_alpha(const HybridSearcher& searcher, std::span<const LabeledQuery> queries,
                                   std::span<const double> grid, double radius_m);

} // namespace toposearch
