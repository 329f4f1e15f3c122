// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The toposearch Authors

#include "toposearch/hybrid.hpp"

#include "toposearch/error.hpp"
#include "toposearch/metrics.hpp"

#include <algorithm>
#include <cmath>

namespace toposearch {

namespace {

void check_unit(double v, const char* what) {
    if (!(v >= 0.0 && v <= 1.0)) throw InvalidArgument(std::string(what) + " must lie in [0, 1]");
}

void check_query(const SearchQuery& q) {
    check_unit(q.alpha, "alpha");
    if (!(q.radius_m > 0.0) || !std::isfinite(q.radius_m)) throw InvalidArgument("radius_m must be positive");
    if (q.k == 0) throw InvalidArgument("k must be at least 1");
    if (q.point && !q.point->valid()) throw InvalidArgument("query point outside latitude/longitude range");
    if (q.method != Method::SpatialOnly && q.text.empty()) throw InvalidArgument("query text must not be empty");
}

// Descending combined, ties by doc_id; truncate to k and assign ranks.
void finish(std::vector<ScoredHit>& hits, std::size_t k) {
    std::sort(hits.begin(), hits.end(), [](const ScoredHit& a, const ScoredHit& b) {
        if (a.combined != b.combined) return a.combined > b.combined;
        return a.doc_id < b.doc_id;
    });
    if (hits.size() > k) hits.resize(k);
    for (std::size_t i = 0; i < hits.size(); ++i) hits[i].rank = i + 1;
}

std::vector<SpatialEntry> spatial_entries(const std::vector<IndexedDocument>& docs) {
    std::vector<SpatialEntry> out;
    for (const auto& d : docs) {
        if (d.point) out.push_back({d.doc_id, *d.point});
    }
    return out;
}

std::vector<std::string> ids_of(const std::vector<IndexedDocument>& docs) {
    std::vector<std::string> out;
    out.reserve(docs.size());
    for (const auto& d : docs) out.push_back(d.doc_id);
    return out;
}

std::vector<std::string> contexts_of(const std::vector<IndexedDocument>& docs) {
    std::vector<std::string> out;
    out.reserve(docs.size());
    for (const auto& d : docs) out.push_back(d.context);
    return out;
}

VectorTable select_vectors(const std::vector<IndexedDocument>& docs, const EmbeddingProvider& provider,
                           std::optional<VectorTable> given) {
    const auto ids = ids_of(docs);
    if (!given) return encode_all(provider, ids, contexts_of(docs));
    if (given->dim != provider.dim()) {
        throw InvalidArgument("document vectors have dim " + std::to_string(given->dim) + " but the query provider has " +
                              std::to_string(provider.dim()));
    }
    // Reorder to document order; every document needs a vector.
    std::unordered_map<std::string, std::size_t> row_of;
    for (std::size_t i = 0; i < given->ids.size(); ++i) row_of.emplace(given->ids[i], i);
    VectorTable table;
    table.dim = given->dim;
    table.ids = ids;
    table.values.reserve(ids.size() * table.dim);
    for (const auto& id : ids) {
        auto it = row_of.find(id);
        if (it == row_of.end()) throw InvalidArgument("no vector for document id: " + id);
        auto row = given->row(it->second);
        table.values.insert(table.values.end(), row.begin(), row.end());
    }
    return table;
}

} // namespace

std::string_view to_string(Method m) noexcept {
    switch (m) {
    case Method::Hybrid: return "hybrid";
    case Method::SemanticOnly: return "semantic";
    case Method::SpatialOnly: return "spatial";
    case Method::Bm25: return "bm25";
    }
    return "hybrid";
}

Method parse_method(std::string_view name) {
    if (name == "hybrid") return Method::Hybrid;
    if (name == "semantic") return Method::SemanticOnly;
    if (name == "spatial") return Method::SpatialOnly;
    if (name == "bm25") return Method::Bm25;
    throw InvalidArgument("unknown method '" + std::string(name) + "' (expected hybrid|semantic|spatial|bm25)");
}

double geo_score(double distance_m, double radius_m) {
    if (!(radius_m > 0.0)) throw InvalidArgument("radius_m must be positive");
    if (!(distance_m >= 0.0 && distance_m <= radius_m)) throw InvalidArgument("distance_m must lie in [0, radius_m]");
    return std::exp(-distance_m / radius_m);
}

std::vector<double> min_max_normalize(std::span<const double> scores) {
    if (scores.empty()) throw InvalidArgument("cannot normalize an empty score list");
    const auto [lo, hi] = std::minmax_element(scores.begin(), scores.end());
    const double range = *hi - *lo;
    std::vector<double> out(scores.size(), 1.0);
    if (range < kDegenerateRange) return out;
    for (std::size_t i = 0; i < scores.size(); ++i) out[i] = (scores[i] - *lo) / range;
    return out;
}

std::vector<double> max_normalize(std::span<const double> scores) {
    if (scores.empty()) throw InvalidArgument("cannot normalize an empty score list");
    const double hi = *std::max_element(scores.begin(), scores.end());
    for (double s : scores) {
        if (!(s > 0.0)) throw InvalidArgument("max_normalize requires strictly positive scores");
    }
    std::vector<double> out;
    out.reserve(scores.size());
    for (double s : scores) out.push_back(s / hi);
    return out;
}

double combine(double sem_norm, double geo_norm, double alpha) {
    check_unit(sem_norm, "sem_norm");
    check_unit(geo_norm, "geo_norm");
    check_unit(alpha, "alpha");
    return alpha * sem_norm + (1.0 - alpha) * geo_norm;
}

HybridSearcher::HybridSearcher(std::vector<IndexedDocument> docs, std::shared_ptr<const EmbeddingProvider> provider,
                               std::optional<VectorTable> doc_vectors)
    : docs_(std::move(docs)),
      provider_(std::move(provider)),
      spatial_(spatial_entries(docs_)),
      vectors_(select_vectors(docs_, *provider_, std::move(doc_vectors))),
      lexical_(ids_of(docs_), contexts_of(docs_)) {
    for (std::size_t i = 0; i < docs_.size(); ++i) {
        if (docs_[i].context.empty()) throw InvalidArgument("document '" + docs_[i].doc_id + "' has an empty context");
        by_id_.emplace(docs_[i].doc_id, i);
    }
}

const IndexedDocument* HybridSearcher::find(const std::string& doc_id) const {
    auto it = by_id_.find(doc_id);
    return it == by_id_.end() ? nullptr : &docs_[it->second];
}

SearchResult HybridSearcher::search(const SearchQuery& query) const {
    check_query(query);
    switch (query.method) {
    case Method::Hybrid:
        if (!query.point) {
            auto r = search_semantic(query);
            r.diagnostics.insert(r.diagnostics.begin(),
                                 "no query point given; hybrid search degraded to semantic-only ranking");
            return r;
        }
        return search_hybrid(query);
    case Method::SemanticOnly: return search_semantic(query);
    case Method::SpatialOnly:
        if (!query.point) throw InvalidArgument("spatial search requires a query point");
        return search_spatial(query);
    case Method::Bm25: return search_bm25(query);
    }
    return {};
}

SearchResult HybridSearcher::search_hybrid(const SearchQuery& q) const {
    SearchResult result;
    result.method = Method::Hybrid;
    auto spatial = spatial_.radius_query(*q.point, q.radius_m);
    result.diagnostics = std::move(spatial.diagnostics);
    if (spatial.hits.empty()) {
        result.diagnostics.emplace_back("no-candidates: no document lies within the search radius");
        return result;
    }

    std::vector<std::string> ids;
    ids.reserve(spatial.hits.size());
    for (const auto& h : spatial.hits) ids.push_back(h.doc_id);
    const auto semantic = vectors_.score_subset(provider_->encode_query(q.text), ids);

    std::vector<double> sem(semantic.size());
    std::vector<double> geo(spatial.hits.size());
    for (std::size_t i = 0; i < ids.size(); ++i) {
        sem[i] = semantic[i].sem_score;
        geo[i] = geo_score(spatial.hits[i].distance_m, q.radius_m);
    }
    const auto sem_norm = min_max_normalize(sem);
    const auto geo_norm = max_normalize(geo);

    result.hits.reserve(ids.size());
    for (std::size_t i = 0; i < ids.size(); ++i) {
        ScoredHit h;
        h.doc_id = ids[i];
        h.sem_score = sem[i];
        h.distance_m = spatial.hits[i].distance_m;
        h.geo_score = geo[i];
        h.sem_norm = sem_norm[i];
        h.geo_norm = geo_norm[i];
        h.combined = combine(sem_norm[i], geo_norm[i], q.alpha);
        result.hits.push_back(std::move(h));
    }
    finish(result.hits, q.k);
    return result;
}

SearchResult HybridSearcher::search_semantic(const SearchQuery& q) const {
    SearchResult result;
    result.method = Method::SemanticOnly;
    for (auto& s : vectors_.top_k(provider_->encode_query(q.text), q.k)) {
        ScoredHit h;
        h.doc_id = std::move(s.doc_id);
        h.sem_score = s.sem_score;
        h.combined = s.sem_score;
        const auto& doc = docs_[by_id_.at(h.doc_id)];
        if (q.point && doc.point) h.distance_m = haversine_m(*q.point, *doc.point);
        result.hits.push_back(std::move(h));
    }
    finish(result.hits, q.k);
    return result;
}

SearchResult HybridSearcher::search_spatial(const SearchQuery& q) const {
    SearchResult result;
    result.method = Method::SpatialOnly;
    auto spatial = spatial_.radius_query(*q.point, q.radius_m);
    result.diagnostics = std::move(spatial.diagnostics);
    // radius_query is already ordered by (distance, doc_id).
    for (auto& s : spatial.hits) {
        if (result.hits.size() == q.k) break;
        ScoredHit h;
        h.doc_id = std::move(s.doc_id);
        h.distance_m = s.distance_m;
        h.geo_score = geo_score(s.distance_m, q.radius_m);
        h.combined = *h.geo_score;
        h.rank = result.hits.size() + 1;
        result.hits.push_back(std::move(h));
    }
    return result;
}

SearchResult HybridSearcher::search_bm25(const SearchQuery& q) const {
    SearchResult result;
    result.method = Method::Bm25;
    for (auto& s : lexical_.top_k(q.text, q.k)) {
        ScoredHit h;
        h.doc_id = std::move(s.doc_id);
        h.combined = s.score;
        const auto& doc = docs_[by_id_.at(h.doc_id)];
        if (q.point && doc.point) h.distance_m = haversine_m(*q.point, *doc.point);
        result.hits.push_back(std::move(h));
    }
    finish(result.hits, q.k);
    return result;
}

GridSearchResult grid_search_alpha(const HybridSearcher& searcher, std::span<const LabeledQuery> queries,
                                   std::span<const double> grid, double radius_m) {
    if (grid.empty()) throw InvalidArgument("alpha grid must not be empty");
    if (queries.empty()) throw InvalidArgument("grid search needs at least one validation query");
    GridSearchResult out;
    for (double alpha : grid) {
        check_unit(alpha, "alpha");
        double sum = 0.0;
        for (const auto& lq : queries) {
            SearchQuery q = lq.query;
            q.method = Method::Hybrid;
            q.alpha = alpha;
            q.radius_m = radius_m;
            q.k = 5;
            const auto r = searcher.search(q);
            std::vector<std::string> ranked;
            for (const auto& h : r.hits) ranked.push_back(h.doc_id);
            sum += recall_at_k(ranked, lq.gold_doc_id, 5);
        }
        out.table.push_back({alpha, sum / static_cast<double>(queries.size())});
    }
    const AlphaScore* best = &out.table.front();
    for (const auto& row : out.table) {
        if (row.mean_recall_at_5 > best->mean_recall_at_5 ||
            (row.mean_recall_at_5 == best->mean_recall_at_5 && row.alpha < best->alpha)) {
            best = &row;
        }
    }
    out.best_alpha = best->alpha;
    return out;
}

} // namespace toposearch
