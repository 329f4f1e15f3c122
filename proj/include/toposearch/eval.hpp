// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The toposearch Authors

#pragma once

#include "toposearch/corpus.hpp"
#include "toposearch/hybrid.hpp"
#include "toposearch/metrics.hpp"

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace toposearch {

enum class QueryLanguage { Rus, Tat };

struct EvalQuery {
    std::string query_text;
    std::string gold_doc_id;
    std::optional<GeoPoint> point;
    QueryLanguage language_used = QueryLanguage::Rus;
    std::optional<ToponymType> toponym_type;
};

/// Retrieval query templates: the three listed in the source protocol plus two
/// local additions ("Что известно о {name}?", "Где расположен {name}?").
const std::vector<std::string>& eval_query_templates();

struct EvalQueryOptions {
    std::uint64_t seed = 42;
    double russian_probability = 0.7;
    double jitter_m = 0.0; // uniform displacement of the anchor within this radius
};

struct EvalQuerySets {
    std::vector<EvalQuery> test;
    std::vector<EvalQuery> validation;
};

/// Samples n_test + n_validation distinct coordinate-bearing records (seeded,
/// without replacement) and renders one query for each. The two sets never
/// share a record. Throws InvalidArgument if too few records have coordinates.
EvalQuerySets generate_eval_query_sets(std::span<const ToponymRecord> records, std::size_t n_test,
                                       std::size_t n_validation, const EvalQueryOptions& options = {});

/// The test half of generate_eval_query_sets(records, n, 0, options).
std::vector<EvalQuery> generate_eval_queries(std::span<const ToponymRecord> records, std::size_t n,
                                             const EvalQueryOptions& options = {});

struct MetricWithCI {
    std::string name; // "recall@1", ..., "mrr"
    BootstrapCI ci;
};

struct TypeRecall {
    std::string toponym_type;
    std::size_t queries = 0;
    double recall_at_1 = 0.0;
};

struct QueryTrace {
    std::string query_text;
    std::string gold_doc_id;
    std::optional<std::size_t> gold_rank;
    std::vector<std::string> returned;
    std::vector<std::string> diagnostics;
};

struct MethodReport {
    Method method = Method::Hybrid;
    std::vector<MetricWithCI> metrics; // recall@k for each k, then mrr
    std::vector<TypeRecall> recall_at_1_by_type;
    std::size_t failed_queries = 0; // queries the method could not run
    std::vector<QueryTrace> trace;

    const BootstrapCI& metric(const std::string& name) const;
};

struct EvalParams {
    double alpha = kDefaultAlpha;
    double radius_m = kDefaultRadiusM;
    std::vector<std::size_t> k_list{1, 3, 5};
    std::size_t resamples = kDefaultResamples;
    std::uint64_t seed = 42;
};

struct RetrievalReport {
    EvalParams params;
    std::size_t query_count = 0;
    std::vector<MethodReport> methods;

    const MethodReport& method(Method m) const;
};

inline const std::vector<Method> kAllMethods{Method::Bm25, Method::SpatialOnly, Method::SemanticOnly, Method::Hybrid};

/// Runs every method on every query (k = max of k_list) and aggregates
/// Recall@k and MRR with bootstrap CIs. A method that cannot run a query
/// counts it as a miss and records a diagnostic in the trace.
RetrievalReport compare_methods(const HybridSearcher& searcher, std::span<const EvalQuery> queries,
                                std::span<const Method> methods, const EvalParams& params);

std::string report_to_json(const RetrievalReport& report, bool include_trace = false);
/// Plain-text table: Method | Recall@1 | Recall@3 | Recall@5 | MRR, each
/// "value [lower, upper]".
std::string report_to_table(const RetrievalReport& report);

std::vector<LabeledQuery> to_labeled(std::span<const EvalQuery> queries);

} // namespace toposearch
