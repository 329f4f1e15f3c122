// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The toposearch Authors

#pragma once

#include "toposearch/corpus.hpp"
#include "toposearch/error.hpp"
#include "toposearch/eval.hpp"
#include "toposearch/hybrid.hpp"
#include "toposearch/reader.hpp"

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace toposearch {

/// Invalid request parameter. `field` names the offending key.
class ParamError : public InvalidArgument {
public:
    ParamError(std::string field, const std::string& message)
        : InvalidArgument(field + ": " + message), field_(std::move(field)) {}
    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

enum class EmbedderKind { Hashing, VectorFile };

struct EngineConfig {
    std::filesystem::path corpus;
    std::optional<EmbedderKind> embedder; // unset: taken from index.json, else hashing
    std::filesystem::path vectors;        // document TVEC (vector-file embedder)
    std::filesystem::path query_vectors;  // TVEC keyed by query text
    std::optional<std::size_t> dim;
    double radius_m = kDefaultRadiusM;
    double alpha = kDefaultAlpha;
    std::size_t k = kDefaultK;
    int port = 8080;
    std::uint64_t seed = 42;
};

/// Builds a config from a JSON object. A "config_file" key names a JSON file
/// whose keys are applied first; every other key in `json_text` overrides it.
/// Keys: corpus, embedder (hashing|file), vectors, query_vectors, dim,
/// radius_m, alpha, k, port, seed. Throws ParamError / FormatError / IoError.
EngineConfig parse_engine_config(const std::string& json_text);

/// Result of the `index` step.
struct IndexSummary {
    EmbedderKind embedder = EmbedderKind::Hashing;
    std::size_t dim = 0;
    std::size_t documents = 0;
    std::vector<std::string> warnings;
};

/// Encodes (or validates the supplied vectors of) every document and writes
/// vectors.tvec and index.json into the corpus directory.
IndexSummary build_index(const EngineConfig& config);
std::string index_summary_to_json(const IndexSummary& summary);

/// Immutable snapshot of a corpus with all indexes. Safe for concurrent use.
class Engine {
public:
    explicit Engine(EngineConfig config);

    const EngineConfig& config() const noexcept { return config_; }
    const HybridSearcher& searcher() const noexcept { return *searcher_; }
    const std::vector<ToponymRecord>& records() const noexcept { return records_; }
    const ToponymRecord* record(const std::string& id) const;

    /// Parses request parameters (a JSON object; numbers may be given as
    /// strings). Keys: q, lat, lon, radius_m, alpha, k, method. Missing keys
    /// take the config defaults. Throws ParamError.
    SearchQuery parse_search(const std::string& params_json) const;

    // Structured (JSON) responses shared by the CLI and the HTTP service.
    std::string search_json(const std::string& params_json) const;
    /// Keys: question, lat, lon, radius_m, alpha. Top-1 hybrid retrieval,
    /// then the rule-based reader over that record's QA context.
    std::string ask_json(const std::string& params_json) const;
    /// Throws NotFound.
    std::string doc_json(const std::string& id) const;
    std::string stats_json() const;

private:
    EngineConfig config_;
    std::vector<ToponymRecord> records_;
    std::unordered_map<std::string, std::size_t> by_id_;
    std::vector<std::string> load_warnings_;
    std::string embedder_name_;
    std::unique_ptr<HybridSearcher> searcher_;
};

std::string search_result_to_text(const std::string& search_json);
std::string ask_result_to_text(const std::string& ask_json);

// Command-level operations. Each takes and returns JSON text.

/// {input, out} -> ingest summary with diagnostics.
std::string run_ingest(const std::string& params_json);
/// {n, seed, methods, bootstrap, alpha, radius_m, jitter_m, trace} -> report.
/// The plain-text table is stored in `table`.
std::string run_eval_retrieval(const Engine& engine, const std::string& params_json, std::string& table);
/// {alphas, n_val, n_test, radius_m, seed} -> per-alpha table and winner.
std::string run_grid_search(const Engine& engine, const std::string& params_json);
/// {input, out_train, out_val, seed, max_per_record, max_context,
/// train_fraction, format} -> summary.
std::string run_generate_qa(const std::string& params_json);
/// {qa, normalize, predictions} -> reader report. Predictions may be a JSON
/// object {id: text} or JSONL lines {"id", "prediction"}; missing ids count
/// as empty answers.
std::string run_eval_reader(const std::string& params_json);
std::string reader_report_to_text(const std::string& report_json);

} // namespace toposearch
