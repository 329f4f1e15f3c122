// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The toposearch Authors

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace toposearch {

/// Lowercase, split on every non-letter/non-digit, drop empties. No stemming.
std::vector<std::string> tokenize(std::string_view text);

struct Bm25Params {
    double k1 = 1.5;
    double b = 0.75;
};

struct LexicalHit {
    std::string doc_id;
    double score = 0.0;
};

/// BM25 with idf = ln((N - df + 0.5) / (df + 0.5) + 1).
class Bm25Index {
public:
    struct Posting {
        std::uint32_t doc = 0; // index into doc_ids(), postings ascend by it
        std::uint32_t tf = 0;
    };

    Bm25Index(std::span<const std::string> doc_ids, std::span<const std::string> texts, Bm25Params params = {});

    std::size_t size() const noexcept { return doc_ids_.size(); }
    double average_length() const noexcept { return avg_len_; }
    const Bm25Params& params() const noexcept { return params_; }
    const std::vector<std::string>& doc_ids() const noexcept { return doc_ids_; }

    double idf(std::string_view term) const;

    /// Descending score, ties by doc_id. Documents matching no query term are
    /// not returned.
    std::vector<LexicalHit> top_k(std::string_view query, std::size_t k) const;

private:
    Bm25Params params_;
    std::vector<std::string> doc_ids_;
    std::vector<std::uint32_t> lengths_;
    double avg_len_ = 0.0;
    std::unordered_map<std::string, std::vector<Posting>> postings_;
};

} // namespace toposearch
