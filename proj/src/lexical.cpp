// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The toposearch Authors

#include "toposearch/lexical.hpp"

#include "toposearch/error.hpp"
#include "toposearch/utf8.hpp"

#include <algorithm>
#include <cmath>

namespace toposearch {

std::vector<std::string> tokenize(std::string_view text) {
    std::vector<std::string> tokens;
    std::string current;
    for (char32_t cp : utf8::decode(text)) {
        if (utf8::is_letter(cp) || utf8::is_digit(cp)) {
            utf8::append(current, utf8::to_lower(cp));
        } else if (!current.empty()) {
            tokens.push_back(std::move(current));
            current.clear();
        }
    }
    if (!current.empty()) tokens.push_back(std::move(current));
    return tokens;
}

Bm25Index::Bm25Index(std::span<const std::string> doc_ids, std::span<const std::string> texts, Bm25Params params)
    : params_(params), doc_ids_(doc_ids.begin(), doc_ids.end()) {
    if (doc_ids.size() != texts.size()) throw InvalidArgument("doc_ids and texts differ in length");
    lengths_.reserve(texts.size());
    double total = 0.0;
    for (std::uint32_t d = 0; d < texts.size(); ++d) {
        const auto tokens = tokenize(texts[d]);
        lengths_.push_back(static_cast<std::uint32_t>(tokens.size()));
        total += static_cast<double>(tokens.size());
        std::unordered_map<std::string, std::uint32_t> tf;
        for (const auto& t : tokens) ++tf[t];
        for (auto& [term, count] : tf) postings_[term].push_back(Posting{d, count});
    }
    avg_len_ = texts.empty() ? 0.0 : total / static_cast<double>(texts.size());
}

double Bm25Index::idf(std::string_view term) const {
    auto it = postings_.find(std::string(term));
    const double df = it == postings_.end() ? 0.0 : static_cast<double>(it->second.size());
    const double n = static_cast<double>(size());
    return std::log((n - df + 0.5) / (df + 0.5) + 1.0);
}

std::vector<LexicalHit> Bm25Index::top_k(std::string_view query, std::size_t k) const {
    if (k == 0) throw InvalidArgument("k must be at least 1");
    std::vector<double> scores(size(), 0.0);
    std::vector<bool> matched(size(), false);
    // Repeated query terms contribute once per occurrence.
    for (const auto& term : tokenize(query)) {
        auto it = postings_.find(term);
        if (it == postings_.end()) continue;
        const double w = idf(term);
        for (const auto& p : it->second) {
            const double tf = p.tf;
            const double norm = params_.k1 * (1.0 - params_.b + params_.b * lengths_[p.doc] / avg_len_);
            scores[p.doc] += w * tf * (params_.k1 + 1.0) / (tf + norm);
            matched[p.doc] = true;
        }
    }
    std::vector<LexicalHit> hits;
    for (std::size_t d = 0; d < size(); ++d) {
        if (matched[d]) hits.push_back({doc_ids_[d], scores[d]});
    }
    auto cmp = [](const LexicalHit& a, const LexicalHit& b) {
        if (a.score != b.score) return a.score > b.score;
        return a.doc_id < b.doc_id;
    };
    const std::size_t n = std::min(k, hits.size());
    std::partial_sort(hits.begin(), hits.begin() + static_cast<std::ptrdiff_t>(n), hits.end(), cmp);
    hits.resize(n);
    return hits;
}

} // namespace toposearch
