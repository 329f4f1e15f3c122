// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The toposearch Authors

#pragma once

#include "toposearch/qagen.hpp"

#include <cstddef>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>

namespace toposearch {

/// Keyword rules in priority order: coordinates, region, etymology, sources,
/// physio, location, object type. Case-insensitive substring match.
std::optional<QaCategory> classify_question(std::string_view question);

struct ReaderAnswer {
    std::string text;
    long start = -1; // Unicode scalar offset; -1 means no answer
    std::optional<QaCategory> category_guess;
    std::string source_prefix;

    bool found() const noexcept { return start >= 0; }
};

/// Rule-based extractive reader: classify, find the category's prefix at a
/// segment boundary, return the text up to the next " | " or the end.
ReaderAnswer extract(std::string_view question, std::string_view context);

/// Post-processing for tokenizer artifacts, applied in order:
///  1. whitespace around '.' between digits is removed ("55. 175195" -> "55.175195");
///  2. whitespace around '-' between letters is removed ("северо - западу" -> "северо-западу");
///  3. whitespace right after an opening bracket, right before a closing
///     bracket, and before ',' is removed;
///  4. trim, and collapse whitespace runs to one space.
/// Idempotent.
std::string normalize_answer(std::string_view text);

/// 1 if the trimmed strings are equal (after normalize_answer when normalized).
int exact_match(std::string_view pred, std::string_view gold, bool normalized);

/// Token-multiset F1 over lowercased whitespace tokens. Both empty -> 1, one empty -> 0.
double token_f1(std::string_view pred, std::string_view gold, bool normalized);

struct CategoryMetrics {
    std::size_t count = 0;
    double exact_match = 0.0;
    double f1 = 0.0;
};

struct QaMetrics {
    bool normalized = false;
    std::size_t count = 0;
    double exact_match = 0.0;
    double f1 = 0.0;
    double mean_latency_ms = 0.0;
    std::map<QaCategory, CategoryMetrics> per_category;
};

/// A reader maps (question, context) to predicted answer text.
using ReaderFn = std::function<std::string(const QaPair&)>;

ReaderFn rule_based_reader();

/// Mean EM/F1 overall and per category plus mean wall-clock latency per
/// example. Throws InvalidArgument on an empty set.
QaMetrics evaluate_reader(std::span<const QaPair> pairs, const ReaderFn& reader, bool normalized);

} // namespace toposearch
