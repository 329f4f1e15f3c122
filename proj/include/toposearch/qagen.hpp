// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The toposearch Authors

#pragma once

#include "toposearch/corpus.hpp"

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace toposearch {

/// Question categories, in the order their fields appear in QA contexts.
enum class QaCategory { ObjectType, Etymology, Location, Region, Physio, Sources, Coordinates };

inline constexpr std::array<QaCategory, 7> kQaCategories{
    QaCategory::ObjectType, QaCategory::Etymology, QaCategory::Location, QaCategory::Region,
    QaCategory::Physio,     QaCategory::Sources,   QaCategory::Coordinates};

/// Identifier form used in pair ids: object_type, etymology, location, region,
/// physio, sources, coordinates.
std::string_view to_string(QaCategory c) noexcept;
std::optional<QaCategory> parse_category(std::string_view name) noexcept;
FieldCategory source_field(QaCategory c) noexcept;

struct QuestionTemplate {
    QaCategory category;
    std::string pattern; // contains "{name}" exactly once
};

const std::vector<QuestionTemplate>& builtin_templates();

struct QaPair {
    std::string id; // <record_id>_<category>_<n>
    std::string context;
    std::string question;
    std::string answer_text;
    std::size_t answer_start = 0; // Unicode scalar offset
    QaCategory category = QaCategory::ObjectType;
};

/// True when context[answer_start, answer_start + len(answer_text)) == answer_text.
bool answer_span_valid(const QaPair& pair);

inline constexpr std::size_t kDefaultMaxPerRecord = 10;

/// One pair per category with a non-empty source field; the template is drawn
/// uniformly with an RNG seeded from (seed, record id).
std::vector<QaPair> generate_pairs(const ToponymRecord& rec, std::uint64_t seed,
                                   std::size_t max_per_record = kDefaultMaxPerRecord,
                                   std::size_t max_context = kDefaultMaxContext);

std::vector<QaPair> generate_corpus(std::span<const ToponymRecord> records, std::uint64_t seed,
                                    std::size_t max_per_record = kDefaultMaxPerRecord,
                                    std::size_t max_context = kDefaultMaxContext);

struct QaSplit {
    std::vector<QaPair> train;
    std::vector<QaPair> validation;
};

/// Stratified by category: seeded shuffle per category, ceil(n * fraction)
/// pairs to train. Both halves keep the input order.
QaSplit split_corpus(std::span<const QaPair> pairs, double train_fraction, std::uint64_t seed);

/// SQuAD v1.1 shaped document (data -> paragraphs -> qas -> answers).
void emit_squad(std::span<const QaPair> pairs, std::ostream& out);
/// One JSON object per line: id, context, question, answers, category.
void emit_flat(std::span<const QaPair> pairs, std::ostream& out);

enum class QaFormat { Squad, Flat };
/// Writes atomically (temp file + rename). Throws IoError.
void write_qa_file(std::span<const QaPair> pairs, const std::filesystem::path& path, QaFormat format);

/// Reads either format (detected from content). The category comes from the
/// "category" field or, failing that, from the id. Throws FormatError/IoError.
std::vector<QaPair> read_qa_file(const std::filesystem::path& path);
std::vector<QaPair> parse_qa(std::istream& in);

} // namespace toposearch
