// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The toposearch Authors

#pragma once

#include "toposearch/geo.hpp"

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace toposearch {

enum class ToponymType { Toponym, Microtoponym };
enum class ToponymSubtype { None, Oikonym, Hydronym, Oronym };

std::string_view to_string(ToponymType t) noexcept;
std::string_view to_string(ToponymSubtype t) noexcept;

/// Coordinates plus the decimal text they were read from. The text is reused
/// verbatim in QA contexts so answers stay exact substrings.
struct Coordinates {
    GeoPoint point;
    std::string lat_text;
    std::string lon_text;
};

/// One gazetteer entry. Empty strings mean "no information".
struct ToponymRecord {
    std::string id;
    std::string url;
    std::optional<ToponymType> toponym_type;
    std::string toponym_type_label; // source wording, rendered in contexts
    ToponymSubtype toponym_subtype = ToponymSubtype::None;
    std::string toponym_subtype_label;
    std::string geographical_object;
    std::string name_rus;
    std::string name_tat;
    std::string federal_subject;
    std::string physio_details;
    std::string geographical_location;
    std::string etymology;
    std::string sources;
    std::optional<Coordinates> coordinates;
    bool has_map = false;

    /// name_rus if non-empty, else name_tat.
    const std::string& display_name() const noexcept { return name_rus.empty() ? name_tat : name_rus; }
};

struct Diagnostic {
    std::size_t line = 0; // 1-based input line, 0 when not line-bound
    std::string record_id;
    std::string field;
    std::string reason;
};

struct IngestResult {
    std::vector<ToponymRecord> records;
    std::vector<Diagnostic> diagnostics;
};

/// Reads one JSON object per line. Invalid lines and records yield
/// diagnostics and are skipped; nothing is repaired.
IngestResult ingest_records(std::istream& in);
/// Throws IoError when the file cannot be opened.
IngestResult ingest_file(const std::filesystem::path& path);

/// Checks the record invariants; returns one diagnostic per violation.
std::vector<Diagnostic> validate(const ToponymRecord& rec);

/// English-prefix retrieval context ("Name (rus): ... | Object: ..."),
/// coordinates excluded.
std::string assemble_retrieval_context(const ToponymRecord& rec);

enum class FieldCategory { NameRus, NameTat, ObjectType, Etymology, Location, Region, Physio, Sources, Coordinates };

std::string_view qa_prefix(FieldCategory c) noexcept;

struct FieldSegment {
    FieldCategory category;
    std::string prefix;
    std::string value;
    std::size_t start_of_value = 0; // Unicode scalar offset into the context
};

struct QaContext {
    std::string text;
    std::vector<FieldSegment> segments;
};

inline constexpr std::size_t kDefaultMaxContext = 2048;
inline constexpr std::string_view kSeparator = " | ";

/// Russian-prefix QA context with exact value offsets. Values are truncated
/// proportionally (prefixes kept) when the assembly exceeds max_len scalars.
QaContext assemble_qa_context(const ToponymRecord& rec, std::size_t max_len = kDefaultMaxContext);

/// Retrieval unit derived from a record.
struct IndexedDocument {
    std::string doc_id;
    std::string context;
    std::optional<GeoPoint> point;
    std::string display_name;
};

IndexedDocument make_document(const ToponymRecord& rec);

// Corpus directory: records.jsonl (canonical records) + manifest.json.

inline constexpr int kCorpusSchemaVersion = 1;

struct CorpusManifest {
    int schema_version = kCorpusSchemaVersion;
    std::size_t record_count = 0;
    std::size_t with_coordinates = 0;
};

std::string record_to_json_line(const ToponymRecord& rec);
CorpusManifest write_corpus(const std::filesystem::path& dir, const std::vector<ToponymRecord>& records);
/// Throws IoError / FormatError.
std::vector<ToponymRecord> read_corpus(const std::filesystem::path& dir);

/// Accepts either a corpus directory or a line-delimited record file.
/// Throws FormatError if a corpus directory contains invalid records.
IngestResult load_records(const std::filesystem::path& path);

} // namespace toposearch
