// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The toposearch Authors

#include "toposearch/corpus.hpp"

#include "toposearch/error.hpp"
#include "toposearch/utf8.hpp"

#include <json.hpp>

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <sstream>
#include <unordered_set>

namespace toposearch {

namespace {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

// DOM builder that keeps every number as its source text, so coordinates
// survive ingestion without reformatting.
class RawNumberDom : public nlohmann::detail::json_sax_dom_parser<json> {
public:
    using Base = nlohmann::detail::json_sax_dom_parser<json>;
    using Base::Base;

    bool number_integer(json::number_integer_t v) {
        std::string s = std::to_string(v);
        return Base::string(s);
    }
    bool number_unsigned(json::number_unsigned_t v) {
        std::string s = std::to_string(v);
        return Base::string(s);
    }
    bool number_float(json::number_float_t, const json::string_t& raw) {
        std::string s = raw;
        return Base::string(s);
    }
};

json parse_line(const std::string& line) {
    json out;
    RawNumberDom dom(out, true);
    json::sax_parse(line, &dom);
    return out;
}

std::string trim(std::string_view s) {
    const auto* ws = " \t\r\n\f\v";
    const auto b = s.find_first_not_of(ws);
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(ws);
    return std::string(s.substr(b, e - b + 1));
}

// Values never contain the field separator; '|' is mapped to '/'.
std::string sanitize(std::string_view v) {
    std::string out(v);
    std::replace(out.begin(), out.end(), '|', '/');
    return out;
}

std::string lower_trim(std::string_view s) { return utf8::to_lower(trim(s)); }

struct FieldError {
    std::string field;
    std::string reason;
};

std::string text_field(const json& obj, std::initializer_list<const char*> keys, std::vector<FieldError>& errors) {
    for (const char* key : keys) {
        auto it = obj.find(key);
        if (it == obj.end() || it->is_null()) continue;
        if (it->is_string()) return trim(it->get_ref<const std::string&>());
        if (it->is_array()) {
            std::string joined;
            for (const auto& item : *it) {
                if (!item.is_string()) {
                    errors.push_back({key, "array items must be strings"});
                    return {};
                }
                auto t = trim(item.get_ref<const std::string&>());
                if (t.empty()) continue;
                if (!joined.empty()) joined += "; ";
                joined += t;
            }
            return joined;
        }
        errors.push_back({key, "expected a string"});
        return {};
    }
    return {};
}

std::optional<ToponymType> parse_type(const std::string& label) {
    const auto l = lower_trim(label);
    if (l == "toponym" || l == "топоним") return ToponymType::Toponym;
    if (l == "microtoponym" || l == "микротопоним") return ToponymType::Microtoponym;
    return std::nullopt;
}

std::optional<ToponymSubtype> parse_subtype(const std::string& label) {
    const auto l = lower_trim(label);
    if (l.empty() || l == "none" || l == "no type" || l == "нет типа" || l == "без типа" || l == "нет")
        return ToponymSubtype::None;
    if (l == "oikonym" || l == "ойконим") return ToponymSubtype::Oikonym;
    if (l == "hydronym" || l == "гидроним") return ToponymSubtype::Hydronym;
    if (l == "oronym" || l == "ороним") return ToponymSubtype::Oronym;
    return std::nullopt;
}

std::optional<double> parse_decimal(const std::string& text) {
    double v = 0.0;
    const char* b = text.data();
    const char* e = text.data() + text.size();
    if (b != e && *b == '+') ++b;
    auto [ptr, ec] = std::from_chars(b, e, v, std::chars_format::general);
    if (ec != std::errc{} || ptr != e || !std::isfinite(v)) return std::nullopt;
    return v;
}

bool parse_flag(const json& obj, std::vector<FieldError>& errors) {
    auto it = obj.find("has_map");
    if (it == obj.end() || it->is_null()) return false;
    if (it->is_boolean()) return it->get<bool>();
    if (it->is_string()) {
        const auto l = lower_trim(it->get_ref<const std::string&>());
        if (l == "true" || l == "1" || l == "yes" || l == "да") return true;
        if (l.empty() || l == "false" || l == "0" || l == "no" || l == "нет") return false;
    }
    errors.push_back({"has_map", "expected a boolean"});
    return false;
}

struct Field {
    FieldCategory category;
    std::string_view prefix;
    std::string value;
};

std::vector<Field> qa_fields(const ToponymRecord& rec) {
    std::vector<Field> fields;
    auto add = [&](FieldCategory c, const std::string& v) {
        if (!v.empty()) fields.push_back({c, qa_prefix(c), sanitize(v)});
    };
    add(FieldCategory::NameRus, rec.name_rus);
    add(FieldCategory::NameTat, rec.name_tat);
    add(FieldCategory::ObjectType, rec.geographical_object);
    add(FieldCategory::Etymology, rec.etymology);
    add(FieldCategory::Location, rec.geographical_location);
    add(FieldCategory::Region, rec.federal_subject);
    add(FieldCategory::Physio, rec.physio_details);
    add(FieldCategory::Sources, rec.sources);
    if (rec.coordinates) {
        add(FieldCategory::Coordinates, rec.coordinates->lat_text + ", " + rec.coordinates->lon_text);
    }
    return fields;
}

std::string type_label(const ToponymRecord& rec) {
    if (!rec.toponym_type_label.empty()) return rec.toponym_type_label;
    return rec.toponym_type ? std::string(to_string(*rec.toponym_type)) : std::string{};
}

std::string subtype_label(const ToponymRecord& rec) {
    if (!rec.toponym_subtype_label.empty()) return rec.toponym_subtype_label;
    return rec.toponym_subtype == ToponymSubtype::None ? std::string{} : std::string(to_string(rec.toponym_subtype));
}

} // namespace

std::string_view to_string(ToponymType t) noexcept {
    return t == ToponymType::Toponym ? "Toponym" : "Microtoponym";
}

std::string_view to_string(ToponymSubtype t) noexcept {
    switch (t) {
    case ToponymSubtype::Oikonym: return "Oikonym";
    case ToponymSubtype::Hydronym: return "Hydronym";
    case ToponymSubtype::Oronym: return "Oronym";
    case ToponymSubtype::None: break;
    }
    return "None";
}

std::string_view qa_prefix(FieldCategory c) noexcept {
    switch (c) {
    case FieldCategory::NameRus: return "Название (рус): ";
    case FieldCategory::NameTat: return "Название (тат): ";
    case FieldCategory::ObjectType: return "Объект: ";
    case FieldCategory::Etymology: return "Этимология: ";
    case FieldCategory::Location: return "Расположение: ";
    case FieldCategory::Region: return "Регион: ";
    case FieldCategory::Physio: return "Физико-географические сведения: ";
    case FieldCategory::Sources: return "Источники: ";
    case FieldCategory::Coordinates: return "Координаты: ";
    }
    return "";
}

std::vector<Diagnostic> validate(const ToponymRecord& rec) {
    std::vector<Diagnostic> out;
    auto fail = [&](std::string field, std::string reason) {
        out.push_back(Diagnostic{0, rec.id, std::move(field), std::move(reason)});
    };
    if (rec.id.empty()) fail("id", "missing identifier");
    if (rec.name_rus.empty() && rec.name_tat.empty()) fail("name_rus", "both name_rus and name_tat are empty");
    if (rec.coordinates) {
        const auto& p = rec.coordinates->point;
        if (!(p.lat_deg >= -90.0 && p.lat_deg <= 90.0)) fail("latitude", "latitude outside [-90, 90]");
        if (!(p.lon_deg >= -180.0 && p.lon_deg <= 180.0)) fail("longitude", "longitude outside [-180, 180]");
    }
    return out;
}

IngestResult ingest_records(std::istream& in) {
    IngestResult result;
    std::unordered_set<std::string> seen;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        json obj;
        try {
            obj = parse_line(line);
        } catch (const json::exception& e) {
            result.diagnostics.push_back({line_no, "", "", std::string("malformed JSON: ") + e.what()});
            continue;
        }
        if (!obj.is_object()) {
            result.diagnostics.push_back({line_no, "", "", "line is not a JSON object"});
            continue;
        }

        std::vector<FieldError> errors;
        ToponymRecord rec;
        rec.id = text_field(obj, {"id"}, errors);
        rec.url = text_field(obj, {"url"}, errors);
        rec.toponym_type_label = text_field(obj, {"toponym_type"}, errors);
        rec.toponym_subtype_label = text_field(obj, {"toponym_subtype"}, errors);
        rec.geographical_object = text_field(obj, {"geographical_object"}, errors);
        rec.name_rus = text_field(obj, {"name_rus"}, errors);
        rec.name_tat = text_field(obj, {"name_tat"}, errors);
        rec.federal_subject = text_field(obj, {"federal_subject"}, errors);
        rec.physio_details = text_field(obj, {"physio_details", "physiographic_details"}, errors);
        rec.geographical_location = text_field(obj, {"geographical_location"}, errors);
        rec.etymology = text_field(obj, {"etymology"}, errors);
        rec.sources = text_field(obj, {"sources", "bibliographic_sources"}, errors);
        rec.has_map = parse_flag(obj, errors);

        if (!rec.toponym_type_label.empty()) {
            rec.toponym_type = parse_type(rec.toponym_type_label);
            if (!rec.toponym_type) errors.push_back({"toponym_type", "unknown toponym type '" + rec.toponym_type_label + "'"});
        }
        if (auto st = parse_subtype(rec.toponym_subtype_label)) {
            rec.toponym_subtype = *st;
        } else {
            errors.push_back({"toponym_subtype", "unknown toponym subtype '" + rec.toponym_subtype_label + "'"});
        }

        const auto lat_text = text_field(obj, {"latitude", "lat"}, errors);
        const auto lon_text = text_field(obj, {"longitude", "lon"}, errors);
        if (!lat_text.empty() || !lon_text.empty()) {
            if (lat_text.empty() || lon_text.empty()) {
                errors.push_back({lat_text.empty() ? "latitude" : "longitude",
                                  "latitude and longitude must be both present or both absent"});
            } else {
                auto lat = parse_decimal(lat_text);
                auto lon = parse_decimal(lon_text);
                if (!lat) errors.push_back({"latitude", "not a decimal number: '" + lat_text + "'"});
                if (!lon) errors.push_back({"longitude", "not a decimal number: '" + lon_text + "'"});
                if (lat && lon) rec.coordinates = Coordinates{GeoPoint{*lat, *lon}, lat_text, lon_text};
            }
        }

        for (auto& d : validate(rec)) errors.push_back({d.field, d.reason});
        if (errors.empty() && !seen.insert(rec.id).second) errors.push_back({"id", "duplicate identifier"});

        if (!errors.empty()) {
            for (auto& e : errors) result.diagnostics.push_back({line_no, rec.id, e.field, e.reason});
            continue;
        }
        result.records.push_back(std::move(rec));
    }
    if (in.bad()) throw IoError("read error while ingesting records");
    return result;
}

IngestResult ingest_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open record file: " + path.string());
    return ingest_records(in);
}

std::string assemble_retrieval_context(const ToponymRecord& rec) {
    const std::array<std::pair<std::string_view, std::string>, 9> fields{{
        {"Name (rus)", rec.name_rus},
        {"Name (tat)", rec.name_tat},
        {"Type", type_label(rec)},
        {"Subtype", subtype_label(rec)},
        {"Object", rec.geographical_object},
        {"Etymology", rec.etymology},
        {"Details", rec.physio_details},
        {"Location", rec.geographical_location},
        {"Sources", rec.sources},
    }};
    std::string out;
    for (const auto& [prefix, value] : fields) {
        if (value.empty()) continue;
        if (!out.empty()) out += kSeparator;
        out += prefix;
        out += ": ";
        out += sanitize(value);
    }
    return out;
}

QaContext assemble_qa_context(const ToponymRecord& rec, std::size_t max_len) {
    const auto fields = qa_fields(rec);
    const std::size_t sep_len = utf8::length(kSeparator);

    std::vector<std::u32string> values;
    std::size_t fixed = 0; // prefixes + separators
    for (std::size_t i = 0; i < fields.size(); ++i) {
        values.push_back(utf8::decode(fields[i].value));
        fixed += utf8::length(fields[i].prefix) + (i > 0 ? sep_len : 0);
    }
    if (fixed > max_len) {
        throw InvalidArgument("max_len " + std::to_string(max_len) + " cannot hold the " + std::to_string(fixed) +
                              " characters of prefixes and separators");
    }

    auto total = [&] {
        std::size_t n = fixed;
        for (const auto& v : values) n += v.size();
        return n;
    };

    // Proportional truncation: value_len * max_len / current_len, repeated
    // until the assembly fits.
    std::size_t current = total();
    for (int pass = 0; current > max_len && pass < 64; ++pass) {
        for (auto& v : values) v.resize(v.size() * max_len / current);
        current = total();
    }
    if (current > max_len) {
        std::size_t value_total = current - fixed;
        const std::size_t budget = max_len - fixed;
        for (auto& v : values) v.resize(v.size() * budget / value_total);
    }

    QaContext ctx;
    std::size_t offset = 0;
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i > 0) {
            ctx.text += kSeparator;
            offset += sep_len;
        }
        ctx.text += fields[i].prefix;
        offset += utf8::length(fields[i].prefix);
        std::string value = utf8::encode(values[i]);
        ctx.text += value;
        ctx.segments.push_back(FieldSegment{fields[i].category, std::string(fields[i].prefix), value, offset});
        offset += values[i].size();
    }
    return ctx;
}

IndexedDocument make_document(const ToponymRecord& rec) {
    IndexedDocument doc;
    doc.doc_id = rec.id;
    doc.context = assemble_retrieval_context(rec);
    if (rec.coordinates) doc.point = rec.coordinates->point;
    doc.display_name = rec.display_name();
    return doc;
}

std::string record_to_json_line(const ToponymRecord& rec) {
    ordered_json j;
    auto opt = [](const std::string& s) { return s.empty() ? ordered_json(nullptr) : ordered_json(s); };
    j["id"] = rec.id;
    j["url"] = opt(rec.url);
    j["toponym_type"] = opt(type_label(rec));
    j["toponym_subtype"] = opt(subtype_label(rec));
    j["geographical_object"] = opt(rec.geographical_object);
    j["name_rus"] = opt(rec.name_rus);
    j["name_tat"] = opt(rec.name_tat);
    j["federal_subject"] = opt(rec.federal_subject);
    j["physio_details"] = opt(rec.physio_details);
    j["geographical_location"] = opt(rec.geographical_location);
    j["etymology"] = opt(rec.etymology);
    j["sources"] = opt(rec.sources);
    j["latitude"] = rec.coordinates ? ordered_json(rec.coordinates->lat_text) : ordered_json(nullptr);
    j["longitude"] = rec.coordinates ? ordered_json(rec.coordinates->lon_text) : ordered_json(nullptr);
    j["has_map"] = rec.has_map;
    return j.dump();
}

CorpusManifest write_corpus(const std::filesystem::path& dir, const std::vector<ToponymRecord>& records) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw IoError("cannot create corpus directory " + dir.string() + ": " + ec.message());

    CorpusManifest manifest;
    {
        std::ofstream out(dir / "records.jsonl", std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot write " + (dir / "records.jsonl").string());
        for (const auto& rec : records) {
            out << record_to_json_line(rec) << '\n';
            ++manifest.record_count;
            if (rec.coordinates) ++manifest.with_coordinates;
        }
        if (!out) throw IoError("write failed for " + (dir / "records.jsonl").string());
    }
    ordered_json m;
    m["schema_version"] = manifest.schema_version;
    m["record_count"] = manifest.record_count;
    m["with_coordinates"] = manifest.with_coordinates;
    m["records_file"] = "records.jsonl";
    std::ofstream out(dir / "manifest.json", std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + (dir / "manifest.json").string());
    out << m.dump(2) << '\n';
    return manifest;
}

std::vector<ToponymRecord> read_corpus(const std::filesystem::path& dir) {
    std::ifstream mf(dir / "manifest.json");
    if (!mf) throw IoError("corpus manifest not found in " + dir.string());
    json manifest;
    try {
        manifest = json::parse(mf);
    } catch (const json::exception& e) {
        throw FormatError(std::string("corpus manifest is not valid JSON: ") + e.what());
    }
    if (manifest.value("schema_version", 0) != kCorpusSchemaVersion) {
        throw FormatError("unsupported corpus schema version");
    }
    auto result = ingest_file(dir / manifest.value("records_file", std::string("records.jsonl")));
    if (!result.diagnostics.empty()) {
        const auto& d = result.diagnostics.front();
        throw FormatError("corpus record file is invalid (line " + std::to_string(d.line) + ", field " + d.field +
                          "): " + d.reason);
    }
    if (result.records.size() != manifest.value("record_count", std::size_t{0})) {
        throw FormatError("corpus record count does not match its manifest");
    }
    return std::move(result.records);
}

IngestResult load_records(const std::filesystem::path& path) {
    if (std::filesystem::is_directory(path)) return IngestResult{read_corpus(path), {}};
    return ingest_file(path);
}

} // namespace toposearch
