// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The toposearch Authors

#include "toposearch/qagen.hpp"

#include "toposearch/error.hpp"
#include "toposearch/semantic.hpp"
#include "toposearch/utf8.hpp"

#include <json.hpp>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

namespace toposearch {

namespace {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

constexpr std::string_view kPlaceholder = "{name}";

std::string fill(std::string_view pattern, std::string_view name) {
    std::string out(pattern);
    const auto pos = out.find(kPlaceholder);
    if (pos != std::string::npos) out.replace(pos, kPlaceholder.size(), name);
    return out;
}

// Strips "_<category>_<n>" from a pair id.
std::string record_part(const std::string& id, QaCategory c) {
    const std::string marker = "_" + std::string(to_string(c)) + "_";
    const auto pos = id.rfind(marker);
    return pos == std::string::npos ? id : id.substr(0, pos);
}

std::optional<QaCategory> category_from_id(std::string_view id) {
    auto us = id.rfind('_');
    if (us == std::string_view::npos) return std::nullopt;
    const auto digits = id.substr(us + 1);
    if (digits.empty() || !std::all_of(digits.begin(), digits.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); }))
        return std::nullopt;
    const auto head = id.substr(0, us);
    for (QaCategory c : kQaCategories) {
        const auto name = to_string(c);
        if (head.size() > name.size() && head.ends_with(name) && head[head.size() - name.size() - 1] == '_') return c;
    }
    return std::nullopt;
}

ordered_json answers_json(const QaPair& p) {
    ordered_json a;
    a["text"] = p.answer_text;
    a["answer_start"] = p.answer_start;
    return ordered_json::array({a});
}

QaPair pair_from_json(const json& q, const std::string& context) {
    QaPair p;
    p.id = q.at("id").get<std::string>();
    p.context = context;
    p.question = q.at("question").get<std::string>();
    const auto& answers = q.at("answers");
    if (answers.is_array()) {
        if (answers.empty()) throw FormatError("pair '" + p.id + "' has no answers");
        p.answer_text = answers.front().at("text").get<std::string>();
        p.answer_start = answers.front().at("answer_start").get<std::size_t>();
    } else {
        // HF datasets style: {"text": [...], "answer_start": [...]}
        p.answer_text = answers.at("text").at(0).get<std::string>();
        p.answer_start = answers.at("answer_start").at(0).get<std::size_t>();
    }
    std::optional<QaCategory> cat;
    if (auto it = q.find("category"); it != q.end() && it->is_string()) cat = parse_category(it->get<std::string>());
    if (!cat) cat = category_from_id(p.id);
    if (!cat) throw FormatError("cannot determine the question category of pair '" + p.id + "'");
    p.category = *cat;
    return p;
}

} // namespace

std::string_view to_string(QaCategory c) noexcept {
    switch (c) {
    case QaCategory::ObjectType: return "object_type";
    case QaCategory::Etymology: return "etymology";
    case QaCategory::Location: return "location";
    case QaCategory::Region: return "region";
    case QaCategory::Physio: return "physio";
    case QaCategory::Sources: return "sources";
    case QaCategory::Coordinates: return "coordinates";
    }
    return "object_type";
}

std::optional<QaCategory> parse_category(std::string_view name) noexcept {
    for (QaCategory c : kQaCategories) {
        if (to_string(c) == name) return c;
    }
    return std::nullopt;
}

FieldCategory source_field(QaCategory c) noexcept {
    switch (c) {
    case QaCategory::ObjectType: return FieldCategory::ObjectType;
    case QaCategory::Etymology: return FieldCategory::Etymology;
    case QaCategory::Location: return FieldCategory::Location;
    case QaCategory::Region: return FieldCategory::Region;
    case QaCategory::Physio: return FieldCategory::Physio;
    case QaCategory::Sources: return FieldCategory::Sources;
    case QaCategory::Coordinates: return FieldCategory::Coordinates;
    }
    return FieldCategory::ObjectType;
}

const std::vector<QuestionTemplate>& builtin_templates() {
    static const std::vector<QuestionTemplate> templates{
        {QaCategory::ObjectType, "Что такое {name}?"},
        {QaCategory::ObjectType, "Какой тип у {name}?"},
        {QaCategory::ObjectType, "К какому типу относится {name}?"},
        {QaCategory::Location, "Где находится {name}?"},
        {QaCategory::Location, "В каком месте расположен {name}?"},
        {QaCategory::Location, "Где именно расположен {name}?"},
        {QaCategory::Etymology, "Что означает название {name}?"},
        {QaCategory::Etymology, "Почему {name} так называется?"},
        {QaCategory::Etymology, "Каково происхождение названия {name}?"},
        {QaCategory::Coordinates, "Какие координаты у {name}?"},
        {QaCategory::Coordinates, "Где на карте находится {name}?"},
        {QaCategory::Region, "В каком регионе находится {name}?"},
        {QaCategory::Region, "Какой федеральный субъект у {name}?"},
        {QaCategory::Sources, "Какие источники упоминают {name}?"},
        {QaCategory::Sources, "Где можно прочитать о {name}?"},
        {QaCategory::Physio, "Какие физико-географические сведения о {name}?"},
        {QaCategory::Physio, "Что известно о географических особенностях {name}?"},
    };
    return templates;
}

bool answer_span_valid(const QaPair& pair) {
    return utf8::substr(pair.context, pair.answer_start, utf8::length(pair.answer_text)) == pair.answer_text &&
           !pair.answer_text.empty();
}

std::vector<QaPair> generate_pairs(const ToponymRecord& rec, std::uint64_t seed, std::size_t max_per_record,
                                   std::size_t max_context) {
    std::vector<QaPair> out;
    const std::string& name = rec.display_name();
    if (name.empty() || max_per_record == 0) return out;
    const QaContext ctx = assemble_qa_context(rec, max_context);

    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(fnv1a64(rec.id)), static_cast<std::uint32_t>(fnv1a64(rec.id) >> 32)};
    std::mt19937_64 rng(seq);

    for (QaCategory c : kQaCategories) {
        if (out.size() == max_per_record) break;
        const auto field = source_field(c);
        auto seg = std::find_if(ctx.segments.begin(), ctx.segments.end(),
                                [&](const FieldSegment& s) { return s.category == field; });
        if (seg == ctx.segments.end() || seg->value.empty()) continue;

        std::vector<const QuestionTemplate*> options;
        for (const auto& t : builtin_templates()) {
            if (t.category == c) options.push_back(&t);
        }
        std::uniform_int_distribution<std::size_t> pick(0, options.size() - 1);
        const auto* tmpl = options[pick(rng)];

        QaPair p;
        p.id = rec.id + "_" + std::string(to_string(c)) + "_0";
        p.context = ctx.text;
        p.question = fill(tmpl->pattern, name);
        p.answer_text = seg->value;
        p.answer_start = seg->start_of_value;
        p.category = c;
        out.push_back(std::move(p));
    }
    return out;
}

std::vector<QaPair> generate_corpus(std::span<const ToponymRecord> records, std::uint64_t seed,
                                    std::size_t max_per_record, std::size_t max_context) {
    std::vector<QaPair> out;
    for (const auto& rec : records) {
        auto pairs = generate_pairs(rec, seed, max_per_record, max_context);
        out.insert(out.end(), std::make_move_iterator(pairs.begin()), std::make_move_iterator(pairs.end()));
    }
    return out;
}

QaSplit split_corpus(std::span<const QaPair> pairs, double train_fraction, std::uint64_t seed) {
    if (!(train_fraction >= 0.0 && train_fraction <= 1.0)) throw InvalidArgument("train_fraction must lie in [0, 1]");
    std::vector<bool> to_train(pairs.size(), false);
    std::mt19937_64 rng(seed);
    for (QaCategory c : kQaCategories) {
        std::vector<std::size_t> idx;
        for (std::size_t i = 0; i < pairs.size(); ++i) {
            if (pairs[i].category == c) idx.push_back(i);
        }
        std::shuffle(idx.begin(), idx.end(), rng);
        const auto n_train = std::min(
            idx.size(), static_cast<std::size_t>(std::ceil(static_cast<double>(idx.size()) * train_fraction - 1e-9)));
        for (std::size_t j = 0; j < n_train; ++j) to_train[idx[j]] = true;
    }
    QaSplit split;
    for (std::size_t i = 0; i < pairs.size(); ++i) (to_train[i] ? split.train : split.validation).push_back(pairs[i]);
    return split;
}

void emit_squad(std::span<const QaPair> pairs, std::ostream& out) {
    ordered_json data = ordered_json::array();
    std::size_t i = 0;
    while (i < pairs.size()) {
        ordered_json paragraph;
        paragraph["context"] = pairs[i].context;
        ordered_json qas = ordered_json::array();
        const std::size_t first = i;
        for (; i < pairs.size() && pairs[i].context == pairs[first].context; ++i) {
            ordered_json q;
            q["id"] = pairs[i].id;
            q["question"] = pairs[i].question;
            q["category"] = to_string(pairs[i].category);
            q["answers"] = answers_json(pairs[i]);
            qas.push_back(std::move(q));
        }
        paragraph["qas"] = std::move(qas);
        ordered_json article;
        article["title"] = record_part(pairs[first].id, pairs[first].category);
        article["paragraphs"] = ordered_json::array({std::move(paragraph)});
        data.push_back(std::move(article));
    }
    ordered_json doc;
    doc["version"] = "1.1";
    doc["data"] = std::move(data);
    out << doc.dump(1) << '\n';
}

void emit_flat(std::span<const QaPair> pairs, std::ostream& out) {
    for (const auto& p : pairs) {
        ordered_json j;
        j["id"] = p.id;
        j["context"] = p.context;
        j["question"] = p.question;
        j["answers"] = answers_json(p);
        j["category"] = to_string(p.category);
        out << j.dump() << '\n';
    }
}

void write_qa_file(std::span<const QaPair> pairs, const std::filesystem::path& path, QaFormat format) {
    const auto tmp = std::filesystem::path(path.string() + ".tmp");
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot write QA file: " + path.string());
        if (format == QaFormat::Squad) {
            emit_squad(pairs, out);
        } else {
            emit_flat(pairs, out);
        }
        if (!out) throw IoError("write failed for QA file: " + path.string());
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) throw IoError("cannot move QA file into place: " + ec.message());
}

std::vector<QaPair> parse_qa(std::istream& in) {
    std::stringstream buf;
    buf << in.rdbuf();
    const std::string text = buf.str();
    std::vector<QaPair> out;
    try {
        // A single JSON document with "data" is SQuAD; otherwise JSON lines.
        json doc = json::parse(text, nullptr, false);
        if (!doc.is_discarded() && doc.is_object() && doc.contains("data")) {
            for (const auto& article : doc.at("data")) {
                for (const auto& para : article.at("paragraphs")) {
                    const auto context = para.at("context").get<std::string>();
                    for (const auto& q : para.at("qas")) out.push_back(pair_from_json(q, context));
                }
            }
            return out;
        }
        std::istringstream lines(text);
        std::string line;
        std::size_t line_no = 0;
        while (std::getline(lines, line)) {
            ++line_no;
            if (line.find_first_not_of(" \t\r\n") == std::string::npos) continue;
            json q = json::parse(line, nullptr, false);
            if (q.is_discarded() || !q.is_object()) {
                throw FormatError("QA file line " + std::to_string(line_no) + " is not a JSON object");
            }
            out.push_back(pair_from_json(q, q.at("context").get<std::string>()));
        }
    } catch (const json::exception& e) {
        throw FormatError(std::string("malformed QA file: ") + e.what());
    }
    return out;
}

std::vector<QaPair> read_qa_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open QA file: " + path.string());
    return parse_qa(in);
}

} // namespace toposearch
