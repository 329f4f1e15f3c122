// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The toposearch Authors

#include "toposearch/reader.hpp"

#include "toposearch/error.hpp"
#include "toposearch/utf8.hpp"

#include <algorithm>
#include <chrono>
#include <unordered_map>
#include <vector>

namespace toposearch {

namespace {

struct Rule {
    QaCategory category;
    std::vector<std::string_view> keywords;
};

const std::vector<Rule>& rules() {
    static const std::vector<Rule> r{
        {QaCategory::Coordinates, {"координат", "на карте"}},
        {QaCategory::Region, {"регион", "федеральный субъект"}},
        {QaCategory::Etymology, {"означает", "называется", "происхожден"}},
        {QaCategory::Sources, {"источник", "прочитать"}},
        {QaCategory::Physio, {"физико-географ", "географических особенностях"}},
        {QaCategory::Location, {"находится", "располож"}},
        {QaCategory::ObjectType, {"что такое", "тип"}},
    };
    return r;
}

bool is_open_bracket(char32_t c) { return c == U'(' || c == U'[' || c == U'{'; }
bool is_close_bracket(char32_t c) { return c == U')' || c == U']' || c == U'}'; }

// Removes whitespace on both sides of every `mark` whose nearest non-space
// neighbours both satisfy `side`.
template <typename Pred>
std::u32string join_around(const std::u32string& s, char32_t mark, Pred side) {
    std::u32string out;
    out.reserve(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i] == mark) {
            std::size_t j = out.size();
            while (j > 0 && utf8::is_space(out[j - 1])) --j;
            std::size_t k = i + 1;
            while (k < s.size() && utf8::is_space(s[k])) ++k;
            if (j > 0 && side(out[j - 1]) && k < s.size() && side(s[k])) {
                out.resize(j);
                out.push_back(mark);
                i = k - 1;
                continue;
            }
        }
        out.push_back(s[i]);
    }
    return out;
}

std::u32string tighten_brackets(const std::u32string& s) {
    std::u32string out;
    out.reserve(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
        const char32_t c = s[i];
        if (is_close_bracket(c) || c == U',') {
            while (!out.empty() && utf8::is_space(out.back())) out.pop_back();
            out.push_back(c);
        } else if (is_open_bracket(c)) {
            out.push_back(c);
            while (i + 1 < s.size() && utf8::is_space(s[i + 1])) ++i;
        } else {
            out.push_back(c);
        }
    }
    return out;
}

std::u32string collapse_spaces(const std::u32string& s) {
    std::u32string out;
    out.reserve(s.size());
    bool pending = false;
    for (char32_t c : s) {
        if (utf8::is_space(c)) {
            pending = !out.empty();
            continue;
        }
        if (pending) out.push_back(U' ');
        pending = false;
        out.push_back(c);
    }
    return out;
}

std::string trim(std::string_view s) { return utf8::encode(collapse_spaces(utf8::decode(s))); }

std::vector<std::string> split_tokens(std::string_view s) {
    std::vector<std::string> tokens;
    std::string cur;
    for (char32_t c : utf8::to_lower(std::u32string_view(utf8::decode(s)))) {
        if (utf8::is_space(c)) {
            if (!cur.empty()) tokens.push_back(std::move(cur));
            cur.clear();
        } else {
            utf8::append(cur, c);
        }
    }
    if (!cur.empty()) tokens.push_back(std::move(cur));
    return tokens;
}

std::string_view trim_ascii(std::string_view s) {
    const auto* ws = " \t\r\n\f\v";
    const auto b = s.find_first_not_of(ws);
    if (b == std::string_view::npos) return {};
    return s.substr(b, s.find_last_not_of(ws) - b + 1);
}

} // namespace

std::optional<QaCategory> classify_question(std::string_view question) {
    const std::string lower = utf8::to_lower(question);
    for (const auto& rule : rules()) {
        for (auto kw : rule.keywords) {
            if (lower.find(kw) != std::string::npos) return rule.category;
        }
    }
    return std::nullopt;
}

ReaderAnswer extract(std::string_view question, std::string_view context) {
    ReaderAnswer ans;
    ans.category_guess = classify_question(question);
    if (!ans.category_guess) return ans;
    const auto prefix = qa_prefix(source_field(*ans.category_guess));
    ans.source_prefix = std::string(prefix);

    // The prefix must open a segment: context start or right after " | ".
    std::size_t byte_pos = std::string_view::npos;
    if (context.starts_with(prefix)) {
        byte_pos = 0;
    } else {
        const std::string needle = std::string(kSeparator) + std::string(prefix);
        const auto p = context.find(needle);
        if (p != std::string_view::npos) byte_pos = p + kSeparator.size();
    }
    if (byte_pos == std::string_view::npos) return ans;

    const std::size_t value_begin = byte_pos + prefix.size();
    std::size_t value_end = context.find(kSeparator, value_begin);
    if (value_end == std::string_view::npos) value_end = context.size();
    ans.text = std::string(context.substr(value_begin, value_end - value_begin));
    ans.start = static_cast<long>(utf8::length(context.substr(0, value_begin)));
    return ans;
}

std::string normalize_answer(std::string_view text) {
    std::u32string s = utf8::decode(text);
    s = join_around(s, U'.', utf8::is_digit);
    s = join_around(s, U'-', utf8::is_letter);
    s = tighten_brackets(s);
    s = collapse_spaces(s);
    return utf8::encode(s);
}

int exact_match(std::string_view pred, std::string_view gold, bool normalized) {
    if (normalized) return normalize_answer(pred) == normalize_answer(gold) ? 1 : 0;
    return trim_ascii(pred) == trim_ascii(gold) ? 1 : 0;
}

double token_f1(std::string_view pred, std::string_view gold, bool normalized) {
    const auto p = split_tokens(normalized ? normalize_answer(pred) : trim(pred));
    const auto g = split_tokens(normalized ? normalize_answer(gold) : trim(gold));
    if (p.empty() && g.empty()) return 1.0;
    if (p.empty() || g.empty()) return 0.0;
    std::unordered_map<std::string, long> counts;
    for (const auto& t : g) ++counts[t];
    long common = 0;
    for (const auto& t : p) {
        auto it = counts.find(t);
        if (it != counts.end() && it->second > 0) {
            --it->second;
            ++common;
        }
    }
    if (common == 0) return 0.0;
    const double precision = static_cast<double>(common) / static_cast<double>(p.size());
    const double recall = static_cast<double>(common) / static_cast<double>(g.size());
    return 2.0 * precision * recall / (precision + recall);
}

ReaderFn rule_based_reader() {
    return [](const QaPair& p) { return extract(p.question, p.context).text; };
}

QaMetrics evaluate_reader(std::span<const QaPair> pairs, const ReaderFn& reader, bool normalized) {
    if (pairs.empty()) throw InvalidArgument("reader evaluation needs at least one pair");
    QaMetrics m;
    m.normalized = normalized;
    m.count = pairs.size();
    double latency_ms = 0.0;
    for (const auto& pair : pairs) {
        const auto t0 = std::chrono::steady_clock::now();
        const std::string pred = reader(pair);
        const auto t1 = std::chrono::steady_clock::now();
        latency_ms += std::chrono::duration<double, std::milli>(t1 - t0).count();

        const double em = exact_match(pred, pair.answer_text, normalized);
        const double f1 = token_f1(pred, pair.answer_text, normalized);
        m.exact_match += em;
        m.f1 += f1;
        auto& cat = m.per_category[pair.category];
        ++cat.count;
        cat.exact_match += em;
        cat.f1 += f1;
    }
    const auto n = static_cast<double>(pairs.size());
    m.exact_match /= n;
    m.f1 /= n;
    m.mean_latency_ms = latency_ms / n;
    for (auto& [c, cat] : m.per_category) {
        cat.exact_match /= static_cast<double>(cat.count);
        cat.f1 /= static_cast<double>(cat.count);
    }
    return m;
}

} // namespace toposearch
