// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The toposearch Authors

#include "synthetic.hpp"

#include "toposearch/utf8.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <unistd.h>

namespace toposearch::synth {

namespace {

const std::vector<std::string> kConsonants{"б", "в", "г", "д", "ж", "з", "к", "л", "м", "н",
                                           "п", "р", "с", "т", "ф", "х", "ч", "ш"};
const std::vector<std::string> kVowels{"а", "о", "у", "ы", "и", "е"};
const std::vector<std::string> kObjects{"Село", "Деревня", "Река", "Озеро", "Гора", "Луг", "Родник", "Урочище", "Поле"};
const std::vector<std::string> kRegions{"Республика Татарстан", "Республика Башкортостан", "Ульяновская область",
                                        "Самарская область", "Оренбургская область"};
const std::vector<std::string> kDirections{"северу", "югу", "востоку", "западу", "северо - западу", "юго-востоку"};

template <typename T>
const T& pick(std::mt19937_64& rng, const std::vector<T>& v) {
    return v[std::uniform_int_distribution<std::size_t>(0, v.size() - 1)(rng)];
}

bool chance(std::mt19937_64& rng, double p) { return std::bernoulli_distribution(p)(rng); }

int uniform_int(std::mt19937_64& rng, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }

std::string capitalize(const std::string& s) {
    auto u = utf8::decode(s);
    if (!u.empty() && u[0] >= U'а' && u[0] <= U'я') u[0] -= 0x20;
    return utf8::encode(u);
}

std::string coord_text(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}

} // namespace

std::string unique_name(std::mt19937_64& rng, std::vector<std::string>& used) {
    for (;;) {
        std::string name;
        const int syllables = uniform_int(rng, 3, 4);
        for (int i = 0; i < syllables; ++i) name += pick(rng, kConsonants) + pick(rng, kVowels);
        if (chance(rng, 0.5)) name += pick(rng, kConsonants);
        name = capitalize(name);
        if (std::find(used.begin(), used.end(), name) == used.end()) {
            used.push_back(name);
            return name;
        }
    }
}

std::string tatarize(const std::string& name) {
    std::u32string u = utf8::decode(name);
    for (auto& c : u) {
        if (c == U'а') c = U'ә';
        else if (c == U'о') c = U'ө';
        else if (c == U'у') c = U'ү';
    }
    return utf8::encode(u);
}

std::vector<ToponymRecord> synthetic_records(const SyntheticOptions& o) {
    std::mt19937_64 rng(o.seed);
    std::uniform_real_distribution<double> lat(o.lat_min, o.lat_max);
    std::uniform_real_distribution<double> lon(o.lon_min, o.lon_max);
    std::vector<std::string> used;
    std::vector<ToponymRecord> out;
    out.reserve(o.count);
    for (std::size_t i = 0; i < o.count; ++i) {
        ToponymRecord r;
        r.id = std::to_string(1000 + i);
        const bool micro = chance(rng, 0.3);
        r.toponym_type = micro ? ToponymType::Microtoponym : ToponymType::Toponym;
        r.toponym_type_label = micro ? "Микротопоним" : "Топоним";
        r.geographical_object = pick(rng, kObjects);
        const std::string name = unique_name(rng, used);
        const double names = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
        if (names < 0.8) {
            r.name_rus = name;
            r.name_tat = tatarize(name);
        } else if (names < 0.9) {
            r.name_rus = name;
        } else {
            r.name_tat = tatarize(name);
        }
        const std::string other = unique_name(rng, used);
        if (!chance(rng, o.empty_field_share)) {
            r.etymology = "Название образовано от слова «" + utf8::to_lower(other) + "» (" +
                          std::to_string(uniform_int(rng, 2, 9)) + " значения).";
            if (o.long_field_chars > 0) {
                while (utf8::length(r.etymology) < o.long_field_chars) r.etymology += " Вариант " + other + ", записан в 19" + std::to_string(uniform_int(rng, 10, 99)) + " г.";
            }
        }
        if (!chance(rng, o.empty_field_share)) {
            r.geographical_location = "Расположено в " + std::to_string(uniform_int(rng, 2, 60)) + " км к " +
                                      pick(rng, kDirections) + " от с. " + other + ".";
        }
        if (!chance(rng, o.empty_field_share)) r.federal_subject = pick(rng, kRegions);
        if (!chance(rng, o.empty_field_share * 2)) {
            r.physio_details = "Длина " + std::to_string(uniform_int(rng, 1, 90)) + "," +
                               std::to_string(uniform_int(rng, 0, 9)) + " км, [высота " +
                               std::to_string(uniform_int(rng, 50, 300)) + " м] | уклон малый";
        }
        if (!chance(rng, o.empty_field_share)) {
            r.sources = "Словарь топонимов. Т. " + std::to_string(uniform_int(rng, 1, 5)) + ". – Казань, 20" +
                        std::to_string(uniform_int(rng, 10, 24)) + ". – С. " + std::to_string(uniform_int(rng, 5, 400)) + ".";
        }
        if (chance(rng, o.coordinate_share)) {
            Coordinates c;
            c.lat_text = coord_text(lat(rng));
            c.lon_text = coord_text(lon(rng));
            c.point = GeoPoint{std::strtod(c.lat_text.c_str(), nullptr), std::strtod(c.lon_text.c_str(), nullptr)};
            r.coordinates = c;
        }
        out.push_back(std::move(r));
    }
    return out;
}

ToponymRecord rantamak_record() {
    ToponymRecord r;
    r.id = "1530";
    r.toponym_type = ToponymType::Toponym;
    r.toponym_type_label = "Топоним";
    r.toponym_subtype = ToponymSubtype::Oikonym;
    r.toponym_subtype_label = "Ойконим";
    r.geographical_object = "Село";
    r.name_rus = "Рантамак";
    r.name_tat = "Рантамак";
    r.etymology = "Топоним произошел от ойконима «Рангазар-Тамак».";
    r.geographical_location = "Расположено на р. Мелля, в 21 км к востоку от с. Сарманово.";
    r.sources = "Әхмәтьянов Р.Г. Татар теленең этимологик сүзлеге. – Казан: Мәгариф, 2001. – 272";
    r.coordinates = Coordinates{GeoPoint{55.205461, 52.881862}, "55.205461", "52.881862"};
    return r;
}

void write_record_lines(const std::filesystem::path& path, const std::vector<ToponymRecord>& records) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    for (const auto& r : records) out << record_to_json_line(r) << '\n';
}

std::filesystem::path temp_dir(const std::string& tag) {
    static int counter = 0;
    auto dir = std::filesystem::temp_directory_path() /
               ("toposearch_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

Embedding RandomProvider::encode_query(std::string_view text) const {
    std::mt19937_64 rng(fnv1a64(text) ^ (salt_ * 0x9e3779b97f4a7c15ULL));
    std::normal_distribution<float> g(0.0f, 1.0f);
    Embedding e;
    e.values.resize(dim_);
    for (auto& v : e.values) v = g(rng);
    normalize(e.values);
    return e;
}

} // namespace toposearch::synth
