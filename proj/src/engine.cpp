// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The toposearch Authors

#include "toposearch/engine.hpp"

#include "toposearch/qagen.hpp"
#include "toposearch/semantic.hpp"
#include "toposearch/utf8.hpp"

#include <json.hpp>

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace toposearch {

namespace {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;
namespace fs = std::filesystem;

constexpr std::size_t kSnippetLength = 200;
constexpr int kIndexSchemaVersion = 1;

json parse_object(const std::string& text, const std::string& what) {
    if (text.empty()) return json::object();
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ParamError(what, std::string("not valid JSON: ") + e.what());
    }
    if (j.is_null()) return json::object();
    if (!j.is_object()) throw ParamError(what, "expected a JSON object");
    return j;
}

bool present(const json& j, const char* key) { return j.contains(key) && !j.at(key).is_null(); }

std::optional<double> opt_number(const json& j, const char* key) {
    if (!present(j, key)) return std::nullopt;
    const auto& v = j.at(key);
    double out = 0.0;
    if (v.is_number()) {
        out = v.get<double>();
    } else if (v.is_string()) {
        const auto& s = v.get_ref<const std::string&>();
        if (s.empty()) return std::nullopt;
        const auto res = std::from_chars(s.data(), s.data() + s.size(), out);
        if (res.ec != std::errc() || res.ptr != s.data() + s.size()) throw ParamError(key, "not a number: '" + s + "'");
    } else {
        throw ParamError(key, "expected a number");
    }
    if (!std::isfinite(out)) throw ParamError(key, "must be finite");
    return out;
}

std::optional<std::uint64_t> opt_count(const json& j, const char* key) {
    const auto v = opt_number(j, key);
    if (!v) return std::nullopt;
    if (*v < 0 || *v != std::floor(*v) || *v > 9.0e15) throw ParamError(key, "expected a non-negative integer");
    return static_cast<std::uint64_t>(*v);
}

std::optional<std::string> opt_string(const json& j, const char* key) {
    if (!present(j, key)) return std::nullopt;
    if (!j.at(key).is_string()) throw ParamError(key, "expected a string");
    return j.at(key).get<std::string>();
}

bool opt_bool(const json& j, const char* key, bool fallback) {
    if (!present(j, key)) return fallback;
    const auto& v = j.at(key);
    if (v.is_boolean()) return v.get<bool>();
    if (v.is_string()) {
        const auto& s = v.get_ref<const std::string&>();
        if (s == "true" || s == "1") return true;
        if (s == "false" || s == "0") return false;
    }
    throw ParamError(key, "expected a boolean");
}

std::vector<double> number_list(const json& j, const char* key, std::vector<double> fallback) {
    if (!present(j, key)) return fallback;
    const auto& v = j.at(key);
    std::vector<double> out;
    if (v.is_array()) {
        for (std::size_t i = 0; i < v.size(); ++i) {
            json item{{"v", v[i]}};
            out.push_back(*opt_number(item, "v"));
        }
    } else if (v.is_string()) {
        std::stringstream ss(v.get<std::string>());
        std::string part;
        while (std::getline(ss, part, ',')) {
            json item{{"v", part}};
            const auto n = opt_number(item, "v");
            if (!n) throw ParamError(key, "empty list element");
            out.push_back(*n);
        }
    } else {
        throw ParamError(key, "expected a list of numbers");
    }
    if (out.empty()) throw ParamError(key, "must not be empty");
    return out;
}

double check_alpha(double a, const char* key) {
    if (!(a >= 0.0 && a <= 1.0)) throw ParamError(key, "must lie in [0, 1]");
    return a;
}

double check_radius(double r, const char* key) {
    if (!(r > 0.0)) throw ParamError(key, "must be positive");
    return r;
}

std::string_view embedder_label(EmbedderKind k) { return k == EmbedderKind::Hashing ? "hashing" : "file"; }

EmbedderKind parse_embedder(const std::string& s) {
    if (s == "hashing") return EmbedderKind::Hashing;
    if (s == "file" || s == "vector-file") return EmbedderKind::VectorFile;
    throw ParamError("embedder", "expected hashing or file, got '" + s + "'");
}

json read_json_file(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw FormatError(path.string() + " is not valid JSON: " + e.what());
    }
}

void apply_config(EngineConfig& cfg, const json& j, const fs::path& base) {
    auto resolve = [&](const std::string& p) { return fs::path(p).is_absolute() ? fs::path(p) : base / p; };
    if (auto s = opt_string(j, "corpus")) cfg.corpus = resolve(*s);
    if (auto s = opt_string(j, "embedder")) cfg.embedder = parse_embedder(*s);
    if (auto s = opt_string(j, "vectors")) cfg.vectors = resolve(*s);
    if (auto s = opt_string(j, "query_vectors")) cfg.query_vectors = resolve(*s);
    if (auto n = opt_count(j, "dim")) {
        if (*n == 0) throw ParamError("dim", "must be positive");
        cfg.dim = static_cast<std::size_t>(*n);
    }
    if (auto n = opt_number(j, "radius_m")) cfg.radius_m = check_radius(*n, "radius_m");
    if (auto n = opt_number(j, "alpha")) cfg.alpha = check_alpha(*n, "alpha");
    if (auto n = opt_count(j, "k")) {
        if (*n == 0) throw ParamError("k", "must be at least 1");
        cfg.k = static_cast<std::size_t>(*n);
    }
    if (auto n = opt_count(j, "port")) {
        if (*n > 65535) throw ParamError("port", "must be at most 65535");
        cfg.port = static_cast<int>(*n);
    }
    if (auto n = opt_count(j, "seed")) cfg.seed = *n;
}

struct IndexInfo {
    EmbedderKind embedder = EmbedderKind::Hashing;
    std::size_t dim = 0;
    fs::path vectors;
};

std::optional<IndexInfo> read_index_info(const fs::path& corpus) {
    if (!fs::is_directory(corpus) || !fs::exists(corpus / "index.json")) return std::nullopt;
    const json j = read_json_file(corpus / "index.json");
    if (j.value("schema_version", 0) != kIndexSchemaVersion) throw FormatError("unsupported index.json schema version");
    IndexInfo info;
    try {
        info.embedder = parse_embedder(j.at("embedder").get<std::string>());
        info.dim = j.at("dim").get<std::size_t>();
        info.vectors = corpus / j.at("vectors_file").get<std::string>();
    } catch (const json::exception& e) {
        throw FormatError(std::string("index.json is malformed: ") + e.what());
    } catch (const ParamError& e) {
        throw FormatError(std::string("index.json is malformed: ") + e.what());
    }
    return info;
}

ordered_json opt_json(const std::optional<double>& v) { return v ? ordered_json(*v) : ordered_json(nullptr); }

std::string snippet(const std::string& context) {
    if (utf8::length(context) <= kSnippetLength) return context;
    return utf8::substr(context, 0, kSnippetLength) + "...";
}

ordered_json diagnostics_json(const std::vector<Diagnostic>& diags) {
    ordered_json out = ordered_json::array();
    for (const auto& d : diags) {
        out.push_back(ordered_json{{"line", d.line}, {"record_id", d.record_id}, {"field", d.field}, {"reason", d.reason}});
    }
    return out;
}

std::string format_diagnostic(const Diagnostic& d) {
    std::string s = "line " + std::to_string(d.line);
    if (!d.record_id.empty()) s += " (id " + d.record_id + ")";
    if (!d.field.empty()) s += ", " + d.field;
    return s + ": " + d.reason;
}

void write_text_file(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + path.string());
    out << text;
    if (!out) throw IoError("write failed for " + path.string());
}

std::string fixed(double v, int digits) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

std::string number_or_dash(const json& v, int digits) { return v.is_number() ? fixed(v.get<double>(), digits) : "-"; }

} // namespace

EngineConfig parse_engine_config(const std::string& json_text) {
    const json j = parse_object(json_text, "config");
    EngineConfig cfg;
    if (auto file = opt_string(j, "config_file")) {
        const fs::path path(*file);
        const json fj = read_json_file(path);
        if (!fj.is_object()) throw FormatError(path.string() + ": config must be a JSON object");
        apply_config(cfg, fj, path.parent_path());
    }
    apply_config(cfg, j, fs::path());
    return cfg;
}

IndexSummary build_index(const EngineConfig& config) {
    if (config.corpus.empty()) throw ParamError("corpus", "required");
    if (!fs::is_directory(config.corpus)) {
        throw ParamError("corpus", "must be a corpus directory written by ingest: " + config.corpus.string());
    }
    const auto records = read_corpus(config.corpus);
    std::vector<std::string> ids;
    std::vector<std::string> contexts;
    for (const auto& rec : records) {
        auto doc = make_document(rec);
        ids.push_back(std::move(doc.doc_id));
        contexts.push_back(std::move(doc.context));
    }

    IndexSummary summary;
    summary.embedder = config.embedder.value_or(EmbedderKind::Hashing);
    summary.documents = records.size();
    VectorTable table;
    if (summary.embedder == EmbedderKind::Hashing) {
        table = encode_all(HashingProvider(config.dim.value_or(kDefaultHashDim)), ids, contexts);
    } else {
        if (config.vectors.empty()) throw ParamError("vectors", "required for the file embedder");
        VectorTable given = load_vectors(config.vectors);
        summary.warnings = given.warnings;
        if (config.dim && *config.dim != given.dim) {
            throw ParamError("dim", "vector file has dim " + std::to_string(given.dim) + ", expected " +
                                        std::to_string(*config.dim));
        }
        std::unordered_map<std::string, std::size_t> row_of;
        for (std::size_t i = 0; i < given.ids.size(); ++i) row_of.emplace(given.ids[i], i);
        table.dim = given.dim;
        for (const auto& id : ids) {
            auto it = row_of.find(id);
            if (it == row_of.end()) throw FormatError("vector file has no vector for document id: " + id);
            auto row = given.row(it->second);
            table.ids.push_back(id);
            table.values.insert(table.values.end(), row.begin(), row.end());
        }
        if (given.ids.size() > ids.size()) {
            summary.warnings.push_back(std::to_string(given.ids.size() - ids.size()) +
                                       " vectors have no matching document and were dropped");
        }
    }
    summary.dim = table.dim;
    write_vectors(config.corpus / "vectors.tvec", table);

    ordered_json idx;
    idx["schema_version"] = kIndexSchemaVersion;
    idx["embedder"] = embedder_label(summary.embedder);
    idx["dim"] = summary.dim;
    idx["documents"] = summary.documents;
    idx["vectors_file"] = "vectors.tvec";
    write_text_file(config.corpus / "index.json", idx.dump(2) + "\n");
    return summary;
}

std::string index_summary_to_json(const IndexSummary& summary) {
    ordered_json j;
    j["embedder"] = embedder_label(summary.embedder);
    j["dim"] = summary.dim;
    j["documents"] = summary.documents;
    j["vectors_file"] = "vectors.tvec";
    j["warnings"] = summary.warnings;
    return j.dump(2);
}

Engine::Engine(EngineConfig config) : config_(std::move(config)) {
    if (config_.corpus.empty()) throw ParamError("corpus", "required");
    if (!fs::exists(config_.corpus)) throw IoError("corpus path does not exist: " + config_.corpus.string());
    auto loaded = load_records(config_.corpus);
    for (const auto& d : loaded.diagnostics) load_warnings_.push_back(format_diagnostic(d));
    records_ = std::move(loaded.records);
    if (records_.empty()) throw FormatError("corpus contains no valid records: " + config_.corpus.string());
    for (std::size_t i = 0; i < records_.size(); ++i) by_id_.emplace(records_[i].id, i);

    std::vector<IndexedDocument> docs;
    docs.reserve(records_.size());
    for (const auto& rec : records_) docs.push_back(make_document(rec));

    const auto info = read_index_info(config_.corpus);
    const EmbedderKind kind = config_.embedder.value_or(info ? info->embedder : EmbedderKind::Hashing);
    std::shared_ptr<const EmbeddingProvider> provider;
    std::optional<VectorTable> doc_vectors;
    if (kind == EmbedderKind::Hashing) {
        const std::size_t dim = config_.dim.value_or(info ? info->dim : kDefaultHashDim);
        provider = std::make_shared<HashingProvider>(dim);
        if (info && info->embedder == EmbedderKind::Hashing && info->dim == dim && fs::exists(info->vectors)) {
            doc_vectors = load_vectors(info->vectors);
        }
        embedder_name_ = "hashing";
    } else {
        fs::path path = config_.vectors;
        if (path.empty() && info && info->embedder == EmbedderKind::VectorFile) path = info->vectors;
        if (path.empty()) throw ParamError("vectors", "required for the file embedder");
        doc_vectors = load_vectors(path);
        for (const auto& w : doc_vectors->warnings) load_warnings_.push_back(w);
        if (config_.dim && *config_.dim != doc_vectors->dim) {
            throw ParamError("dim", "vector file has dim " + std::to_string(doc_vectors->dim) + ", expected " +
                                        std::to_string(*config_.dim));
        }
        VectorTable queries;
        queries.dim = doc_vectors->dim;
        if (!config_.query_vectors.empty()) {
            queries = load_vectors(config_.query_vectors);
            if (queries.dim != doc_vectors->dim) throw ParamError("query_vectors", "dim differs from document vectors");
        }
        provider = std::make_shared<VectorFileProvider>("file", std::move(queries));
        embedder_name_ = "file";
    }
    searcher_ = std::make_unique<HybridSearcher>(std::move(docs), std::move(provider), std::move(doc_vectors));
}

const ToponymRecord* Engine::record(const std::string& id) const {
    auto it = by_id_.find(id);
    return it == by_id_.end() ? nullptr : &records_[it->second];
}

SearchQuery Engine::parse_search(const std::string& params_json) const {
    const json j = parse_object(params_json, "params");
    SearchQuery q;
    q.radius_m = config_.radius_m;
    q.alpha = config_.alpha;
    q.k = config_.k;
    if (auto m = opt_string(j, "method")) {
        try {
            q.method = parse_method(*m);
        } catch (const InvalidArgument&) {
            throw ParamError("method", "expected hybrid, semantic, spatial or bm25, got '" + *m + "'");
        }
    }
    q.text = opt_string(j, "q").value_or("");
    bool blank = true;
    for (char32_t c : utf8::decode(q.text)) blank = blank && utf8::is_space(c);
    if (blank && q.method != Method::SpatialOnly) throw ParamError("q", "required and must not be blank");

    const auto lat = opt_number(j, "lat");
    const auto lon = opt_number(j, "lon");
    if (lat.has_value() != lon.has_value()) throw ParamError(lat ? "lon" : "lat", "lat and lon must be given together");
    if (lat) {
        if (!(*lat >= -90.0 && *lat <= 90.0)) throw ParamError("lat", "must lie in [-90, 90]");
        if (!(*lon >= -180.0 && *lon <= 180.0)) throw ParamError("lon", "must lie in [-180, 180]");
        q.point = GeoPoint{*lat, *lon};
    }
    if (q.method == Method::SpatialOnly && !q.point) throw ParamError("lat", "spatial search requires lat and lon");
    if (auto r = opt_number(j, "radius_m")) q.radius_m = check_radius(*r, "radius_m");
    if (auto a = opt_number(j, "alpha")) q.alpha = check_alpha(*a, "alpha");
    if (auto k = opt_count(j, "k")) {
        if (*k == 0) throw ParamError("k", "must be at least 1");
        q.k = static_cast<std::size_t>(*k);
    }
    return q;
}

namespace {

ordered_json query_json(const SearchQuery& q) {
    ordered_json j;
    j["q"] = q.text;
    j["lat"] = q.point ? ordered_json(q.point->lat_deg) : ordered_json(nullptr);
    j["lon"] = q.point ? ordered_json(q.point->lon_deg) : ordered_json(nullptr);
    j["radius_m"] = q.radius_m;
    j["alpha"] = q.alpha;
    j["k"] = q.k;
    j["method"] = to_string(q.method);
    return j;
}

ordered_json hit_json(const ScoredHit& h, const ToponymRecord& rec, const IndexedDocument& doc) {
    ordered_json j;
    j["rank"] = h.rank;
    j["doc_id"] = h.doc_id;
    j["display_name"] = rec.display_name();
    j["name_rus"] = rec.name_rus;
    j["name_tat"] = rec.name_tat;
    j["lat"] = rec.coordinates ? ordered_json(rec.coordinates->point.lat_deg) : ordered_json(nullptr);
    j["lon"] = rec.coordinates ? ordered_json(rec.coordinates->point.lon_deg) : ordered_json(nullptr);
    j["distance_m"] = opt_json(h.distance_m);
    j["sem_score"] = opt_json(h.sem_score);
    j["geo_score"] = opt_json(h.geo_score);
    j["sem_norm"] = opt_json(h.sem_norm);
    j["geo_norm"] = opt_json(h.geo_norm);
    j["combined"] = h.combined;
    j["snippet"] = snippet(doc.context);
    return j;
}

} // namespace

std::string Engine::search_json(const std::string& params_json) const {
    const SearchQuery q = parse_search(params_json);
    const SearchResult r = searcher_->search(q);
    ordered_json j;
    j["query"] = query_json(q);
    j["method_executed"] = to_string(r.method);
    ordered_json hits = ordered_json::array();
    for (const auto& h : r.hits) hits.push_back(hit_json(h, *record(h.doc_id), *searcher_->find(h.doc_id)));
    j["hits"] = hits;
    j["diagnostics"] = r.diagnostics;
    return j.dump();
}

std::string Engine::ask_json(const std::string& params_json) const {
    json params = parse_object(params_json, "body");
    const auto question = opt_string(params, "question");
    if (!question || question->empty()) throw ParamError("question", "required and must not be empty");
    json search_params = json::object();
    search_params["q"] = *question;
    search_params["method"] = "hybrid";
    search_params["k"] = 1;
    for (const char* key : {"lat", "lon", "radius_m", "alpha"}) {
        if (params.contains(key)) search_params[key] = params[key];
    }
    const SearchQuery q = parse_search(search_params.dump());
    const SearchResult r = searcher_->search(q);

    ordered_json j;
    j["question"] = *question;
    j["query"] = query_json(q);
    j["method_executed"] = to_string(r.method);
    if (r.hits.empty()) {
        j["found"] = false;
        j["answer"] = nullptr;
        j["category"] = classify_question(*question) ? ordered_json(to_string(*classify_question(*question)))
                                                      : ordered_json(nullptr);
        j["doc_id"] = nullptr;
        j["answer_start"] = -1;
        j["context"] = nullptr;
        j["hit"] = nullptr;
    } else {
        const auto& hit = r.hits.front();
        const ToponymRecord& rec = *record(hit.doc_id);
        const QaContext ctx = assemble_qa_context(rec);
        const ReaderAnswer ans = extract(*question, ctx.text);
        j["found"] = ans.found();
        j["answer"] = ans.found() ? ordered_json(ans.text) : ordered_json(nullptr);
        j["category"] = ans.category_guess ? ordered_json(to_string(*ans.category_guess)) : ordered_json(nullptr);
        j["source_prefix"] = ans.source_prefix;
        j["doc_id"] = hit.doc_id;
        j["display_name"] = rec.display_name();
        j["answer_start"] = ans.start;
        j["context"] = ctx.text;
        j["hit"] = hit_json(hit, rec, *searcher_->find(hit.doc_id));
    }
    j["diagnostics"] = r.diagnostics;
    return j.dump();
}

std::string Engine::doc_json(const std::string& id) const {
    const ToponymRecord* rec = record(id);
    if (!rec) throw NotFound("no document with id: " + id);
    ordered_json j = ordered_json::parse(record_to_json_line(*rec));
    j["qa_context"] = assemble_qa_context(*rec).text;
    j["retrieval_context"] = searcher_->find(id)->context;
    return j.dump();
}

std::string Engine::stats_json() const {
    std::size_t with_coords = 0;
    std::map<std::string, std::size_t> types;
    for (const auto& rec : records_) {
        if (rec.coordinates) ++with_coords;
        ++types[rec.toponym_type ? std::string(to_string(*rec.toponym_type)) : "Unspecified"];
    }
    ordered_json j;
    j["documents"] = records_.size();
    j["with_coordinates"] = with_coords;
    j["toponym_types"] = types;
    j["embedder"] = embedder_name_;
    j["dim"] = searcher_->vectors().dim();
    ordered_json defaults;
    defaults["radius_m"] = config_.radius_m;
    defaults["alpha"] = config_.alpha;
    defaults["k"] = config_.k;
    j["defaults"] = defaults;
    j["warnings"] = load_warnings_;
    return j.dump();
}

std::string search_result_to_text(const std::string& search_json) {
    const json j = json::parse(search_json);
    std::ostringstream out;
    out << "method: " << j["method_executed"].get<std::string>() << ", " << j["hits"].size() << " hit(s)\n";
    for (const auto& h : j["hits"]) {
        out << h["rank"].get<std::size_t>() << ". " << h["display_name"].get<std::string>() << " [" << h["doc_id"].get<std::string>()
            << "]  combined=" << fixed(h["combined"].get<double>(), 6) << "  sem_norm=" << number_or_dash(h["sem_norm"], 6)
            << "  geo_norm=" << number_or_dash(h["geo_norm"], 6) << "  distance_m=" << number_or_dash(h["distance_m"], 1)
            << '\n';
    }
    for (const auto& d : j["diagnostics"]) out << "note: " << d.get<std::string>() << '\n';
    return out.str();
}

std::string ask_result_to_text(const std::string& ask_json) {
    const json j = json::parse(ask_json);
    std::ostringstream out;
    if (j["found"].get<bool>()) {
        out << "answer: " << j["answer"].get<std::string>() << '\n';
    } else {
        out << "answer: (not found)\n";
    }
    out << "category: " << (j["category"].is_string() ? j["category"].get<std::string>() : "unknown") << '\n';
    if (j["doc_id"].is_string()) {
        out << "document: " << j["display_name"].get<std::string>() << " [" << j["doc_id"].get<std::string>() << "]\n";
        out << "answer_start: " << j["answer_start"].get<long>() << '\n';
        out << "combined: " << fixed(j["hit"]["combined"].get<double>(), 6) << '\n';
        out << "context: " << j["context"].get<std::string>() << '\n';
    }
    for (const auto& d : j["diagnostics"]) out << "note: " << d.get<std::string>() << '\n';
    return out.str();
}

std::string run_ingest(const std::string& params_json) {
    const json j = parse_object(params_json, "params");
    const auto input = opt_string(j, "input");
    const auto out = opt_string(j, "out");
    if (!input) throw ParamError("input", "required");
    if (!out) throw ParamError("out", "required");
    auto result = ingest_file(*input);
    if (result.records.empty()) {
        throw FormatError("no valid records in " + *input +
                          (result.diagnostics.empty() ? std::string() : "; first problem: " + format_diagnostic(result.diagnostics.front())));
    }
    const auto manifest = write_corpus(*out, result.records);
    ordered_json r;
    r["input"] = *input;
    r["out"] = *out;
    r["records"] = manifest.record_count;
    r["with_coordinates"] = manifest.with_coordinates;
    r["skipped"] = result.diagnostics.size();
    r["diagnostics"] = diagnostics_json(result.diagnostics);
    return r.dump(2);
}

std::string run_eval_retrieval(const Engine& engine, const std::string& params_json, std::string& table) {
    const json j = parse_object(params_json, "params");
    const std::size_t n = opt_count(j, "n").value_or(500);
    if (n == 0) throw ParamError("n", "must be at least 1");
    EvalQueryOptions opts;
    opts.seed = opt_count(j, "seed").value_or(engine.config().seed);
    if (auto jm = opt_number(j, "jitter_m")) {
        if (*jm < 0) throw ParamError("jitter_m", "must be non-negative");
        opts.jitter_m = *jm;
    }
    std::vector<Method> methods = kAllMethods;
    if (auto m = opt_string(j, "methods"); m && *m != "all") {
        methods.clear();
        std::stringstream ss(*m);
        std::string part;
        while (std::getline(ss, part, ',')) {
            try {
                methods.push_back(parse_method(part));
            } catch (const InvalidArgument&) {
                throw ParamError("methods", "unknown method '" + part + "'");
            }
        }
        if (methods.empty()) throw ParamError("methods", "must not be empty");
    }
    EvalParams params;
    params.alpha = check_alpha(opt_number(j, "alpha").value_or(engine.config().alpha), "alpha");
    params.radius_m = check_radius(opt_number(j, "radius_m").value_or(engine.config().radius_m), "radius_m");
    params.resamples = opt_count(j, "bootstrap").value_or(kDefaultResamples);
    if (params.resamples == 0) throw ParamError("bootstrap", "must be at least 1");
    params.seed = opts.seed;

    std::vector<EvalQuery> queries;
    try {
        queries = generate_eval_queries(engine.records(), n, opts);
    } catch (const InvalidArgument& e) {
        throw ParamError("n", e.what());
    }
    const auto report = compare_methods(engine.searcher(), queries, methods, params);
    if (auto trace = opt_string(j, "trace_file")) write_text_file(*trace, report_to_json(report, true) + "\n");
    table = report_to_table(report);
    return report_to_json(report, false);
}

std::string run_grid_search(const Engine& engine, const std::string& params_json) {
    const json j = parse_object(params_json, "params");
    const auto grid = number_list(j, "alphas", kDefaultAlphaGrid);
    for (double a : grid) check_alpha(a, "alphas");
    const std::size_t n_val = opt_count(j, "n_val").value_or(200);
    if (n_val == 0) throw ParamError("n_val", "must be at least 1");
    const std::size_t n_test_wanted = opt_count(j, "n_test").value_or(500);
    const double radius = check_radius(opt_number(j, "radius_m").value_or(engine.config().radius_m), "radius_m");
    EvalQueryOptions opts;
    opts.seed = opt_count(j, "seed").value_or(engine.config().seed);

    std::size_t eligible = 0;
    for (const auto& rec : engine.records()) eligible += rec.coordinates ? 1 : 0;
    if (n_val > eligible) {
        throw ParamError("n_val", "requested " + std::to_string(n_val) + " validation queries but only " +
                                      std::to_string(eligible) + " records have coordinates");
    }
    // Validation records come after the test records of the same shuffle.
    const std::size_t n_test = std::min(n_test_wanted, eligible - n_val);
    const auto sets = generate_eval_query_sets(engine.records(), n_test, n_val, opts);
    auto labeled = to_labeled(sets.validation);
    const auto result = grid_search_alpha(engine.searcher(), labeled, grid, radius);

    ordered_json out;
    out["radius_m"] = radius;
    out["n_val"] = n_val;
    out["n_test_reserved"] = n_test;
    out["seed"] = opts.seed;
    ordered_json rows = ordered_json::array();
    for (const auto& row : result.table) {
        rows.push_back(ordered_json{{"alpha", row.alpha}, {"mean_recall_at_5", row.mean_recall_at_5}});
    }
    out["table"] = rows;
    out["best_alpha"] = result.best_alpha;
    return out.dump(2);
}

std::string run_generate_qa(const std::string& params_json) {
    const json j = parse_object(params_json, "params");
    const auto input = opt_string(j, "input");
    const auto out_train = opt_string(j, "out_train");
    const auto out_val = opt_string(j, "out_val");
    if (!input) throw ParamError("input", "required");
    if (!out_train) throw ParamError("out_train", "required");
    if (!out_val) throw ParamError("out_val", "required");
    const std::uint64_t seed = opt_count(j, "seed").value_or(42);
    const std::size_t max_per_record = opt_count(j, "max_per_record").value_or(kDefaultMaxPerRecord);
    if (max_per_record == 0) throw ParamError("max_per_record", "must be at least 1");
    const std::size_t max_context = opt_count(j, "max_context").value_or(kDefaultMaxContext);
    if (max_context == 0) throw ParamError("max_context", "must be at least 1");
    const double fraction = opt_number(j, "train_fraction").value_or(0.9);
    if (!(fraction > 0.0 && fraction <= 1.0)) throw ParamError("train_fraction", "must lie in (0, 1]");
    const std::string format = opt_string(j, "format").value_or("auto");
    if (format != "auto" && format != "squad" && format != "flat") {
        throw ParamError("format", "expected auto, squad or flat");
    }
    auto pick = [&](const std::string& path) {
        if (format == "squad") return QaFormat::Squad;
        if (format == "flat") return QaFormat::Flat;
        return fs::path(path).extension() == ".jsonl" ? QaFormat::Flat : QaFormat::Squad;
    };

    const auto loaded = load_records(*input);
    std::vector<QaPair> pairs;
    try {
        pairs = generate_corpus(loaded.records, seed, max_per_record, max_context);
    } catch (const InvalidArgument& e) {
        throw ParamError("max_context", e.what());
    }
    const auto split = split_corpus(pairs, fraction, seed);
    write_qa_file(split.train, *out_train, pick(*out_train));
    write_qa_file(split.validation, *out_val, pick(*out_val));

    std::map<std::string, std::size_t> per_category;
    for (const auto& p : pairs) ++per_category[std::string(to_string(p.category))];
    ordered_json r;
    r["records"] = loaded.records.size();
    r["skipped_records"] = loaded.diagnostics.size();
    r["pairs"] = pairs.size();
    r["train"] = split.train.size();
    r["validation"] = split.validation.size();
    r["per_category"] = per_category;
    r["seed"] = seed;
    return r.dump(2);
}

namespace {

std::unordered_map<std::string, std::string> read_predictions(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open predictions file " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    const std::string text = buf.str();
    std::unordered_map<std::string, std::string> out;
    const json whole = json::parse(text, nullptr, false);
    if (!whole.is_discarded() && whole.is_object() && !whole.contains("id")) {
        for (const auto& [id, value] : whole.items()) {
            if (!value.is_string()) throw FormatError("prediction for '" + id + "' is not a string");
            out.emplace(id, value.get<std::string>());
        }
        return out;
    }
    std::istringstream lines(text);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(lines, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        const json row = json::parse(line, nullptr, false);
        if (row.is_discarded() || !row.is_object() || !row.contains("id") || !row["id"].is_string()) {
            throw FormatError("predictions line " + std::to_string(line_no) + ": expected an object with an id");
        }
        const json* value = nullptr;
        for (const char* key : {"prediction", "prediction_text", "answer"}) {
            if (row.contains(key)) {
                value = &row[key];
                break;
            }
        }
        if (!value || !value->is_string()) {
            throw FormatError("predictions line " + std::to_string(line_no) + ": missing prediction text");
        }
        out.emplace(row["id"].get<std::string>(), value->get<std::string>());
    }
    return out;
}

} // namespace

std::string run_eval_reader(const std::string& params_json) {
    const json j = parse_object(params_json, "params");
    const auto qa = opt_string(j, "qa");
    if (!qa) throw ParamError("qa", "required");
    const bool normalized = opt_bool(j, "normalize", false);
    const auto pairs = read_qa_file(*qa);
    if (pairs.empty()) throw FormatError("QA file contains no pairs: " + *qa);

    ReaderFn reader = rule_based_reader();
    std::string reader_name = "rule-based";
    std::size_t missing = 0;
    if (auto pred_path = opt_string(j, "predictions")) {
        auto preds = std::make_shared<std::unordered_map<std::string, std::string>>(read_predictions(*pred_path));
        for (const auto& p : pairs) missing += preds->count(p.id) ? 0 : 1;
        reader = [preds](const QaPair& p) {
            auto it = preds->find(p.id);
            return it == preds->end() ? std::string() : it->second;
        };
        reader_name = "predictions:" + fs::path(*pred_path).filename().string();
    }
    const QaMetrics m = evaluate_reader(pairs, reader, normalized);

    ordered_json r;
    r["reader"] = reader_name;
    r["qa_file"] = *qa;
    r["normalized"] = m.normalized;
    r["count"] = m.count;
    r["exact_match"] = m.exact_match;
    r["f1"] = m.f1;
    r["mean_latency_ms"] = m.mean_latency_ms;
    r["missing_predictions"] = missing;
    ordered_json cats = ordered_json::array();
    for (const auto& [cat, cm] : m.per_category) {
        cats.push_back(ordered_json{{"category", to_string(cat)}, {"count", cm.count}, {"exact_match", cm.exact_match}, {"f1", cm.f1}});
    }
    r["per_category"] = cats;
    return r.dump(2);
}

std::string reader_report_to_text(const std::string& report_json) {
    const json j = json::parse(report_json);
    std::ostringstream out;
    out << "reader: " << j["reader"].get<std::string>() << " (" << (j["normalized"].get<bool>() ? "normalized" : "raw")
        << "), " << j["count"].get<std::size_t>() << " pairs\n";
    out << "EM " << fixed(j["exact_match"].get<double>(), 3) << "  F1 " << fixed(j["f1"].get<double>(), 3)
        << "  latency " << fixed(j["mean_latency_ms"].get<double>(), 4) << " ms/example\n";
    out << "Category     | Count | EM    | F1\n";
    for (const auto& c : j["per_category"]) {
        std::string name = c["category"].get<std::string>();
        name.resize(std::max<std::size_t>(name.size(), 12), ' ');
        std::string count = std::to_string(c["count"].get<std::size_t>());
        count.resize(std::max<std::size_t>(count.size(), 5), ' ');
        out << name << " | " << count << " | " << fixed(c["exact_match"].get<double>(), 3) << " | "
            << fixed(c["f1"].get<double>(), 3) << '\n';
    }
    return out.str();
}

} // namespace toposearch
