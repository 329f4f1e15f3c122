// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The toposearch Authors

#include "synthetic.hpp"
#include "toposearch/engine.hpp"
#include "toposearch/toposearch.h"

#include <gtest/gtest.h>

#include <fstream>

#include <json.hpp>

using namespace toposearch;
using nlohmann::json;

namespace {

// Ingested 120-record corpus (plus the worked example) shared by the suite.
class EngineTest : public ::testing::Test {
protected:
    static void SetUpTestSuite() {
        dir_ = synth::temp_dir("engine");
        synth::SyntheticOptions o;
        o.count = 120;
        o.coordinate_share = 0.9;
        auto recs = synth::synthetic_records(o);
        recs.push_back(synth::rantamak_record());
        synth::write_record_lines(dir_ / "records.jsonl", recs);
        run_ingest(json{{"input", (dir_ / "records.jsonl").string()}, {"out", (dir_ / "corpus").string()}}.dump());
    }
    static void TearDownTestSuite() { std::filesystem::remove_all(dir_); }

    static std::string corpus() { return (dir_ / "corpus").string(); }
    static EngineConfig config() {
        EngineConfig c;
        c.corpus = dir_ / "corpus";
        return c;
    }

    static std::filesystem::path dir_;
};

std::filesystem::path EngineTest::dir_;

} // namespace

TEST_F(EngineTest, ConfigParsing) {
    const auto c = parse_engine_config(R"({"corpus":"/x","embedder":"file","vectors":"v.tvec","dim":"64","alpha":0.3,"k":7,"port":9000})");
    EXPECT_EQ(c.corpus, "/x");
    EXPECT_EQ(c.embedder, EmbedderKind::VectorFile);
    EXPECT_EQ(c.dim, 64u);
    EXPECT_EQ(c.alpha, 0.3);
    EXPECT_EQ(c.k, 7u);
    EXPECT_EQ(c.port, 9000);
    try {
        parse_engine_config(R"({"alpha":1.5})");
        FAIL();
    } catch (const ParamError& e) {
        EXPECT_EQ(e.field(), "alpha");
    }
    EXPECT_THROW(parse_engine_config(R"({"embedder":"magic"})"), ParamError);
    EXPECT_THROW(parse_engine_config("[1]"), InvalidArgument);

    std::ofstream(dir_ / "cfg.json") << R"({"corpus":"corpus","radius_m":20000,"k":3})";
    const auto f = parse_engine_config(json{{"config_file", (dir_ / "cfg.json").string()}, {"k", 4}}.dump());
    EXPECT_EQ(f.corpus, dir_ / "corpus");
    EXPECT_EQ(f.radius_m, 20000.0);
    EXPECT_EQ(f.k, 4u);
}

TEST_F(EngineTest, BuildIndexWritesVectorsAndManifest) {
    auto c = config();
    c.dim = 128;
    const auto s = build_index(c);
    EXPECT_EQ(s.documents, 121u);
    EXPECT_EQ(s.dim, 128u);
    const auto table = load_vectors(dir_ / "corpus" / "vectors.tvec");
    EXPECT_EQ(table.ids.size(), 121u);
    const auto manifest = json::parse(std::ifstream(dir_ / "corpus" / "index.json"));
    EXPECT_EQ(manifest["dim"], 128);
    EXPECT_EQ(manifest["embedder"], "hashing");
    const Engine e(config());
    EXPECT_EQ(json::parse(e.stats_json())["dim"], 128);
    c.dim = 256;
    build_index(c);
}

TEST_F(EngineTest, FileEmbedderReordersAndValidates) {
    const Engine base(config());
    std::vector<std::string> ids, texts;
    for (auto it = base.searcher().documents().rbegin(); it != base.searcher().documents().rend(); ++it) {
        ids.push_back(it->doc_id);
        texts.push_back(it->context);
    }
    auto table = encode_all(HashingProvider(32), ids, texts);
    write_vectors(dir_ / "docs.tvec", table);
    // Query vectors keyed by query text.
    const std::vector<std::string> qids{"село Рантамак"};
    write_vectors(dir_ / "queries.tvec", encode_all(HashingProvider(32), qids, qids));

    const auto file_dir = dir_ / "file_corpus";
    std::filesystem::create_directories(file_dir);
    std::filesystem::copy(dir_ / "corpus", file_dir, std::filesystem::copy_options::recursive | std::filesystem::copy_options::overwrite_existing);
    const auto cfg = parse_engine_config(json{{"corpus", file_dir.string()}, {"embedder", "file"},
                                              {"vectors", (dir_ / "docs.tvec").string()},
                                              {"query_vectors", (dir_ / "queries.tvec").string()}}.dump());
    const auto s = build_index(cfg);
    EXPECT_EQ(s.dim, 32u);
    const Engine e(cfg);
    const auto hit = json::parse(e.search_json(R"({"q":"село Рантамак","lat":55.2,"lon":52.88})"));
    EXPECT_EQ(hit["hits"][0]["doc_id"], "1530");
    EXPECT_THROW(e.search_json(R"({"q":"unknown text","lat":55.2,"lon":52.88})"), NotFound);

    table.ids.pop_back();
    table.values.resize(table.values.size() - 32);
    write_vectors(dir_ / "short.tvec", table);
    auto bad = cfg;
    bad.vectors = dir_ / "short.tvec";
    EXPECT_THROW(build_index(bad), FormatError);
}

TEST_F(EngineTest, SearchJsonFields) {
    const Engine e(config());
    const auto r = json::parse(e.search_json(R"({"q":"село Рантамак","lat":55.205461,"lon":52.881862})"));
    EXPECT_EQ(r["method_executed"], "hybrid");
    EXPECT_EQ(r["query"]["alpha"], 0.1);
    EXPECT_EQ(r["query"]["radius_m"], 50000.0);
    ASSERT_GE(r["hits"].size(), 1u);
    const auto& h = r["hits"][0];
    EXPECT_EQ(h["doc_id"], "1530");
    EXPECT_EQ(h["rank"], 1);
    for (const char* key : {"display_name", "name_rus", "name_tat", "lat", "lon", "distance_m", "sem_score", "geo_score",
                            "sem_norm", "geo_norm", "combined", "snippet"}) {
        EXPECT_TRUE(h.contains(key)) << key;
    }
    EXPECT_EQ(h["distance_m"], 0.0);

    const auto sem = json::parse(e.search_json(R"({"q":"Рантамак"})"));
    EXPECT_EQ(sem["method_executed"], "semantic");
    EXPECT_EQ(sem["diagnostics"].size(), 1u);
    EXPECT_TRUE(sem["hits"][0]["distance_m"].is_null());

    const auto strings = json::parse(e.search_json(R"({"q":"Рантамак","lat":"55.2","lon":"52.9","k":"2","method":"spatial"})"));
    EXPECT_EQ(strings["hits"].size(), 2u);
    EXPECT_EQ(strings["method_executed"], "spatial");
}

TEST_F(EngineTest, SearchParamErrorsNameTheField) {
    const Engine e(config());
    auto field_of = [&](const std::string& params) {
        try {
            e.search_json(params);
        } catch (const ParamError& err) {
            return err.field();
        }
        return std::string("<none>");
    };
    EXPECT_EQ(field_of(R"({"lat":55,"lon":50})"), "q");
    EXPECT_EQ(field_of(R"({"q":"x","lat":55})"), "lon");
    EXPECT_EQ(field_of(R"({"q":"x","lat":95,"lon":50})"), "lat");
    EXPECT_EQ(field_of(R"({"q":"x","alpha":2})"), "alpha");
    EXPECT_EQ(field_of(R"({"q":"x","radius_m":0})"), "radius_m");
    EXPECT_EQ(field_of(R"({"q":"x","k":0})"), "k");
    EXPECT_EQ(field_of(R"({"q":"x","method":"fuzzy"})"), "method");
    EXPECT_EQ(field_of(R"({"q":"x","method":"spatial"})"), "lat");
    EXPECT_EQ(field_of(R"({"q":"x","alpha":"abc"})"), "alpha");
}

TEST_F(EngineTest, AskAndDoc) {
    const Engine e(config());
    const auto a = json::parse(e.ask_json(R"({"question":"Какие координаты у Рантамак?","lat":55.205461,"lon":52.881862})"));
    EXPECT_EQ(a["found"], true);
    EXPECT_EQ(a["answer"], "55.205461, 52.881862");
    EXPECT_EQ(a["answer_start"], 312);
    EXPECT_EQ(a["doc_id"], "1530");
    EXPECT_EQ(a["category"], "coordinates");
    EXPECT_EQ(a["source_prefix"], "Координаты: ");
    EXPECT_THROW(e.ask_json(R"({"lat":55.2,"lon":52.9})"), ParamError);

    const auto d = json::parse(e.doc_json("1530"));
    EXPECT_EQ(d["name_rus"], "Рантамак");
    EXPECT_EQ(d["latitude"], "55.205461");
    EXPECT_NE(d["qa_context"].get<std::string>().find("Координаты: 55.205461, 52.881862"), std::string::npos);
    EXPECT_THROW(e.doc_json("nope"), NotFound);
}

TEST_F(EngineTest, EvalAndGridSearchRuns) {
    const Engine e(config());
    std::string table;
    const auto rep = json::parse(run_eval_retrieval(e, R"({"n":40,"bootstrap":100})", table));
    EXPECT_EQ(rep["query_count"], 40);
    EXPECT_EQ(rep["methods"].size(), 4u);
    EXPECT_NE(table.find("Recall@1"), std::string::npos);
    EXPECT_THROW(run_eval_retrieval(e, R"({"n":5000})", table), ParamError);
    EXPECT_THROW(run_eval_retrieval(e, R"({"methods":"hybrid,fuzzy"})", table), ParamError);

    const auto g = json::parse(run_grid_search(e, R"({"n_val":30,"n_test":50})"));
    EXPECT_EQ(g["table"].size(), 5u);
    EXPECT_TRUE(g["best_alpha"].is_number());
}

TEST_F(EngineTest, GenerateQaAndEvalReader) {
    const auto out = json::parse(run_generate_qa(json{{"input", (dir_ / "records.jsonl").string()},
                                                      {"out_train", (dir_ / "train.json").string()},
                                                      {"out_val", (dir_ / "val.jsonl").string()}}.dump()));
    EXPECT_EQ(out["records"], 121);
    EXPECT_EQ(out["train"].get<int>() + out["validation"].get<int>(), out["pairs"].get<int>());
    EXPECT_EQ(read_qa_file(dir_ / "val.jsonl").size(), out["validation"].get<std::size_t>());

    const auto rep = json::parse(run_eval_reader(json{{"qa", (dir_ / "val.jsonl").string()}, {"normalize", true}}.dump()));
    EXPECT_EQ(rep["exact_match"], 1.0);
    EXPECT_EQ(rep["f1"], 1.0);
    EXPECT_EQ(rep["normalized"], true);

    // External predictions: spaced numerics fail raw EM and pass normalized EM.
    json preds = json::object();
    for (const auto& p : read_qa_file(dir_ / "val.jsonl")) {
        std::string t = p.answer_text;
        if (p.category == QaCategory::Coordinates) t.insert(t.find('.') + 1, " ");
        preds[p.id] = t;
    }
    std::ofstream(dir_ / "preds.json") << preds.dump();
    const auto raw = json::parse(run_eval_reader(json{{"qa", (dir_ / "val.jsonl").string()}, {"normalize", false},
                                                      {"predictions", (dir_ / "preds.json").string()}}.dump()));
    const auto norm = json::parse(run_eval_reader(json{{"qa", (dir_ / "val.jsonl").string()}, {"normalize", true},
                                                       {"predictions", (dir_ / "preds.json").string()}}.dump()));
    EXPECT_LT(raw["exact_match"].get<double>(), 1.0);
    EXPECT_EQ(norm["exact_match"], 1.0);
    EXPECT_NE(reader_report_to_text(norm.dump()).find("EM 1.000"), std::string::npos);
}

TEST_F(EngineTest, MissingCorpusFails) {
    EngineConfig c;
    c.corpus = dir_ / "does_not_exist";
    EXPECT_ANY_THROW(Engine{c});
    EXPECT_THROW(run_ingest(json{{"input", (dir_ / "none.jsonl").string()}, {"out", (dir_ / "x").string()}}.dump()), IoError);
}

TEST_F(EngineTest, CApiStatusCodesAndStrings) {
    EXPECT_NE(std::string(ts_version()), "");
    ts_engine* engine = nullptr;
    ASSERT_EQ(ts_engine_open(json{{"corpus", corpus()}}.dump().c_str(), &engine), TS_OK);
    char* out = nullptr;
    ASSERT_EQ(ts_engine_search(engine, R"({"q":"село Рантамак","lat":55.205461,"lon":52.881862})", &out), TS_OK);
    const auto r = json::parse(out);
    EXPECT_EQ(r["hits"][0]["doc_id"], "1530");
    char* text = nullptr;
    ASSERT_EQ(ts_search_text(out, &text), TS_OK);
    EXPECT_NE(std::string(text).find("1530"), std::string::npos);
    ts_free_string(text);
    ts_free_string(out);

    out = nullptr;
    EXPECT_EQ(ts_engine_search(engine, R"({"q":"x","alpha":3})", &out), TS_ERR_INVALID_ARGUMENT);
    EXPECT_EQ(out, nullptr);
    EXPECT_EQ(std::string(ts_last_error_field()), "alpha");
    EXPECT_NE(std::string(ts_last_error()).find("alpha"), std::string::npos);

    EXPECT_EQ(ts_engine_get_doc(engine, "nope", &out), TS_ERR_NOT_FOUND);
    EXPECT_EQ(ts_engine_get_doc(engine, "1530", &out), TS_OK);
    ts_free_string(out);
    ASSERT_EQ(ts_engine_ask(engine, R"({"question":"Что такое Рантамак?","lat":55.205461,"lon":52.881862})", &out), TS_OK);
    EXPECT_EQ(json::parse(out)["answer"], "Село");
    ASSERT_EQ(ts_ask_text(out, &text), TS_OK);
    ts_free_string(text);
    ts_free_string(out);
    ASSERT_EQ(ts_engine_stats(engine, &out), TS_OK);
    EXPECT_EQ(json::parse(out)["documents"], 121);
    ts_free_string(out);

    char* table = nullptr;
    ASSERT_EQ(ts_engine_eval_retrieval(engine, R"({"n":20,"bootstrap":50})", &out, &table), TS_OK);
    EXPECT_NE(std::string(table).find("Hybrid"), std::string::npos);
    ts_free_string(out);
    ts_free_string(table);

    EXPECT_EQ(ts_engine_search(nullptr, "{}", &out), TS_ERR_INVALID_ARGUMENT);
    EXPECT_EQ(ts_engine_search(engine, "not json", &out), TS_ERR_INVALID_ARGUMENT);
    ts_engine_close(engine);

    EXPECT_EQ(ts_engine_open(json{{"corpus", (dir_ / "missing").string()}}.dump().c_str(), &engine), TS_ERR_IO);
    EXPECT_EQ(ts_ingest(json{{"input", (dir_ / "missing.jsonl").string()}, {"out", (dir_ / "o").string()}}.dump().c_str(), &out), TS_ERR_IO);
    std::ofstream(dir_ / "garbage.jsonl") << "garbage\n";
    EXPECT_EQ(ts_ingest(json{{"input", (dir_ / "garbage.jsonl").string()}, {"out", (dir_ / "o").string()}}.dump().c_str(), &out), TS_ERR_FORMAT);
}

TEST_F(EngineTest, CApiServerLifecycle) {
    ts_engine* engine = nullptr;
    ASSERT_EQ(ts_engine_open(json{{"corpus", corpus()}}.dump().c_str(), &engine), TS_OK);
    ts_server* server = nullptr;
    ASSERT_EQ(ts_server_start(engine, "127.0.0.1", 0, &server), TS_OK);
    const int port = ts_server_port(server);
    EXPECT_GT(port, 0);
    ts_server* second = nullptr;
    EXPECT_EQ(ts_server_start(engine, "127.0.0.1", port, &second), TS_ERR_IO);
    ts_server_stop(server);
    ts_server_wait(server);
    ts_server_free(server);
    ts_engine_close(engine);
}
