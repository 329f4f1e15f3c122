// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The toposearch Authors

#include "toposearch/toposearch.h"

#include <CLI11.hpp>
#include <json.hpp>

#include <pthread.h>
#include <signal.h>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>

namespace {

using json = nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;

int fail(ts_status status) {
    std::cerr << "error: " << ts_last_error() << '\n';
    return status == TS_ERR_INVALID_ARGUMENT ? kExitUsage : kExitData;
}

// Owns one string returned by the library.
struct Owned {
    char* p = nullptr;
    ~Owned() { ts_free_string(p); }
    std::string str() const { return p ? std::string(p) : std::string(); }
};

bool write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << content;
    if (!out) {
        std::cerr << "error: cannot write " << path << '\n';
        return false;
    }
    return true;
}

bool given(const CLI::App* cmd, const char* name) {
    const auto* opt = cmd->get_option_no_throw(name);
    return opt != nullptr && opt->count() > 0;
}

struct EngineFlags {
    std::string config_file;
    std::string corpus;
    std::string embedder;
    std::string vectors;
    std::string query_vectors;
    std::size_t dim = 0;
    int port = 0;

    void add(CLI::App* cmd, bool embedder_flags) {
        cmd->add_option("--config", config_file, "JSON config file (flags take precedence)")->check(CLI::ExistingFile);
        cmd->add_option("--corpus", corpus, "corpus directory or record file");
        if (embedder_flags) {
            cmd->add_option("--embedder", embedder, "hashing or file")->check(CLI::IsMember({"hashing", "file"}));
            cmd->add_option("--vectors", vectors, "document vectors (TVEC)");
            cmd->add_option("--query-vectors", query_vectors, "query vectors keyed by text (TVEC)");
            cmd->add_option("--dim", dim, "hashing embedder dimension")->check(CLI::PositiveNumber);
        }
    }

    json to_json(const CLI::App* cmd) const {
        json j = json::object();
        if (!config_file.empty()) j["config_file"] = config_file;
        if (!corpus.empty()) j["corpus"] = corpus;
        if (!embedder.empty()) j["embedder"] = embedder;
        if (!vectors.empty()) j["vectors"] = vectors;
        if (!query_vectors.empty()) j["query_vectors"] = query_vectors;
        if (given(cmd, "--dim")) j["dim"] = dim;
        if (given(cmd, "--port")) j["port"] = port;
        return j;
    }
};

struct Engine {
    ts_engine* h = nullptr;
    ~Engine() { ts_engine_close(h); }
};

struct QueryFlags {
    double lat = 0.0;
    double lon = 0.0;
    double radius_m = 0.0;
    double alpha = 0.0;
    std::size_t k = 0;

    void add(CLI::App* cmd, bool with_k) {
        cmd->add_option("--lat", lat, "anchor latitude");
        cmd->add_option("--lon", lon, "anchor longitude");
        cmd->add_option("--radius-m", radius_m, "geofilter radius in meters (50000)");
        cmd->add_option("--alpha", alpha, "semantic weight (0.1)");
        if (with_k) cmd->add_option("--k", k, "number of hits (5)");
    }

    void fill(const CLI::App* cmd, json& j) const {
        if (cmd->count("--lat") > 0) j["lat"] = lat;
        if (cmd->count("--lon") > 0) j["lon"] = lon;
        if (cmd->count("--radius-m") > 0) j["radius_m"] = radius_m;
        if (cmd->count("--alpha") > 0) j["alpha"] = alpha;
        if (given(cmd, "--k")) j["k"] = k;
    }
};

int open_engine(const EngineFlags& flags, const CLI::App* cmd, Engine& engine) {
    const auto cfg = flags.to_json(cmd).dump();
    const ts_status s = ts_engine_open(cfg.c_str(), &engine.h);
    return s == TS_OK ? kExitOk : fail(s);
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Hybrid semantic and spatial search over a toponym gazetteer"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(ts_version()));

    // ingest
    std::string ingest_input, ingest_out;
    auto* ingest = app.add_subcommand("ingest", "validate a record file and write a corpus directory");
    ingest->add_option("--input", ingest_input, "line-delimited JSON records")->required();
    ingest->add_option("--out", ingest_out, "corpus directory")->required();

    // index
    EngineFlags index_flags;
    auto* index = app.add_subcommand("index", "embed documents and write vectors.tvec + index.json");
    index_flags.add(index, true);

    // search
    EngineFlags search_flags;
    QueryFlags search_q;
    std::string search_query, search_method, search_format = "text";
    auto* search = app.add_subcommand("search", "rank documents for a query");
    search_flags.add(search, true);
    search->add_option("--query", search_query, "query text");
    search_q.add(search, true);
    search->add_option("--method", search_method, "hybrid|semantic|spatial|bm25 (hybrid)");
    search->add_option("--format", search_format, "text or structured")->check(CLI::IsMember({"text", "structured"}));

    // answer
    EngineFlags answer_flags;
    QueryFlags answer_q;
    std::string answer_question, answer_format = "text";
    auto* answer = app.add_subcommand("answer", "retrieve the top hybrid hit and extract an answer");
    answer_flags.add(answer, true);
    answer->add_option("--question", answer_question, "question text")->required();
    answer_q.add(answer, false);
    answer->add_option("--format", answer_format, "text or structured")->check(CLI::IsMember({"text", "structured"}));

    // doc
    EngineFlags doc_flags;
    std::string doc_id;
    auto* doc = app.add_subcommand("doc", "print one record with its contexts");
    doc_flags.add(doc, true);
    doc->add_option("--id", doc_id, "document id")->required();

    // gen-qa
    std::string qa_input, qa_train, qa_val, qa_format = "auto";
    std::uint64_t qa_seed = 42;
    std::size_t qa_max_per_record = 10, qa_max_context = 2048;
    double qa_fraction = 0.9;
    auto* genqa = app.add_subcommand("gen-qa", "generate extractive QA pairs and a stratified split");
    genqa->add_option("--input", qa_input, "record file or corpus directory")->required();
    genqa->add_option("--out-train", qa_train, "train output")->required();
    genqa->add_option("--out-val", qa_val, "validation output")->required();
    genqa->add_option("--seed", qa_seed, "random seed (42)");
    genqa->add_option("--max-per-record", qa_max_per_record, "pairs per record (10)");
    genqa->add_option("--max-context", qa_max_context, "context length limit in characters (2048)");
    genqa->add_option("--train-fraction", qa_fraction, "share of each category in train (0.9)");
    genqa->add_option("--format", qa_format, "auto (by extension), squad or flat")
        ->check(CLI::IsMember({"auto", "squad", "flat"}));

    // eval-retrieval
    EngineFlags er_flags;
    std::size_t er_n = 500, er_bootstrap = 1000;
    std::uint64_t er_seed = 42;
    std::string er_methods = "all", er_report, er_trace;
    double er_alpha = 0.1, er_radius = 50000.0, er_jitter = 0.0;
    auto* eval_retrieval = app.add_subcommand("eval-retrieval", "compare ranking methods on generated queries");
    er_flags.add(eval_retrieval, true);
    eval_retrieval->add_option("--n", er_n, "number of queries (500)");
    eval_retrieval->add_option("--seed", er_seed, "random seed (42)");
    eval_retrieval->add_option("--methods", er_methods, "all or a comma list of methods");
    eval_retrieval->add_option("--bootstrap", er_bootstrap, "bootstrap resamples (1000)");
    eval_retrieval->add_option("--alpha", er_alpha, "hybrid weight (0.1)");
    eval_retrieval->add_option("--radius-m", er_radius, "geofilter radius (50000)");
    eval_retrieval->add_option("--jitter-m", er_jitter, "anchor jitter radius (0)");
    eval_retrieval->add_option("--report", er_report, "report output (JSON)")->required();
    eval_retrieval->add_option("--trace", er_trace, "per-query trace output (JSON)");

    // grid-search
    EngineFlags gs_flags;
    std::string gs_alphas = "0.1,0.3,0.5,0.7,0.9", gs_report;
    std::size_t gs_n_val = 200, gs_n_test = 500;
    double gs_radius = 50000.0;
    std::uint64_t gs_seed = 42;
    auto* grid = app.add_subcommand("grid-search", "select alpha by mean Recall@5 on validation queries");
    gs_flags.add(grid, true);
    grid->add_option("--alphas", gs_alphas, "comma-separated grid");
    grid->add_option("--n-val", gs_n_val, "validation queries (200)");
    grid->add_option("--n-test", gs_n_test, "test queries held out before validation sampling (500)");
    grid->add_option("--radius-m", gs_radius, "geofilter radius (50000)");
    grid->add_option("--seed", gs_seed, "random seed (42)");
    grid->add_option("--report", gs_report, "result output (JSON)");

    // eval-reader
    std::string rd_qa, rd_predictions, rd_report;
    bool rd_normalize = false;
    auto* eval_reader = app.add_subcommand("eval-reader", "score the rule-based reader or a prediction file");
    eval_reader->add_option("--qa", rd_qa, "QA file (SQuAD or JSONL)")->required();
    eval_reader->add_flag("--normalize", rd_normalize, "normalize answers before scoring");
    eval_reader->add_option("--predictions", rd_predictions, "external predictions (JSON or JSONL)");
    eval_reader->add_option("--report", rd_report, "report output (JSON)")->required();

    // serve
    EngineFlags serve_flags;
    std::string serve_host = "127.0.0.1";
    auto* serve = app.add_subcommand("serve", "run the HTTP API");
    serve_flags.add(serve, true);
    serve->add_option("--port", serve_flags.port, "port, 0 picks a free one (8080)");
    serve->add_option("--host", serve_host, "bind address (127.0.0.1)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    if (*ingest) {
        json p{{"input", ingest_input}, {"out", ingest_out}};
        Owned out;
        const ts_status s = ts_ingest(p.dump().c_str(), &out.p);
        if (s != TS_OK) return fail(s);
        const json r = json::parse(out.str());
        for (const auto& d : r["diagnostics"]) {
            std::cerr << "skipped line " << d["line"].get<std::size_t>() << ": " << d["field"].get<std::string>() << ": "
                      << d["reason"].get<std::string>() << '\n';
        }
        std::cout << "ingested " << r["records"].get<std::size_t>() << " records (" << r["with_coordinates"].get<std::size_t>()
                  << " with coordinates, " << r["skipped"].get<std::size_t>() << " skipped) into " << ingest_out << '\n';
        return kExitOk;
    }

    if (*index) {
        Owned out;
        const ts_status s = ts_build_index(index_flags.to_json(index).dump().c_str(), &out.p);
        if (s != TS_OK) return fail(s);
        std::cout << out.str() << '\n';
        return kExitOk;
    }

    if (*search) {
        Engine engine;
        if (int rc = open_engine(search_flags, search, engine)) return rc;
        json p = json::object();
        if (search->count("--query") > 0) p["q"] = search_query;
        if (!search_method.empty()) p["method"] = search_method;
        search_q.fill(search, p);
        Owned out;
        ts_status s = ts_engine_search(engine.h, p.dump().c_str(), &out.p);
        if (s != TS_OK) return fail(s);
        if (search_format == "structured") {
            std::cout << out.str() << '\n';
        } else {
            Owned txt;
            if ((s = ts_search_text(out.p, &txt.p)) != TS_OK) return fail(s);
            std::cout << txt.str();
        }
        return kExitOk;
    }

    if (*answer) {
        Engine engine;
        if (int rc = open_engine(answer_flags, answer, engine)) return rc;
        json p{{"question", answer_question}};
        answer_q.fill(answer, p);
        Owned out;
        ts_status s = ts_engine_ask(engine.h, p.dump().c_str(), &out.p);
        if (s != TS_OK) return fail(s);
        if (answer_format == "structured") {
            std::cout << out.str() << '\n';
        } else {
            Owned txt;
            if ((s = ts_ask_text(out.p, &txt.p)) != TS_OK) return fail(s);
            std::cout << txt.str();
        }
        return kExitOk;
    }

    if (*doc) {
        Engine engine;
        if (int rc = open_engine(doc_flags, doc, engine)) return rc;
        Owned out;
        const ts_status s = ts_engine_get_doc(engine.h, doc_id.c_str(), &out.p);
        if (s != TS_OK) return fail(s);
        std::cout << out.str() << '\n';
        return kExitOk;
    }

    if (*genqa) {
        json p{{"input", qa_input},           {"out_train", qa_train},      {"out_val", qa_val},
               {"seed", qa_seed},             {"max_per_record", qa_max_per_record},
               {"max_context", qa_max_context}, {"train_fraction", qa_fraction}, {"format", qa_format}};
        Owned out;
        const ts_status s = ts_generate_qa(p.dump().c_str(), &out.p);
        if (s != TS_OK) return fail(s);
        std::cout << out.str() << '\n';
        return kExitOk;
    }

    if (*eval_retrieval) {
        Engine engine;
        if (int rc = open_engine(er_flags, eval_retrieval, engine)) return rc;
        json p{{"n", er_n}, {"methods", er_methods}, {"bootstrap", er_bootstrap}, {"jitter_m", er_jitter}};
        if (given(eval_retrieval, "--seed")) p["seed"] = er_seed;
        if (given(eval_retrieval, "--alpha")) p["alpha"] = er_alpha;
        if (given(eval_retrieval, "--radius-m")) p["radius_m"] = er_radius;
        if (!er_trace.empty()) p["trace_file"] = er_trace;
        Owned report, table;
        const ts_status s = ts_engine_eval_retrieval(engine.h, p.dump().c_str(), &report.p, &table.p);
        if (s != TS_OK) return fail(s);
        if (!write_file(er_report, report.str() + "\n")) return kExitData;
        std::cout << table.str();
        return kExitOk;
    }

    if (*grid) {
        Engine engine;
        if (int rc = open_engine(gs_flags, grid, engine)) return rc;
        json p{{"alphas", gs_alphas}, {"n_val", gs_n_val}, {"n_test", gs_n_test}};
        if (given(grid, "--seed")) p["seed"] = gs_seed;
        if (given(grid, "--radius-m")) p["radius_m"] = gs_radius;
        Owned out;
        const ts_status s = ts_engine_grid_search(engine.h, p.dump().c_str(), &out.p);
        if (s != TS_OK) return fail(s);
        const json r = json::parse(out.str());
        for (const auto& row : r["table"]) {
            std::printf("alpha=%.2f  mean Recall@5=%.4f\n", row["alpha"].get<double>(), row["mean_recall_at_5"].get<double>());
        }
        std::printf("best alpha: %g\n", r["best_alpha"].get<double>());
        if (!gs_report.empty() && !write_file(gs_report, out.str() + "\n")) return kExitData;
        return kExitOk;
    }

    if (*eval_reader) {
        json p{{"qa", rd_qa}, {"normalize", rd_normalize}};
        if (!rd_predictions.empty()) p["predictions"] = rd_predictions;
        Owned report, txt;
        ts_status s = ts_eval_reader(p.dump().c_str(), &report.p);
        if (s != TS_OK) return fail(s);
        if (!write_file(rd_report, report.str() + "\n")) return kExitData;
        if ((s = ts_reader_report_text(report.p, &txt.p)) != TS_OK) return fail(s);
        std::cout << txt.str();
        return kExitOk;
    }

    if (*serve) {
        Engine engine;
        if (int rc = open_engine(serve_flags, serve, engine)) return rc;

        // Signals go to the main thread only; server threads inherit the mask.
        sigset_t set;
        sigemptyset(&set);
        sigaddset(&set, SIGINT);
        sigaddset(&set, SIGTERM);
        pthread_sigmask(SIG_BLOCK, &set, nullptr);

        ts_server* server = nullptr;
        const ts_status s = ts_server_start(engine.h, serve_host.c_str(), -1, &server);
        if (s != TS_OK) return fail(s);
        std::cout << "listening on http://" << serve_host << ":" << ts_server_port(server) << std::endl;
        int sig = 0;
        sigwait(&set, &sig);
        ts_server_stop(server);
        ts_server_free(server);
        return kExitOk;
    }
    return kExitUsage;
}
