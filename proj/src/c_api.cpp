// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The toposearch Authors

#include "toposearch/toposearch.h"

#include "toposearch/engine.hpp"
#include "toposearch/service.hpp"

#include <cstdlib>
#include <cstring>
#include <memory>
#include <new>
#include <string>

struct ts_engine {
    std::unique_ptr<toposearch::Engine> engine;
};

struct ts_server {
    std::unique_ptr<toposearch::Service> service;
};

namespace {

thread_local std::string g_last_error;
thread_local std::string g_last_field;

char* dup(const std::string& s) {
    char* out = static_cast<char*>(std::malloc(s.size() + 1));
    if (!out) throw std::bad_alloc();
    std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

std::string text(const char* s) { return s ? std::string(s) : std::string(); }

template <typename Fn>
ts_status guard(Fn&& fn) {
    g_last_error.clear();
    g_last_field.clear();
    try {
        fn();
        return TS_OK;
    } catch (const toposearch::ParamError& e) {
        g_last_error = e.what();
        g_last_field = e.field();
        return TS_ERR_INVALID_ARGUMENT;
    } catch (const toposearch::InvalidArgument& e) {
        g_last_error = e.what();
        return TS_ERR_INVALID_ARGUMENT;
    } catch (const toposearch::FormatError& e) {
        g_last_error = e.what();
        return TS_ERR_FORMAT;
    } catch (const toposearch::IoError& e) {
        g_last_error = e.what();
        return TS_ERR_IO;
    } catch (const toposearch::NotFound& e) {
        g_last_error = e.what();
        return TS_ERR_NOT_FOUND;
    } catch (const std::exception& e) {
        g_last_error = e.what();
        return TS_ERR_INTERNAL;
    } catch (...) {
        g_last_error = "unknown error";
        return TS_ERR_INTERNAL;
    }
}

void require(const void* p, const char* name) {
    if (!p) throw toposearch::InvalidArgument(std::string(name) + " must not be null");
}

} // namespace

extern "C" {

const char* ts_version(void) { return "0.1.0"; }
const char* ts_last_error(void) { return g_last_error.c_str(); }
const char* ts_last_error_field(void) { return g_last_field.c_str(); }
void ts_free_string(char* s) { std::free(s); }

ts_status ts_ingest(const char* params_json, char** result_json) {
    return guard([&] {
        require(result_json, "result_json");
        *result_json = dup(toposearch::run_ingest(text(params_json)));
    });
}

ts_status ts_build_index(const char* config_json, char** result_json) {
    return guard([&] {
        require(result_json, "result_json");
        const auto cfg = toposearch::parse_engine_config(text(config_json));
        *result_json = dup(toposearch::index_summary_to_json(toposearch::build_index(cfg)));
    });
}

ts_status ts_generate_qa(const char* params_json, char** result_json) {
    return guard([&] {
        require(result_json, "result_json");
        *result_json = dup(toposearch::run_generate_qa(text(params_json)));
    });
}

ts_status ts_eval_reader(const char* params_json, char** report_json) {
    return guard([&] {
        require(report_json, "report_json");
        *report_json = dup(toposearch::run_eval_reader(text(params_json)));
    });
}

ts_status ts_reader_report_text(const char* report_json, char** out) {
    return guard([&] {
        require(report_json, "report_json");
        require(out, "text");
        *out = dup(toposearch::reader_report_to_text(report_json));
    });
}

ts_status ts_engine_open(const char* config_json, ts_engine** engine) {
    return guard([&] {
        require(engine, "engine");
        auto cfg = toposearch::parse_engine_config(text(config_json));
        auto handle = std::make_unique<ts_engine>();
        handle->engine = std::make_unique<toposearch::Engine>(std::move(cfg));
        *engine = handle.release();
    });
}

void ts_engine_close(ts_engine* engine) { delete engine; }

ts_status ts_engine_stats(const ts_engine* engine, char** result_json) {
    return guard([&] {
        require(engine, "engine");
        require(result_json, "result_json");
        *result_json = dup(engine->engine->stats_json());
    });
}

ts_status ts_engine_search(const ts_engine* engine, const char* params_json, char** result_json) {
    return guard([&] {
        require(engine, "engine");
        require(result_json, "result_json");
        *result_json = dup(engine->engine->search_json(text(params_json)));
    });
}

ts_status ts_engine_ask(const ts_engine* engine, const char* params_json, char** result_json) {
    return guard([&] {
        require(engine, "engine");
        require(result_json, "result_json");
        *result_json = dup(engine->engine->ask_json(text(params_json)));
    });
}

ts_status ts_engine_get_doc(const ts_engine* engine, const char* doc_id, char** result_json) {
    return guard([&] {
        require(engine, "engine");
        require(doc_id, "doc_id");
        require(result_json, "result_json");
        *result_json = dup(engine->engine->doc_json(doc_id));
    });
}

ts_status ts_engine_eval_retrieval(const ts_engine* engine, const char* params_json, char** report_json,
                                   char** table_text) {
    return guard([&] {
        require(engine, "engine");
        require(report_json, "report_json");
        std::string table;
        const std::string report = toposearch::run_eval_retrieval(*engine->engine, text(params_json), table);
        char* r = dup(report);
        if (table_text) {
            try {
                *table_text = dup(table);
            } catch (...) {
                std::free(r);
                throw;
            }
        }
        *report_json = r;
    });
}

ts_status ts_engine_grid_search(const ts_engine* engine, const char* params_json, char** result_json) {
    return guard([&] {
        require(engine, "engine");
        require(result_json, "result_json");
        *result_json = dup(toposearch::run_grid_search(*engine->engine, text(params_json)));
    });
}

ts_status ts_search_text(const char* search_json, char** out) {
    return guard([&] {
        require(search_json, "search_json");
        require(out, "text");
        *out = dup(toposearch::search_result_to_text(search_json));
    });
}

ts_status ts_ask_text(const char* ask_json, char** out) {
    return guard([&] {
        require(ask_json, "ask_json");
        require(out, "text");
        *out = dup(toposearch::ask_result_to_text(ask_json));
    });
}

ts_status ts_server_start(const ts_engine* engine, const char* host, int port, ts_server** server) {
    return guard([&] {
        require(engine, "engine");
        require(server, "server");
        if (port > 65535) throw toposearch::ParamError("port", "must lie in [0, 65535]");
        if (port < 0) port = engine->engine->config().port;
        auto handle = std::make_unique<ts_server>();
        handle->service =
            std::make_unique<toposearch::Service>(*engine->engine, host ? host : "127.0.0.1", port);
        handle->service->start();
        *server = handle.release();
    });
}

int ts_server_port(const ts_server* server) { return server ? server->service->port() : -1; }

void ts_server_wait(ts_server* server) {
    if (server) server->service->wait();
}

void ts_server_stop(ts_server* server) {
    if (server) server->service->stop();
}

void ts_server_free(ts_server* server) { delete server; }

} // extern "C"
