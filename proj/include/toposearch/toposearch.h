/* SPDX-License-Identifier: Apache-2.0 */
/* Copyright 2026 The toposearch Authors */

/*
 * C interface to the toposearch engine.
 *
 * Parameters and results are UTF-8 JSON text. Every string returned through
 * an out-parameter is owned by the caller and released with ts_free_string.
 * On failure the out-parameters are left untouched and ts_last_error()
 * describes the problem (thread-local, valid until the next call on the
 * same thread).
 */

#ifndef TOPOSEARCH_H
#define TOPOSEARCH_H

#ifdef __cplusplus
extern "C" {
#endif

#if defined(TS_BUILDING_LIBRARY)
#define TS_API __attribute__((visibility("default")))
#else
#define TS_API
#endif

typedef enum ts_status {
    TS_OK = 0,
    TS_ERR_INVALID_ARGUMENT = 1, /* bad parameter value or request */
    TS_ERR_FORMAT = 2,           /* malformed input data */
    TS_ERR_IO = 3,               /* file or socket failure */
    TS_ERR_NOT_FOUND = 4,        /* unknown document id or missing vector */
    TS_ERR_INTERNAL = 5
} ts_status;

typedef struct ts_engine ts_engine;
typedef struct ts_server ts_server;

TS_API const char* ts_version(void);
TS_API const char* ts_last_error(void);
/* Offending parameter name for TS_ERR_INVALID_ARGUMENT, or "". */
TS_API const char* ts_last_error_field(void);
TS_API void ts_free_string(char* s);

/* {"input", "out"} -> ingest summary. */
TS_API ts_status ts_ingest(const char* params_json, char** result_json);
/* Engine config JSON (corpus, embedder, vectors, dim, ...) -> index summary. */
TS_API ts_status ts_build_index(const char* config_json, char** result_json);
/* {"input", "out_train", "out_val", "seed", "max_per_record", "max_context",
 *  "train_fraction", "format"} -> generation summary. */
TS_API ts_status ts_generate_qa(const char* params_json, char** result_json);
/* {"qa", "normalize", "predictions"} -> reader report. */
TS_API ts_status ts_eval_reader(const char* params_json, char** report_json);
/* Renders a reader report as a plain-text table. */
TS_API ts_status ts_reader_report_text(const char* report_json, char** text);

/* Keys: corpus, embedder (hashing|file), vectors, query_vectors, dim,
 * radius_m, alpha, k, port, seed, config_file. */
TS_API ts_status ts_engine_open(const char* config_json, ts_engine** engine);
TS_API void ts_engine_close(ts_engine* engine);
TS_API ts_status ts_engine_stats(const ts_engine* engine, char** result_json);
/* {"q", "lat", "lon", "radius_m", "alpha", "k", "method"} -> ranked hits. */
TS_API ts_status ts_engine_search(const ts_engine* engine, const char* params_json, char** result_json);
/* {"question", "lat", "lon", "radius_m", "alpha"} -> answer with provenance. */
TS_API ts_status ts_engine_ask(const ts_engine* engine, const char* params_json, char** result_json);
TS_API ts_status ts_engine_get_doc(const ts_engine* engine, const char* doc_id, char** result_json);
/* {"n", "seed", "methods", "bootstrap", "alpha", "radius_m", "jitter_m",
 *  "trace_file"} -> report; table_text receives the plain-text table. */
TS_API ts_status ts_engine_eval_retrieval(const ts_engine* engine, const char* params_json, char** report_json,
                                          char** table_text);
/* {"alphas", "n_val", "n_test", "radius_m", "seed"} -> per-alpha table. */
TS_API ts_status ts_engine_grid_search(const ts_engine* engine, const char* params_json, char** result_json);

/* Renders search or ask JSON as human-readable text. */
TS_API ts_status ts_search_text(const char* search_json, char** text);
TS_API ts_status ts_ask_text(const char* ask_json, char** text);

/* Binds host:port (0 picks a free port, negative uses the engine config) and
 * serves on a background thread.
 * The engine must outlive the server. */
TS_API ts_status ts_server_start(const ts_engine* engine, const char* host, int port, ts_server** server);
TS_API int ts_server_port(const ts_server* server);
/* Blocks until ts_server_stop is called (e.g. from a signal handler thread). */
TS_API void ts_server_wait(ts_server* server);
TS_API void ts_server_stop(ts_server* server);
/* Stops if needed and releases the server. */
TS_API void ts_server_free(ts_server* server);

#ifdef __cplusplus
}
#endif

#endif /* TOPOSEARCH_H */
