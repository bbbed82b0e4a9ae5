/* Copyright sessrec contributors. Licensed under the terms of the Apache 2.0 license.
 * See LICENSE in the project root.
 *
 * C interface to the session-based recommendation engine. All functions
 * return a status code; sessrec_last_error() describes the most recent
 * failure on the calling thread. Handles are opaque and must be released
 * with their matching close function.
 */
#ifndef SESSREC_SESSREC_H
#define SESSREC_SESSREC_H

#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#if defined(_WIN32)
#define SESSREC_API __declspec(dllexport)
#else
#define SESSREC_API __attribute__((visibility("default")))
#endif

typedef enum sessrec_status {
  SESSREC_OK = 0,
  SESSREC_ERR_IO = 1,      /* missing or corrupt files */
  SESSREC_ERR_CONFIG = 2,  /* invalid configuration or arguments */
  SESSREC_ERR_RUNTIME = 3, /* violated precondition or internal failure */
} sessrec_status;

typedef struct sessrec_corpus sessrec_corpus; /* preprocessed corpus */
typedef struct sessrec_model sessrec_model;   /* trained parameters + config */

SESSREC_API const char* sessrec_version(void);

/* Message for the last failing call on this thread; empty if none. */
SESSREC_API const char* sessrec_last_error(void);

/* Frees strings produced by *_json out-parameters. */
SESSREC_API void sessrec_string_free(char* s);

/* Reads a user_id/item_id/timestamp TSV, splits sessions on the time gap,
 * filters rare items and short sessions, splits train/test per user, and
 * writes the corpus directory. */
SESSREC_API sessrec_status sessrec_preprocess(const char* events_tsv,
                                              const char* out_dir,
                                              int64_t gap_seconds,
                                              int64_t min_item_count,
                                              int64_t min_session_len,
                                              double train_fraction);

/* Generates the planted-cluster synthetic corpus directory (with a
 * clusters.json sidecar). */
SESSREC_API sessrec_status sessrec_synth(const char* out_dir, int64_t n_users,
                                         int64_t n_items, int64_t n_clusters,
                                         int64_t sessions_per_user,
                                         double mean_session_len,
                                         uint64_t seed);

SESSREC_API sessrec_status sessrec_corpus_open(const char* dir,
                                               sessrec_corpus** out);
SESSREC_API void sessrec_corpus_close(sessrec_corpus* corpus);

/* meta.json contents as a JSON string (caller frees). */
SESSREC_API sessrec_status sessrec_corpus_stats_json(const sessrec_corpus* corpus,
                                                     char** out_json);

/* Edge counts and in-degree histograms of the global graph as JSON. */
SESSREC_API sessrec_status sessrec_corpus_graph_stats_json(
    const sessrec_corpus* corpus, char** out_json);

/* Writes the global graph as JSONL, one edge object per line. */
SESSREC_API sessrec_status sessrec_corpus_dump_graph(const sessrec_corpus* corpus,
                                                     const char* path);

/* Trains with the JSON configuration (unknown keys rejected) and writes
 * checkpoint.bin, reports.jsonl and config.json into out_dir. When out_model
 * is non-null it receives the trained model. */
SESSREC_API sessrec_status sessrec_train(const sessrec_corpus* corpus,
                                         const char* config_json,
                                         const char* out_dir,
                                         sessrec_model** out_model);

SESSREC_API sessrec_status sessrec_model_open(const char* checkpoint_path,
                                              sessrec_model** out);
SESSREC_API void sessrec_model_close(sessrec_model* model);

/* Ranks every test prefix of the corpus and writes metrics.json
 * (HR@{3,5,10} and MRR@{3,5,10} percentages). */
SESSREC_API sessrec_status sessrec_evaluate(const sessrec_model* model,
                                            const sessrec_corpus* corpus,
                                            const char* metrics_json_path);

/* Grid search over the JSON grid (field name -> list of values) on top of
 * the base configuration; writes ranked results to sweep.csv. */
SESSREC_API sessrec_status sessrec_sweep(const sessrec_corpus* corpus,
                                         const char* config_json,
                                         const char* grid_json,
                                         const char* out_csv);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* SESSREC_SESSREC_H */
