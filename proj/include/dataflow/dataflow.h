#ifndef DATAFLOW_DATAFLOW_H
#define DATAFLOW_DATAFLOW_H

#include <stddef.h>

#ifdef __cplusplus
extern "C" {
#endif

#if defined(__GNUC__)
#define DF_API __attribute__((visibility("default")))
#else
#define DF_API
#endif

typedef enum df_status {
  DF_OK = 0,
  DF_ERR_SYNTAX,
  DF_ERR_UNBOUND_VARIABLE,
  DF_ERR_UNBALANCED_PARENS,
  DF_ERR_UNKNOWN_FUNCTION,
  DF_ERR_ARITY,
  DF_ERR_UNKNOWN_PARAM,
  DF_ERR_TYPE,
  DF_ERR_DUPLICATE_FUNCTION,
  DF_ERR_NO_MATCH,
  DF_ERR_WRONG_ANSWER_TYPE,
  DF_ERR_EVENT_VANISHED,
  DF_ERR_INVALID_UPDATE,
  DF_ERR_EMPTY_SPEC,
  DF_ERR_CYCLE,
  DF_ERR_IO,
  DF_ERR_EMPTY_CORPUS,
  DF_ERR_UNKNOWN_TURN,
  DF_ERR_NO_PENDING,
  DF_ERR_DOMAIN,
  DF_ERR_INVALID_ARGUMENT,
  DF_ERR_INTERNAL
} df_status;

/* One dialogue: a graph context with its own clock and event store. */
typedef struct df_session df_session;

/* "SyntaxError", "NoMatch", ...; "Ok" for DF_OK. */
DF_API const char* df_status_name(df_status status);
/* Message of the last failed call on this thread; empty when none. */
DF_API const char* df_last_error(void);
/* Frees strings returned through char** out parameters. */
DF_API void df_string_free(char* s);

/* now: ISO timestamp like 2023-01-01T08:00, or NULL for that default.
   events_json: JSON array of events, or NULL for an empty store. */
DF_API df_status df_session_create(const char* now, const char* events_json, df_session** out);
DF_API void df_session_destroy(df_session* session);

/* syntax: "call", "prefix" or NULL (call). A turn that fails still returns
   DF_OK; the failure is in the outcome.
   out_json: {turn, outcome, message, result, error, exception, pending} */
DF_API df_status df_session_run_turn(df_session* session, const char* text, const char* syntax,
                                     char** out_json);
DF_API df_status df_session_turn_count(const df_session* session, int* out);
/* Versioned snapshot of every node and turn. */
DF_API df_status df_session_graph_json(const df_session* session, char** out);
/* turn < 0 renders the whole graph. */
DF_API df_status df_session_graph_dot(const df_session* session, int turn, char** out);
DF_API df_status df_session_store_json(const df_session* session, char** out);

/* Rewriting. Outputs are in call syntax. */
DF_API df_status df_simplify(const char* text, const char* syntax, char** out);
DF_API df_status df_expand(const char* text, const char* syntax, char** out);
/* JSON {result, passes, trace: [{rule, pass, path, before, after}]} */
DF_API df_status df_explain(const char* text, const char* syntax, char** out_json);
/* Length metric used by the corpus statistics. */
DF_API df_status df_token_count(const char* text, size_t* out);
/* phase: "simplify" or "expand"; one rule name per line. */
DF_API df_status df_rule_manifest(const char* phase, char** out);

/* Corpus files, one dialogue per line. Without lenient, any load or rewrite
   error fails the call. report_json: {records, errors: [...]} */
DF_API df_status df_corpus_simplify(const char* in_path, const char* out_path, int lenient,
                                    char** report_json);
/* format: "table" or "json". */
DF_API df_status df_corpus_stats(const char* in_path, int lenient, const char* format, char** out);
/* JSON {passed, total, rows: [{dialogue_id, pass, detail}]} */
DF_API df_status df_corpus_equivalence(const char* in_path, const char* events_path, const char* now,
                                       char** out_json);

#ifdef __cplusplus
}
#endif

#endif
