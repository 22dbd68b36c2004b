#include "dataflow/dataflow.h"

#include "corpus.hpp"
#include "engine.hpp"
#include "graph.hpp"
#include "rewrite.hpp"
#include "store.hpp"

#include <json.hpp>

#include <cstdlib>
#include <cstring>
#include <fstream>
#include <new>
#include <string>

struct df_session {
  df::GraphContext ctx;
  df::Engine engine;

  df_session(df::Clock clock, df::EventStore store)
      : ctx(df::standard_registry(), clock, std::move(store)), engine(ctx) {}
};

namespace {

using json = nlohmann::json;

thread_local std::string last_error;

df_status to_status(df::ErrorCode code) { return static_cast<df_status>(static_cast<int>(code) + 1); }

// Runs body, translating exceptions into a status and the thread's last error.
template <typename F>
df_status guarded(F&& body) {
  try {
    body();
    last_error.clear();
    return DF_OK;
  } catch (const df::Error& e) {
    last_error = e.what();
    return to_status(e.code());
  } catch (const std::bad_alloc&) {
    last_error = "out of memory";
    return DF_ERR_INTERNAL;
  } catch (const std::exception& e) {
    last_error = e.what();
    return DF_ERR_INTERNAL;
  }
}

void require(const void* p, const char* what) {
  if (!p) throw df::Error(df::ErrorCode::InvalidArgument, std::string(what) + " is null");
}

char* dup(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

df::Syntax syntax_of(const char* name) {
  if (!name) return df::Syntax::Call;
  auto s = df::parse_syntax_name(name);
  if (!s) throw df::Error(df::ErrorCode::InvalidArgument, std::string("unknown syntax ") + name);
  return *s;
}

df::Clock clock_of(const char* now) {
  if (!now) return df::Clock::standard();
  auto dt = df::parse_iso_datetime(now);
  if (!dt) throw df::Error(df::ErrorCode::InvalidArgument, std::string("bad timestamp ") + now);
  return df::Clock{*dt};
}

df::LoadResult load_checked(const char* path, bool lenient) {
  df::LoadResult lr = df::load_jsonl(path);
  if (!lenient && !lr.errors.empty())
    throw df::Error(df::ErrorCode::InvalidArgument,
                    "line " + std::to_string(lr.errors.front().line) + ": " + lr.errors.front().message);
  return lr;
}

json errors_json(const df::LoadResult& lr, const df::SimplifyReport& sr) {
  json errors = json::array();
  for (const auto& e : lr.errors) errors.push_back({{"line", e.line}, {"message", e.message}});
  for (const auto& e : sr.errors)
    errors.push_back({{"dialogue_id", e.dialogue_id}, {"turn", e.turn}, {"message", e.message}});
  return errors;
}

df::SimplifyReport simplify_checked(const df::LoadResult& lr, bool lenient) {
  df::SimplifyReport sr = df::simplify_dataset(lr.records);
  if (!lenient && !sr.errors.empty()) {
    const auto& e = sr.errors.front();
    throw df::Error(df::ErrorCode::InvalidArgument,
                    e.dialogue_id + " turn " + std::to_string(e.turn) + ": " + e.message);
  }
  return sr;
}

}  // namespace

extern "C" {

const char* df_status_name(df_status status) {
  static const char* const ok = "Ok";
  static const char* const internal = "Internal";
  if (status == DF_OK) return ok;
  if (status == DF_ERR_INTERNAL) return internal;
  const int code = static_cast<int>(status) - 1;
  if (code < 0 || code > static_cast<int>(df::ErrorCode::InvalidArgument)) return "Unknown";
  return df::error_code_name(static_cast<df::ErrorCode>(code)).data();
}

const char* df_last_error(void) { return last_error.c_str(); }

void df_string_free(char* s) { std::free(s); }

df_status df_session_create(const char* now, const char* events_json, df_session** out) {
  return guarded([&] {
    require(out, "out");
    *out = nullptr;
    df::EventStore store = events_json ? df::EventStore::from_json(events_json) : df::EventStore{};
    *out = new df_session(clock_of(now), std::move(store));
  });
}

void df_session_destroy(df_session* session) { delete session; }

df_status df_session_run_turn(df_session* session, const char* text, const char* syntax,
                              char** out_json) {
  return guarded([&] {
    require(session, "session");
    require(text, "text");
    require(out_json, "out_json");
    const df::Syntax syn = syntax_of(syntax);
    const df::Outcome o = session->engine.run_turn(text, syn);
    json j = json::parse(df::outcome_to_json_text(o));
    j["outcome"] = j["kind"];
    j.erase("kind");
    const auto& turns = session->ctx.turns();
    j["turn"] = turns.empty() ? 0 : turns.back().index;
    if (o.kind == df::OutcomeKind::Success && o.result) {
      if (const df::Value* v = session->ctx.final_value(*o.result))
        j["value"] = json::parse(df::value_to_json_text(*v));
    }
    j["pending"] = session->ctx.pending ? j["exception"] : json(nullptr);
    *out_json = dup(j.dump());
  });
}

df_status df_session_turn_count(const df_session* session, int* out) {
  return guarded([&] {
    require(session, "session");
    require(out, "out");
    *out = static_cast<int>(session->ctx.turns().size());
  });
}

df_status df_session_graph_json(const df_session* session, char** out) {
  return guarded([&] {
    require(session, "session");
    require(out, "out");
    *out = dup(df::export_json(session->ctx));
  });
}

df_status df_session_graph_dot(const df_session* session, int turn, char** out) {
  return guarded([&] {
    require(session, "session");
    require(out, "out");
    *out = dup(turn < 0 ? df::export_dot(session->ctx) : df::export_dot(session->ctx, turn));
  });
}

df_status df_session_store_json(const df_session* session, char** out) {
  return guarded([&] {
    require(session, "session");
    require(out, "out");
    *out = dup(session->ctx.store.to_json());
  });
}

df_status df_simplify(const char* text, const char* syntax, char** out) {
  return guarded([&] {
    require(text, "text");
    require(out, "out");
    *out = dup(df::simplify_text(text, syntax_of(syntax)));
  });
}

df_status df_expand(const char* text, const char* syntax, char** out) {
  return guarded([&] {
    require(text, "text");
    require(out, "out");
    *out = dup(df::print_call(df::expand(df::parse(text, syntax_of(syntax)))));
  });
}

df_status df_explain(const char* text, const char* syntax, char** out_json) {
  return guarded([&] {
    require(text, "text");
    require(out_json, "out_json");
    const df::RewriteResult r = df::apply_rules(df::parse(text, syntax_of(syntax)), df::simplify_rules());
    json trace = json::array();
    for (const auto& step : r.trace)
      trace.push_back({{"rule", step.rule},
                       {"pass", step.pass},
                       {"path", step.path},
                       {"before", df::print_call(step.before)},
                       {"after", df::print_call(step.after)}});
    *out_json = dup(json{{"result", df::print_call(r.expr)}, {"passes", r.passes}, {"trace", trace}}.dump());
  });
}

df_status df_token_count(const char* text, size_t* out) {
  return guarded([&] {
    require(text, "text");
    require(out, "out");
    *out = df::tokenize_for_length(text).size();
  });
}

df_status df_rule_manifest(const char* phase, char** out) {
  return guarded([&] {
    require(phase, "phase");
    require(out, "out");
    const std::string p = phase;
    if (p == "simplify")
      *out = dup(df::rule_manifest(df::simplify_rules()));
    else if (p == "expand")
      *out = dup(df::rule_manifest(df::expand_rules()));
    else
      throw df::Error(df::ErrorCode::InvalidArgument, "unknown phase " + p);
  });
}

df_status df_corpus_simplify(const char* in_path, const char* out_path, int lenient,
                             char** report_json) {
  return guarded([&] {
    require(in_path, "in_path");
    require(out_path, "out_path");
    const df::LoadResult lr = load_checked(in_path, lenient != 0);
    const df::SimplifyReport sr = simplify_checked(lr, lenient != 0);
    std::ofstream out(out_path, std::ios::binary);
    if (!out) throw df::Error(df::ErrorCode::Io, std::string("cannot write ") + out_path);
    out << df::to_jsonl(sr.records);
    if (!out) throw df::Error(df::ErrorCode::Io, std::string("write failed for ") + out_path);
    if (report_json)
      *report_json = dup(json{{"records", sr.records.size()}, {"errors", errors_json(lr, sr)}}.dump());
  });
}

df_status df_corpus_stats(const char* in_path, int lenient, const char* format, char** out) {
  return guarded([&] {
    require(in_path, "in_path");
    require(out, "out");
    const std::string fmt = format ? format : "table";
    if (fmt != "table" && fmt != "json")
      throw df::Error(df::ErrorCode::InvalidArgument, "unknown format " + fmt);
    const df::LoadResult lr = load_checked(in_path, lenient != 0);
    const df::SimplifyReport sr = simplify_checked(lr, lenient != 0);
    const df::LengthReport report = df::length_stats(sr.records);
    *out = dup(fmt == "json" ? df::format_json(report) : df::format_table(report));
  });
}

df_status df_corpus_equivalence(const char* in_path, const char* events_path, const char* now,
                                char** out_json) {
  return guarded([&] {
    require(in_path, "in_path");
    require(out_json, "out_json");
    const df::LoadResult lr = load_checked(in_path, false);
    const df::EventStore fixture =
        events_path ? df::EventStore::from_file(events_path) : df::EventStore{};
    const df::EquivalenceReport r = df::equivalence(lr.records, fixture, clock_of(now));
    json rows = json::array();
    for (const auto& row : r.rows)
      rows.push_back({{"dialogue_id", row.dialogue_id}, {"pass", row.pass}, {"detail", row.detail}});
    *out_json = dup(json{{"passed", r.passed()}, {"total", r.rows.size()}, {"rows", rows}}.dump());
  });
}

}  // extern "C"
