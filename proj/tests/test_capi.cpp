#include "dataflow/dataflow.h"

#include <doctest.h>

#include <json.hpp>

#include <cstdio>
#include <string>

namespace {

std::string take(char* p) {
  std::string s = p ? p : "";
  df_string_free(p);
  return s;
}

std::string path(const char* rel) { return std::string(DF_SOURCE_DIR) + "/" + rel; }

}  // namespace

TEST_CASE("C API session runs the add-then-revise dialogue") {
  df_session* s = nullptr;
  REQUIRE(df_session_create(nullptr, nullptr, &s) == DF_OK);
  char* out = nullptr;
  REQUIRE(df_session_run_turn(s, "Add(2,Add(3,5))", nullptr, &out) == DF_OK);
  auto j = nlohmann::json::parse(take(out));
  CHECK(j["outcome"] == "success");
  CHECK(j["message"] == "10");
  CHECK(j["turn"] == 0);
  REQUIRE(df_session_run_turn(s, "(revise :old (Int? 3) :new (Int 6))", "prefix", &out) == DF_OK);
  j = nlohmann::json::parse(take(out));
  CHECK(j["message"] == "13");
  int turns = 0;
  CHECK(df_session_turn_count(s, &turns) == DF_OK);
  CHECK(turns == 2);
  REQUIRE(df_session_graph_json(s, &out) == DF_OK);
  CHECK(nlohmann::json::parse(take(out))["turns"].size() == 2);
  REQUIRE(df_session_graph_dot(s, 1, &out) == DF_OK);
  CHECK(take(out).rfind("digraph dataflow {", 0) == 0);
  CHECK(df_session_graph_dot(s, 9, &out) == DF_ERR_UNKNOWN_TURN);
  CHECK(std::string(df_status_name(DF_ERR_UNKNOWN_TURN)) == "UnknownTurn");
  CHECK(std::string(df_last_error()).size() > 0);
  df_session_destroy(s);
}

TEST_CASE("C API reports pending and failed turns in the outcome") {
  df_session* s = nullptr;
  REQUIRE(df_session_create("2023-01-01T08:00", "[]", &s) == DF_OK);
  char* out = nullptr;
  REQUIRE(df_session_run_turn(s, "Add(2)", "call", &out) == DF_OK);
  auto j = nlohmann::json::parse(take(out));
  CHECK(j["outcome"] == "pending");
  CHECK(j["pending"]["kind"] == "MissingInput");
  REQUIRE(df_session_run_turn(s, "Nope(1)", "call", &out) == DF_OK);
  j = nlohmann::json::parse(take(out));
  CHECK(j["outcome"] == "failed");
  CHECK(j["error"] == "UnknownFunction");
  CHECK(df_session_run_turn(s, "1", "lisp", &out) == DF_ERR_INVALID_ARGUMENT);
  CHECK(df_session_run_turn(nullptr, "1", nullptr, &out) == DF_ERR_INVALID_ARGUMENT);
  df_session_destroy(s);
}

TEST_CASE("C API argument validation") {
  df_session* s = nullptr;
  CHECK(df_session_create("yesterday", nullptr, &s) == DF_ERR_INVALID_ARGUMENT);
  CHECK(s == nullptr);
  CHECK(df_session_create(nullptr, "{oops", &s) != DF_OK);
  CHECK(df_session_create(nullptr, nullptr, nullptr) == DF_ERR_INVALID_ARGUMENT);
  df_session_destroy(nullptr);
  df_string_free(nullptr);
  CHECK(std::string(df_status_name(DF_OK)) == "Ok");
}

TEST_CASE("C API rewriting") {
  char* out = nullptr;
  REQUIRE(df_simplify("(Yield (Add 1 2))", "prefix", &out) == DF_OK);
  CHECK(take(out) == "Add(1,2)");
  REQUIRE(df_expand("Add(1,2)", nullptr, &out) == DF_OK);
  CHECK(take(out) == "Yield(Add(1,2))");
  REQUIRE(df_explain("(Yield (Add 1 2))", "prefix", &out) == DF_OK);
  const auto j = nlohmann::json::parse(take(out));
  CHECK(j["result"] == "Add(1,2)");
  CHECK(j["trace"][0]["rule"] == "strip_yield");
  size_t n = 0;
  REQUIRE(df_token_count("Add(1,2)", &n) == DF_OK);
  CHECK(n == 6);
  CHECK(df_simplify("Add(", nullptr, &out) == DF_ERR_SYNTAX);
  REQUIRE(df_rule_manifest("expand", &out) == DF_OK);
  CHECK(take(out).rfind("expand_delete\n", 0) == 0);
  CHECK(df_rule_manifest("other", &out) == DF_ERR_INVALID_ARGUMENT);
}

TEST_CASE("C API corpus operations") {
  char* out = nullptr;
  const std::string corpus = path("data/corpus.jsonl");
  REQUIRE(df_corpus_stats(corpus.c_str(), 0, "json", &out) == DF_OK);
  CHECK(nlohmann::json::parse(take(out))["simplified_shorter"] == true);
  const std::string dest = std::string(DF_BINARY_DIR) + "/capi_simplified.jsonl";
  REQUIRE(df_corpus_simplify(corpus.c_str(), dest.c_str(), 0, &out) == DF_OK);
  CHECK(nlohmann::json::parse(take(out))["records"] == 50);
  std::remove(dest.c_str());
  REQUIRE(df_corpus_equivalence(corpus.c_str(), path("data/events.json").c_str(), nullptr, &out) == DF_OK);
  const auto eq = nlohmann::json::parse(take(out));
  CHECK(eq["passed"] == eq["total"]);
  CHECK(df_corpus_stats("/nonexistent.jsonl", 0, nullptr, &out) == DF_ERR_IO);
  CHECK(df_corpus_stats(corpus.c_str(), 0, "xml", &out) == DF_ERR_INVALID_ARGUMENT);
}
