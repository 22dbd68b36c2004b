#pragma once

#include "expr.hpp"
#include "rewrite.hpp"
#include "store.hpp"

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace df {

struct TurnRecord {
  std::string utterance;
  std::string annotation;
  Syntax syntax = Syntax::Prefix;
  std::optional<std::string> simplified;  // call syntax
};

struct DialogueRecord {
  std::string dialogue_id;
  std::vector<TurnRecord> turns;
};

struct LineError {
  std::size_t line = 0;  // 1-based
  std::string message;
};

struct LoadResult {
  std::vector<DialogueRecord> records;
  std::vector<LineError> errors;
};

// One JSON object per line: {dialogue_id, turns: [{utterance, annotation, syntax}]}.
// SMCalFlow-style lines ({user_utterance: {original_text}, lispress}) are also
// accepted. Malformed lines are reported and skipped. Throws IoError.
LoadResult load_jsonl(const std::string& path);
LoadResult parse_jsonl(std::string_view text);

// Rewrites the lispress literal and type notations this parser does not know
// (#(String "x"), 10L, ^(Event) EmptyStructConstraint) into prefix syntax.
std::string normalize_lispress(std::string_view text);

struct RecordError {
  std::string dialogue_id;
  std::size_t turn = 0;
  std::string message;
};

struct SimplifyReport {
  std::vector<DialogueRecord> records;
  std::vector<RecordError> errors;  // those turns keep no simplified text
};

SimplifyReport simplify_dataset(const std::vector<DialogueRecord>& records,
                                const RuleSet& rules = simplify_rules());

// Adds annotation_simplified to every turn that has one.
std::string to_jsonl(const std::vector<DialogueRecord>& records);

struct Quantiles {
  std::size_t q25 = 0;
  std::size_t q50 = 0;
  std::size_t q75 = 0;
  std::size_t count = 0;
};

// Nearest rank: sorted[ceil(p * n) - 1].
std::size_t nearest_rank(const std::vector<std::size_t>& sorted, double p);
// Throws EmptyCorpus.
Quantiles quantiles(std::vector<std::size_t> values);

struct LengthReport {
  Quantiles original;
  Quantiles simplified;

  // Simplified strictly below original at all three quantiles.
  bool simplified_shorter() const;
};

// Token counts of every turn that has a simplified annotation. Throws EmptyCorpus.
LengthReport length_stats(const std::vector<DialogueRecord>& records);
std::string format_table(const LengthReport& report);
std::string format_json(const LengthReport& report);

struct EquivalenceRow {
  std::string dialogue_id;
  bool pass = false;
  std::string detail;
};

struct EquivalenceReport {
  std::vector<EquivalenceRow> rows;

  std::size_t passed() const;
  bool all_passed() const { return passed() == rows.size(); }
};

// Runs each dialogue as written and as expand(simplify(...)) in twin fresh
// contexts, answering confirmations affirmatively, and compares outcome kinds,
// final values, pending exception kinds and the final stores.
EquivalenceReport equivalence(const std::vector<DialogueRecord>& records, const EventStore& fixture,
                              const Clock& clock, const RuleSet& rules = simplify_rules());

std::string format_equivalence(const EquivalenceReport& report);

}  // namespace df
