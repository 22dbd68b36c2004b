#include "corpus.hpp"

#include "engine.hpp"
#include "error.hpp"
#include "graph.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <regex>
#include <sstream>

namespace df {

namespace {

using json = nlohmann::json;

TurnRecord turn_from_json(const json& t) {
  TurnRecord turn;
  if (t.contains("lispress")) {
    if (t.contains("user_utterance") && t["user_utterance"].is_object())
      turn.utterance = t["user_utterance"].value("original_text", "");
    turn.annotation = normalize_lispress(t.at("lispress").get<std::string>());
    turn.syntax = Syntax::Prefix;
    return turn;
  }
  turn.utterance = t.value("utterance", "");
  turn.annotation = t.at("annotation").get<std::string>();
  const std::string syntax = t.value("syntax", "prefix");
  auto s = parse_syntax_name(syntax);
  if (!s) throw Error(ErrorCode::InvalidArgument, "unknown syntax " + syntax);
  turn.syntax = *s;
  if (t.contains("annotation_simplified"))
    turn.simplified = t["annotation_simplified"].get<std::string>();
  return turn;
}

std::string outcome_signature(const GraphContext& ctx, const Outcome& o) {
  std::string sig(outcome_kind_name(o.kind));
  switch (o.kind) {
    case OutcomeKind::Success:
      if (o.result) {
        if (const Value* v = ctx.final_value(*o.result)) sig += " " + render(*v);
      }
      break;
    case OutcomeKind::Pending:
      sig += " " + std::string(exception_kind_name(o.exception->kind));
      break;
    case OutcomeKind::Failed:
      sig += " " + std::string(error_code_name(*o.error));
      break;
  }
  return sig;
}

struct Twin {
  GraphContext ctx;
  Engine engine;

  Twin(const EventStore& fixture, const Clock& clock)
      : ctx(standard_registry(), clock, fixture), engine(ctx) {}

  // Runs one turn and answers any confirmation it raises.
  std::vector<std::string> run(std::string_view text, Syntax syntax) {
    std::vector<std::string> sigs;
    Outcome o = engine.run_turn(text, syntax);
    sigs.push_back(outcome_signature(ctx, o));
    for (int guard = 0; guard < 8 && o.kind == OutcomeKind::Pending &&
                        o.exception->kind == ExceptionKind::Confirmation;
         ++guard) {
      o = engine.run_turn("Confirm()", Syntax::Call);
      sigs.push_back(outcome_signature(ctx, o));
    }
    return sigs;
  }
};

std::string join(const std::vector<std::string>& parts) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += " / ";
    out += parts[i];
  }
  return out;
}

json quantiles_json(const Quantiles& q) {
  return {{"q25", q.q25}, {"q50", q.q50}, {"q75", q.q75}, {"count", q.count}};
}

}  // namespace

LoadResult parse_jsonl(std::string_view text) {
  LoadResult out;
  std::size_t lineno = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) {
      if (end == text.size()) break;
      continue;
    }
    try {
      const json j = json::parse(line);
      DialogueRecord rec;
      rec.dialogue_id = j.contains("dialogue_id") ? j["dialogue_id"].get<std::string>()
                                                  : "line-" + std::to_string(lineno);
      for (const auto& t : j.at("turns")) rec.turns.push_back(turn_from_json(t));
      if (rec.turns.empty()) throw Error(ErrorCode::InvalidArgument, "record has no turns");
      out.records.push_back(std::move(rec));
    } catch (const std::exception& e) {
      out.errors.push_back({lineno, e.what()});
    }
    if (end == text.size()) break;
  }
  return out;
}

LoadResult load_jsonl(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_jsonl(ss.str());
}

std::string normalize_lispress(std::string_view text) {
  static const std::regex string_lit(R"re(#\(\s*String\s+("(?:[^"\\]|\\.)*")\s*\))re");
  static const std::regex number_lit(R"re(#\(\s*(?:Number|Long)\s+(-?[0-9]+(?:\.[0-9]+)?)L?\s*\))re");
  static const std::regex bool_lit(R"re(#\(\s*Boolean\s+(true|false)\s*\))re");
  static const std::regex long_suffix(R"re(\b(-?[0-9]+)L\b)re");
  static const std::regex empty_struct(R"re(\^\(\s*(\w+)\s*\)\s*EmptyStructConstraint)re");
  std::string s(text);
  s = std::regex_replace(s, string_lit, "$1");
  s = std::regex_replace(s, number_lit, "$1");
  s = std::regex_replace(s, bool_lit, "$1");
  s = std::regex_replace(s, long_suffix, "$1");
  s = std::regex_replace(s, empty_struct, "Constraint[$1]");
  return s;
}

SimplifyReport simplify_dataset(const std::vector<DialogueRecord>& records, const RuleSet& rules) {
  SimplifyReport out;
  out.records = records;
  for (auto& rec : out.records) {
    for (std::size_t i = 0; i < rec.turns.size(); ++i) {
      auto& turn = rec.turns[i];
      try {
        turn.simplified = print_call(apply_rules(parse(turn.annotation, turn.syntax), rules).expr);
      } catch (const std::exception& e) {
        turn.simplified.reset();
        out.errors.push_back({rec.dialogue_id, i, e.what()});
      }
    }
  }
  return out;
}

std::string to_jsonl(const std::vector<DialogueRecord>& records) {
  std::string out;
  for (const auto& rec : records) {
    json turns = json::array();
    for (const auto& t : rec.turns) {
      json jt = {{"utterance", t.utterance},
                 {"annotation", t.annotation},
                 {"syntax", t.syntax == Syntax::Call ? "call" : "prefix"}};
      if (t.simplified) jt["annotation_simplified"] = *t.simplified;
      turns.push_back(std::move(jt));
    }
    out += json{{"dialogue_id", rec.dialogue_id}, {"turns", std::move(turns)}}.dump();
    out += '\n';
  }
  return out;
}

std::size_t nearest_rank(const std::vector<std::size_t>& sorted, double p) {
  if (sorted.empty()) throw Error(ErrorCode::EmptyCorpus, "no values");
  auto rank = static_cast<std::size_t>(std::ceil(p * static_cast<double>(sorted.size())));
  rank = std::clamp<std::size_t>(rank, 1, sorted.size());
  return sorted[rank - 1];
}

Quantiles quantiles(std::vector<std::size_t> values) {
  if (values.empty()) throw Error(ErrorCode::EmptyCorpus, "no values");
  std::sort(values.begin(), values.end());
  return {nearest_rank(values, 0.25), nearest_rank(values, 0.5), nearest_rank(values, 0.75),
          values.size()};
}

bool LengthReport::simplified_shorter() const {
  return simplified.q25 < original.q25 && simplified.q50 < original.q50 &&
         simplified.q75 < original.q75;
}

LengthReport length_stats(const std::vector<DialogueRecord>& records) {
  std::vector<std::size_t> orig, simp;
  for (const auto& rec : records) {
    for (const auto& t : rec.turns) {
      if (!t.simplified) continue;
      orig.push_back(tokenize_for_length(t.annotation).size());
      simp.push_back(tokenize_for_length(*t.simplified).size());
    }
  }
  if (orig.empty()) throw Error(ErrorCode::EmptyCorpus, "no simplified annotations");
  return {quantiles(orig), quantiles(simp)};
}

std::string format_table(const LengthReport& r) {
  std::ostringstream os;
  auto row = [&os](const char* name, const Quantiles& q) {
    os.width(12);
    os << std::left << name;
    for (auto v : {q.q25, q.q50, q.q75, q.count}) {
      os.width(7);
      os << std::right << v;
    }
    os << '\n';
  };
  os.width(12);
  os << std::left << "style";
  for (const char* h : {"q25", "q50", "q75", "count"}) {
    os.width(7);
    os << std::right << h;
  }
  os << '\n';
  row("original", r.original);
  row("simplified", r.simplified);
  os << "simplified shorter at every quantile: " << (r.simplified_shorter() ? "yes" : "no") << '\n';
  return os.str();
}

std::string format_json(const LengthReport& r) {
  return json{{"original", quantiles_json(r.original)},
              {"simplified", quantiles_json(r.simplified)},
              {"simplified_shorter", r.simplified_shorter()}}
      .dump();
}

std::size_t EquivalenceReport::passed() const {
  return static_cast<std::size_t>(
      std::count_if(rows.begin(), rows.end(), [](const EquivalenceRow& r) { return r.pass; }));
}

EquivalenceReport equivalence(const std::vector<DialogueRecord>& records, const EventStore& fixture,
                              const Clock& clock, const RuleSet& rules) {
  EquivalenceReport report;
  for (const auto& rec : records) {
    EquivalenceRow row{rec.dialogue_id, true, ""};
    Twin original(fixture, clock);
    Twin simplified(fixture, clock);
    for (std::size_t i = 0; i < rec.turns.size() && row.pass; ++i) {
      const auto& turn = rec.turns[i];
      std::string simple_text;
      try {
        simple_text =
            print_call(expand(apply_rules(parse(turn.annotation, turn.syntax), rules).expr));
      } catch (const std::exception& e) {
        row.pass = false;
        row.detail = "turn " + std::to_string(i) + ": rewrite failed: " + e.what();
        break;
      }
      const auto a = original.run(turn.annotation, turn.syntax);
      const auto b = simplified.run(simple_text, Syntax::Call);
      if (a != b) {
        row.pass = false;
        row.detail = "turn " + std::to_string(i) + ": " + join(a) + " vs " + join(b);
      }
    }
    if (row.pass && !(original.ctx.store == simplified.ctx.store)) {
      row.pass = false;
      row.detail = "final stores differ";
    }
    report.rows.push_back(std::move(row));
  }
  return report;
}

std::string format_equivalence(const EquivalenceReport& report) {
  std::ostringstream os;
  for (const auto& r : report.rows) {
    os << (r.pass ? "ok   " : "FAIL ") << r.dialogue_id;
    if (!r.detail.empty()) os << "  " << r.detail;
    os << '\n';
  }
  os << report.passed() << "/" << report.rows.size() << " dialogues equivalent\n";
  return os.str();
}

}  // namespace df
