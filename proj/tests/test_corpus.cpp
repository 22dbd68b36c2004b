#include "corpus.hpp"
#include "support.hpp"

#include <doctest.h>

#include <algorithm>
#include <random>

using namespace df;

namespace {

// Smallest value v with at least p*n values <= v.
std::size_t oracle_quantile(const std::vector<std::size_t>& values, double p) {
  std::vector<std::size_t> candidates = values;
  std::sort(candidates.begin(), candidates.end());
  for (std::size_t v : candidates) {
    const auto le = std::count_if(values.begin(), values.end(), [v](std::size_t x) { return x <= v; });
    if (static_cast<double>(le) >= p * static_cast<double>(values.size())) return v;
  }
  return candidates.back();
}

std::vector<DialogueRecord> bundled() { return load_jsonl(testing::source_path("data/corpus.jsonl")).records; }

}  // namespace

TEST_CASE("nearest-rank quantiles agree with a counting oracle") {
  std::mt19937 rng(7);
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<std::size_t> v(1 + rng() % 40);
    for (auto& x : v) x = rng() % 100;
    const Quantiles q = quantiles(v);
    CHECK(q.q25 == oracle_quantile(v, 0.25));
    CHECK(q.q50 == oracle_quantile(v, 0.5));
    CHECK(q.q75 == oracle_quantile(v, 0.75));
    CHECK(q.count == v.size());
  }
  CHECK_THROWS_AS(quantiles({}), Error);
}

TEST_CASE("jsonl loading reports bad lines and keeps the rest") {
  const std::string text =
      R"j({"dialogue_id":"a","turns":[{"utterance":"u","annotation":"(Add 1 2)","syntax":"prefix"}]})j"
      "\n\nnot json\n"
      R"j({"dialogue_id":"b","turns":[]})j"
      "\n"
      R"j({"dialogue_id":"c","turns":[{"annotation":"Add(1,2)","syntax":"call"}]})j";
  const LoadResult r = parse_jsonl(text);
  REQUIRE(r.records.size() == 2);
  CHECK(r.records[1].turns[0].syntax == Syntax::Call);
  REQUIRE(r.errors.size() == 2);
  CHECK(r.errors[0].line == 3);
  CHECK(r.errors[1].line == 4);
  CHECK_THROWS_AS(load_jsonl("/nonexistent/corpus.jsonl"), Error);
}

TEST_CASE("SMCalFlow lines are normalized") {
  CHECK(normalize_lispress(R"j((Yield (Foo :n #(Number 3) :s #(String "hi") :l 10L :e (^(Event) EmptyStructConstraint))))j") ==
        R"j((Yield (Foo :n 3 :s "hi" :l 10 :e (Constraint[Event]))))j");
  const LoadResult r = parse_jsonl(
      R"j({"dialogue_id":"x","turns":[{"user_utterance":{"original_text":"hi"},"lispress":"(Yield (Add 1L 2L))"}]})j");
  REQUIRE(r.records.size() == 1);
  CHECK(r.records[0].turns[0].utterance == "hi");
  CHECK(r.records[0].turns[0].annotation == "(Yield (Add 1 2))");
}

TEST_CASE("simplify_dataset writes annotation_simplified") {
  const SimplifyReport s = simplify_dataset(bundled());
  CHECK(s.errors.empty());
  const std::string out = to_jsonl(s.records);
  const LoadResult back = parse_jsonl(out);
  REQUIRE(back.records.size() == 50);
  CHECK(back.records[0].turns[0].simplified == std::optional<std::string>("DeleteEvent(starts_at(tomorrow(),NumberAM(10)))"));
}

TEST_CASE("simplify_dataset reports rewrite failures per turn") {
  std::vector<DialogueRecord> recs = {{"bad", {{"u", "(Add 1", Syntax::Prefix, std::nullopt}}}};
  const SimplifyReport s = simplify_dataset(recs);
  REQUIRE(s.errors.size() == 1);
  CHECK(s.errors[0].dialogue_id == "bad");
  CHECK_FALSE(s.records[0].turns[0].simplified.has_value());
  CHECK_THROWS_AS(length_stats(s.records), Error);
}

TEST_CASE("length report on the bundled corpus") {
  const LengthReport r = length_stats(simplify_dataset(bundled()).records);
  CHECK(r.simplified_shorter());
  CHECK(format_table(r).find("simplified") != std::string::npos);
  CHECK(format_json(r).find("\"simplified_shorter\":true") != std::string::npos);
}

TEST_CASE("equivalence harness catches a semantics-changing rule") {
  RuleSet broken = simplify_rules();
  for (auto& rule : broken)
    if (rule.name == "at_time")
      rule = template_rule("at_time", Phase::Simplify, "wrong field", "EventAtTime(time=?x)", "ends_at(?x)");
  const auto recs = bundled();
  const EquivalenceReport good = equivalence(recs, testing::fixture(), Clock::standard());
  const EquivalenceReport bad = equivalence(recs, testing::fixture(), Clock::standard(), broken);
  CHECK(good.all_passed());
  CHECK_FALSE(bad.all_passed());
  CHECK(bad.passed() < good.passed());
}
