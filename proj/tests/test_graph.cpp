#include "graph.hpp"
#include "support.hpp"

#include <doctest.h>

#include <json.hpp>

using namespace df;
using testing::Dialogue;
using testing::count_substr;

namespace {

std::size_t input_edges(const GraphContext& ctx) {
  std::size_t n = 0;
  for (const auto& node : ctx.nodes()) n += node.inputs.size();
  return n;
}

std::size_t result_edges(const GraphContext& ctx) {
  std::size_t n = 0;
  for (const auto& node : ctx.nodes())
    if (node.result && *node.result != node.id) ++n;
  return n;
}

}  // namespace

TEST_CASE("empty context exports header and footer only") {
  GraphContext ctx(standard_registry());
  CHECK(export_dot(ctx) == "digraph dataflow {\n}\n");
  const auto j = nlohmann::json::parse(export_json(ctx));
  CHECK(j["nodes"].empty());
  CHECK(j["turns"].empty());
  CHECK(j["version"] == "v1");
}

TEST_CASE("DOT edges for Add(2,Add(3,5))") {
  Dialogue d;
  d.turn("Add(2,Add(3,5))");
  const std::string dot = export_dot(d.ctx);
  const std::size_t dashed = count_substr(dot, "[style=dashed, color=blue]");
  const std::size_t solid = count_substr(dot, "-> n") - dashed;
  CHECK(solid == input_edges(d.ctx));
  CHECK(dashed == result_edges(d.ctx));
  CHECK(solid == 5);
  CHECK(dashed == 3);
  CHECK(dot.find("n3 [label=\"Add_3\"]") != std::string::npos);
}

TEST_CASE("DOT for an unknown turn") {
  Dialogue d;
  d.turn("Add(1,2)");
  CHECK_THROWS_AS(export_dot(d.ctx, 3), Error);
  CHECK_NOTHROW(export_dot(d.ctx, 0));
}

TEST_CASE("JSON snapshot round-trips") {
  Dialogue d(testing::fixture());
  d.turn("Add(2,Add(3,5))");
  d.turn("revise(old=Int?(3), new=Int(6))");
  d.turn("Add(2)");
  d.turn("DeleteEvent(has_subject(\"Yoga\"))");
  const std::string snap = export_json(d.ctx);
  GraphContext copy(standard_registry());
  import_json(copy, snap);
  CHECK(export_json(copy) == snap);
  CHECK(copy.node_count() == d.ctx.node_count());
  REQUIRE(copy.pending.has_value());
  CHECK(copy.pending->kind == ExceptionKind::Confirmation);
}

TEST_CASE("single literal turn is wrapped in Yield") {
  Dialogue d;
  d.turn("7");
  const auto j = nlohmann::json::parse(export_json(d.ctx));
  CHECK(j["nodes"].size() == 2);
  CHECK(j["nodes"][1]["func"] == "Yield");
  CHECK(j["turns"].size() == 1);
  CHECK(j["turns"][0]["outcome"]["kind"] == "success");
}

TEST_CASE("match_constraint on Int nodes") {
  Dialogue d;
  d.turn("Add(3,5)");
  ConstraintSpec three{"Int", std::nullopt, {{"value", std::int64_t{3}}}};
  ConstraintSpec any_int{"Int", std::nullopt, {}};
  CHECK(match_constraint(d.ctx, NodeId{0}, three));
  CHECK_FALSE(match_constraint(d.ctx, NodeId{1}, three));
  CHECK(match_constraint(d.ctx, NodeId{1}, any_int));
}

TEST_CASE("match_constraint on events") {
  Dialogue d(testing::fixture());
  d.turn("FindEvents(has_subject(\"Yoga\"))");
  d.turn("singleton(FindEvents(has_subject(\"Yoga\")))");
  const NodeId ev = d.engine.refer(ConstraintSpec{"Event", std::nullopt, {}});
  CHECK(match_constraint(d.ctx, ev, ConstraintSpec{"Event", std::nullopt, {}}));
  CHECK(match_constraint(d.ctx, ev, ConstraintSpec{"Event", std::nullopt, {{"subject", std::string("Yoga")}}}));
  CHECK_FALSE(match_constraint(d.ctx, ev, ConstraintSpec{"Event", std::nullopt, {{"subject", std::string("Gym")}}}));
  CHECK_FALSE(match_constraint(d.ctx, ev, ConstraintSpec{"Int", std::nullopt, {}}));
}

TEST_CASE("history is immutable across turns") {
  Dialogue d;
  d.turn("Add(2,Add(3,5))");
  const std::vector<Node> before = d.ctx.nodes();
  d.turn("revise(old=Int?(3), new=Int(6))");
  d.turn("Add(refer(Int?()), 1)");
  for (std::size_t i = 0; i < before.size(); ++i) {
    const Node& a = before[i];
    const Node& b = d.ctx.nodes()[i];
    CHECK(a.inputs == b.inputs);
    CHECK(a.result == b.result);
    CHECK(a.value == b.value);
    CHECK(a.evaluated == b.evaluated);
  }
}

TEST_CASE("input edges point to older nodes") {
  Dialogue d(testing::fixture());
  d.turn("Add(2,Add(3,5))");
  d.turn("revise(old=Int?(3), new=Int(6))");
  d.turn(testing::slurp("tests/golden/update_jeffs_original.txt"), Syntax::Prefix);
  for (const auto& n : d.ctx.nodes())
    for (const auto& [p, in] : n.inputs) CHECK(in < n.id);
}

TEST_CASE("constraint nodes are detached and unevaluated") {
  Dialogue d;
  d.turn("Add(2,Add(3,5))");
  d.turn("revise(old=Int?(3), new=Int(6))");
  bool saw = false;
  for (const auto& n : d.ctx.nodes()) {
    if (!is_constraint_func(n.func)) continue;
    saw = true;
    CHECK(n.detached_constraint);
    CHECK_FALSE(n.evaluated);
  }
  CHECK(saw);
  CHECK_FALSE(is_constraint_func("List[Event]"));
  CHECK(is_constraint_func("Constraint[Event]?"));
}
