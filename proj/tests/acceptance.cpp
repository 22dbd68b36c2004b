// Acceptance run: one PASS/FAIL line per primary criterion.

#include "corpus.hpp"
#include "generators.hpp"
#include "rewrite.hpp"
#include "server.hpp"
#include "snapshot_check.hpp"
#include "support.hpp"

#include <httplib.h>
#include <json.hpp>

#include <chrono>
#include <functional>
#include <iostream>
#include <thread>

using namespace df;
using json = nlohmann::json;

namespace {

struct Check {
  bool ok = true;
  std::string why;

  void expect(bool cond, const std::string& what) {
    if (!cond && ok) {
      ok = false;
      why = what;
    }
  }
};

int failures = 0;

void criterion(const std::string& name, double budget_ms, const std::function<void(Check&)>& body) {
  Check c;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    body(c);
  } catch (const std::exception& e) {
    c.expect(false, std::string("exception: ") + e.what());
  }
  const double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  if (budget_ms > 0) c.expect(ms < budget_ms, "took " + std::to_string(ms) + " ms");
  if (!c.ok) ++failures;
  std::cout << (c.ok ? "PASS " : "FAIL ") << name << "  (" << static_cast<long>(ms) << " ms)";
  if (!c.ok) std::cout << "  " << c.why;
  std::cout << std::endl;
}

void add_revise(Check& c) {
  testing::Dialogue d;
  c.expect(d.turn("Add(2,Add(3,5))").message == "10", "first message");
  const std::size_t after_first = d.ctx.node_count();
  c.expect(d.turn("revise(old=Int?(3), new=Int(6))").message == "13", "second message");
  const NodeId old_root = *turn_graph_root(d.ctx, d.ctx.turns()[0]);
  const NodeId new_root = *turn_graph_root(d.ctx, d.ctx.turns()[1]);
  const auto old_nodes = testing::reachable(d.ctx, old_root);
  int fresh_adds = 0, fresh_ints = 0, other_fresh = 0;
  std::set<std::string> shared;
  for (auto id : testing::reachable(d.ctx, new_root)) {
    const Node& n = d.ctx.nodes()[id];
    if (old_nodes.count(id)) {
      if (n.func == "Int" && n.inputs.empty()) shared.insert(render(*d.ctx.final_value(n.id)));
    } else if (n.func == "Add" && id >= after_first) {
      ++fresh_adds;
    } else if (n.func == "Int") {
      ++fresh_ints;
    } else {
      ++other_fresh;
    }
  }
  c.expect(fresh_adds == 2, "new Add nodes: " + std::to_string(fresh_adds));
  c.expect(fresh_ints == 1, "new Int nodes: " + std::to_string(fresh_ints));
  c.expect(other_fresh == 0, "unexpected new non-literal nodes");
  c.expect(shared == std::set<std::string>{"2", "5"}, "shared leaves");
  d.engine.evaluate(old_root);
  c.expect(render(*d.ctx.final_value(old_root)) == "10", "old turn re-evaluates to 10");
}

void resume(Check& c) {
  testing::Dialogue d;
  const Outcome p = d.turn("Add(2)");
  c.expect(p.kind == OutcomeKind::Pending && p.exception->kind == ExceptionKind::MissingInput &&
               p.exception->param == std::optional<std::string>("pos2"),
           "Add(2) is pending MissingInput(pos2)");
  c.expect(d.turn("7").message == "9", "resume 7 gives 9");
  testing::ExprGen gen(42);
  for (int i = 0; i < 200 && c.ok; ++i) {
    const auto rc = i % 4 == 3 ? testing::make_calendar_resume_case(gen) : testing::make_resume_case(gen);
    testing::Dialogue direct, resumed;
    const Outcome whole = direct.turn(rc.full);
    const Outcome pend = resumed.turn(rc.partial);
    const Outcome done = resumed.turn(rc.answer);
    c.expect(pend.kind == OutcomeKind::Pending && done.kind == OutcomeKind::Success &&
                 whole.kind == OutcomeKind::Success && done.message == whole.message &&
                 (!rc.arithmetic || whole.message == std::to_string(rc.sum)),
             "resume case " + rc.partial + " <- " + rc.answer);
  }
}

void delete_pipeline(Check& c) {
  const std::string simplified = simplify_text(testing::slurp("tests/golden/delete_at_ten_original.txt"), Syntax::Prefix);
  c.expect(simplified == testing::slurp("tests/golden/delete_at_ten_simplified.txt"), "golden mismatch: " + simplified);
  testing::Dialogue d(testing::fixture("tests/golden/delete_at_ten_events.json"));
  c.expect(d.ctx.store.size() == 1, "fixture size");
  const std::string expanded = print_call(expand(parse_call(simplified)));
  const Outcome p = d.turn(expanded);
  c.expect(p.kind == OutcomeKind::Pending && p.exception->kind == ExceptionKind::Confirmation, "confirmation");
  const Outcome done = d.turn("Confirm()");
  c.expect(done.kind == OutcomeKind::Success, "confirm succeeds");
  c.expect(d.ctx.store.size() == 0, "store size after confirm");
}

void update_pipeline(Check& c) {
  const Expr simplified = simplify(parse_prefix(testing::slurp("tests/golden/update_jeffs_original.txt")));
  c.expect(!simplified.is<AssignSeq>(), "assignments remain");
  testing::Dialogue d(testing::fixture());
  const Outcome p = d.turn(print_call(expand(simplified)));
  c.expect(p.kind == OutcomeKind::Pending && p.exception->kind == ExceptionKind::Confirmation, "confirmation");
  d.turn("Confirm()");
  const EventRecord* jeffs = nullptr;
  for (const auto& e : d.ctx.store.all())
    if (e.location == std::optional<std::string>("Jeffs") && e.start.date == Date{2023, 1, 8}) jeffs = d.ctx.store.get(e.id);
  c.expect(jeffs != nullptr, "Jeffs event present");
  if (jeffs) c.expect(format_time(jeffs->end.time) == "14:00", "end is " + format_time(jeffs->end.time));
}

void equivalence_oracle(Check& c) {
  const auto loaded = load_jsonl(testing::source_path("data/corpus.jsonl"));
  c.expect(loaded.errors.empty() && loaded.records.size() == 50, "corpus has 50 records");
  const auto report = equivalence(loaded.records, testing::fixture(), Clock::standard());
  c.expect(report.all_passed(), std::to_string(report.passed()) + "/" + std::to_string(report.rows.size()));
}

void length(Check& c) {
  const auto loaded = load_jsonl(testing::source_path("data/corpus.jsonl"));
  const auto r = length_stats(simplify_dataset(loaded.records).records);
  c.expect(r.simplified_shorter(), format_table(r));
  // Real-dataset format, end to end with skipped records.
  const auto real = load_jsonl(testing::source_path("tests/data/smcalflow_sample.jsonl"));
  const auto sr = simplify_dataset(real.records);
  const auto rr = length_stats(sr.records);
  c.expect(rr.original.count > 0, "sample yields statistics");
  c.expect(format_json(rr).find("simplified_shorter") != std::string::npos, "directional flag reported");
}

void parser(Check& c) {
  for (Syntax syn : {Syntax::Call, Syntax::Prefix}) {
    testing::ExprGen gen(syn == Syntax::Call ? 1234 : 5678);
    for (int i = 0; i < 10000 && c.ok; ++i) {
      const Expr e = gen.program();
      const std::string text = print(e, syn);
      c.expect(parse(text, syn) == e, "round trip: " + text);
    }
  }
  testing::ExprGen gen(91011);
  for (int i = 0; i < 10000 && c.ok; ++i) {
    const Expr e = gen.program();
    c.expect(parse_call(print_call(e)) == parse_prefix(print_prefix(e)), "cross syntax: " + print_call(e));
  }
}

void rewrite_props(Check& c) {
  const auto loaded = load_jsonl(testing::source_path("data/corpus.jsonl"));
  for (const auto& rec : loaded.records) {
    for (const auto& t : rec.turns) {
      const Expr original = parse(t.annotation, t.syntax);
      RewriteResult r;
      try {
        r = apply_rules(original, simplify_rules());
      } catch (const CycleError& e) {
        c.expect(false, rec.dialogue_id + ": CycleError");
        continue;
      }
      c.expect(apply_rules(r.expr, simplify_rules()).trace.empty(), rec.dialogue_id + ": not idempotent");
      c.expect(tokenize_for_length(print_call(r.expr)).size() <= tokenize_for_length(t.annotation).size(),
               rec.dialogue_id + ": longer");
      Expr replay = original;
      for (const auto& step : r.trace) {
        if (step.rule == "inline_single_use") {
          replay = step.after;
          continue;
        }
        c.expect(subtree_at(replay, step.path) == step.before, rec.dialogue_id + ": " + step.rule + " not local");
        replace_at(replay, step.path, step.after);
      }
      c.expect(replay == r.expr, rec.dialogue_id + ": trace does not replay");
    }
  }
}

void serve(Check& c) {
  dfserve::Server server(dfserve::ServerOptions{});
  const int port = server.bind_any("127.0.0.1");
  c.expect(port > 0, "bind");
  if (port <= 0) return;
  std::thread th([&] { server.serve_bound(); });
  server.wait_until_ready();
  httplib::Client cli("127.0.0.1", port);
  auto created = cli.Post("/v1/sessions", "", "application/json");
  c.expect(created && created->status == 201, "create session");
  if (created && created->status == 201) {
    const std::string id = json::parse(created->body)["session_id"];
    auto t1 = cli.Post("/v1/sessions/" + id + "/turns", R"j({"text":"Add(2,Add(3,5))"})j", "application/json");
    auto t2 = cli.Post("/v1/sessions/" + id + "/turns", R"j({"text":"revise(old=Int?(3), new=Int(6))"})j",
                       "application/json");
    c.expect(t1 && t2 && t1->status == 200 && t2->status == 200, "turn requests");
    if (t1 && t2) {
      c.expect(json::parse(t1->body)["message"] == "10" && json::parse(t2->body)["message"] == "13", "messages");
      const auto report = testing::check_revise_sharing(json::parse(t2->body)["graph"]);
      c.expect(report.ok, report.detail);
    }
  }
  auto missing = cli.Get("/v1/sessions/unknown/graph");
  c.expect(missing && missing->status == 404, "unknown session is 404");
  server.stop();
  th.join();
}

}  // namespace

int main() {
  criterion("add-then-revise dialogue", 1000, add_revise);
  criterion("exception and resume", 0, resume);
  criterion("simplified delete pipeline", 1000, delete_pipeline);
  criterion("simplified update pipeline", 0, update_pipeline);
  criterion("equivalence oracle", 10000, equivalence_oracle);
  criterion("length reduction", 0, length);
  criterion("parser properties", 0, parser);
  criterion("rewrite properties", 0, rewrite_props);
  criterion("serve-mode integration", 0, serve);
  std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criteria failed") << std::endl;
  return failures == 0 ? 0 : 1;
}
