#include "calendar.hpp"
#include "engine.hpp"

#include <mutex>

namespace df {

namespace {

const std::map<std::string, std::string> kEventCoercions = {
    {"List[Event]", "singleton"}, {"Constraint[Event]", "FindEvents"}, {"Int", "EventById"}};

std::string join(const std::vector<std::string>& parts, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += sep;
    out += parts[i];
  }
  return out;
}

void literal_constructor(FunctionRegistry& reg, const std::string& type) {
  FunctionDef def;
  def.name = type;
  def.params = {{"pos1", type, true}};
  def.out_type = type;
  def.doc = "constructs a " + type + " value";
  def.exec = [](Invocation& inv) { inv.set_result(inv.value("pos1")); };
  reg.add(std::move(def));
}

}  // namespace

void register_core(FunctionRegistry& reg) {
  {
    FunctionDef def;
    def.name = "Yield";
    def.params = {{"pos1", "Any", true}};
    def.out_type = "Any";
    def.doc = "returns its input to the user";
    def.infer_type = [](const std::map<std::string, std::string>& t) {
      auto it = t.find("pos1");
      return it == t.end() ? std::string("Any") : it->second;
    };
    def.exec = [](Invocation& inv) {
      const NodeId in = inv.input("pos1");
      if (is_constraint_func(inv.ctx().node(in).func)) {
        inv.set_result(make_spec(inv.spec_arg("pos1")));
        return;
      }
      auto r = inv.ctx().final_result(in);
      if (!r) throw Error(ErrorCode::Type, "Yield: input has no result");
      inv.set_result_node(*r);
    };
    reg.add(std::move(def));
  }
  for (const char* t : {"Int", "Float", "Str", "Bool"}) literal_constructor(reg, t);
  {
    FunctionDef def;
    def.name = "Add";
    def.params = {{"pos1", "Int", true}, {"pos2", "Int", true}};
    def.out_type = "Int";
    def.doc = "integer addition";
    def.exec = [](Invocation& inv) {
      std::int64_t sum = 0;
      if (__builtin_add_overflow(inv.get<std::int64_t>("pos1"), inv.get<std::int64_t>("pos2"), &sum))
        throw Error(ErrorCode::Domain, "Add: integer overflow");
      inv.set_result(sum);
    };
    reg.add(std::move(def));
  }
  {
    FunctionDef def;
    def.name = "singleton";
    def.params = {{"pos1", "List[Event]", true}, {"choice", "Event", false}};
    def.out_type = "Event";
    def.coercions = kEventCoercions;
    def.doc = "the only element of a list; asks the user to pick otherwise";
    def.exec = [](Invocation& inv) {
      const auto& list = inv.get<EventList>("pos1");
      std::vector<std::string> options;
      for (const auto& e : list) options.push_back(render_event(e));
      if (inv.has("choice")) {
        const auto& chosen = inv.get<EventRecord>("choice");
        for (const auto& e : list) {
          if (e.id == chosen.id) {
            inv.set_result(e);
            return;
          }
        }
        inv.raise(ExceptionKind::Disambiguation, "choice",
                  "#" + std::to_string(chosen.id) + " is not one of: " + join(options, "; "), "Event",
                  options);
      }
      if (list.size() == 1) {
        inv.set_result(list.front());
        return;
      }
      if (list.empty())
        inv.raise(ExceptionKind::Disambiguation, "choice", "no matching item", "Event");
      inv.raise(ExceptionKind::Disambiguation, "choice", "which one? " + render(list), "Event",
                options);
    };
    reg.add(std::move(def));
  }
  {
    FunctionDef def;
    def.name = "refer";
    def.params = {{"pos1", "Constraint[Any]", true}};
    def.out_type = "Any";
    def.doc = "the most recent node matching a constraint";
    def.infer_type = [](const std::map<std::string, std::string>& t) {
      auto it = t.find("pos1");
      if (it == t.end() || it->second.rfind("Constraint[", 0) != 0) return std::string("Any");
      return it->second.substr(11, it->second.size() - 12);
    };
    def.exec = [](Invocation& inv) {
      inv.set_result_node(inv.engine().refer(inv.spec_arg("pos1"), inv.node_id()));
    };
    reg.add(std::move(def));
  }
  {
    FunctionDef def;
    def.name = "revise";
    def.params = {{"old", "Constraint[Any]", true}, {"new", "Any", true}};
    def.out_type = "Any";
    def.doc = "re-runs an earlier computation with one input replaced";
    def.exec = [](Invocation& inv) {
      inv.set_result_node(inv.engine().revise(inv.spec_arg("old"), inv.input("new")));
    };
    reg.add(std::move(def));
  }
  for (const auto& [name, answer] : {std::pair{"Confirm", true}, std::pair{"Decline", false}}) {
    FunctionDef def;
    def.name = name;
    def.out_type = "Bool";
    def.doc = answer ? "affirmative answer" : "negative answer";
    def.exec = [answer = answer](Invocation& inv) { inv.set_result(answer); };
    reg.add(std::move(def));
  }
}

std::shared_ptr<const FunctionRegistry> standard_registry() {
  static std::shared_ptr<const FunctionRegistry> instance;
  static std::once_flag once;
  std::call_once(once, [] {
    auto reg = std::make_shared<FunctionRegistry>();
    register_core(*reg);
    register_calendar(*reg);
    instance = reg;
  });
  return instance;
}

}  // namespace df
