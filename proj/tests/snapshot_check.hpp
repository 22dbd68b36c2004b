#pragma once

#include <json.hpp>

#include <set>
#include <string>
#include <vector>

namespace testing {

struct SharingReport {
  bool ok = false;
  std::string detail;
};

// Nodes a turn touches: from its root along input and result edges.
inline std::set<int> turn_closure(const nlohmann::json& snap, int turn) {
  std::set<int> seen;
  const auto& root = snap["turns"][turn]["root"];
  if (root.is_null()) return seen;
  std::vector<int> stack{root.get<int>()};
  while (!stack.empty()) {
    const int id = stack.back();
    stack.pop_back();
    if (!seen.insert(id).second) continue;
    const auto& node = snap["nodes"][id];
    for (const auto& in : node["inputs"]) stack.push_back(in["node"].get<int>());
    if (node["result"].is_number()) stack.push_back(node["result"].get<int>());
  }
  return seen;
}

// After Add(2,Add(3,5)) and revise(old=Int?(3), new=Int(6)): the second turn
// creates exactly two Add nodes and reuses the 2 and 5 leaves of the first.
inline SharingReport check_revise_sharing(const nlohmann::json& snap) {
  SharingReport r;
  if (snap["turns"].size() != 2) {
    r.detail = "expected 2 turns";
    return r;
  }
  const auto old_nodes = turn_closure(snap, 0);
  const auto new_nodes = turn_closure(snap, 1);
  int new_adds = 0;
  std::vector<int> shared_leaves;
  for (int id : new_nodes) {
    const auto& node = snap["nodes"][id];
    if (node["func"] == "Add" && node["turn"] == 1) ++new_adds;
    if (old_nodes.count(id) && node["func"] == "Int" && node["inputs"].empty())
      shared_leaves.push_back(node["value"]["value"].get<int>());
  }
  std::set<int> leaf_values(shared_leaves.begin(), shared_leaves.end());
  const bool values_ok = leaf_values == std::set<int>{2, 5};
  int shared_inputs = 0;
  for (int id : new_nodes) {
    const auto& node = snap["nodes"][id];
    if (node["func"] != "Add" || node["turn"] != 1) continue;
    for (const auto& in : node["inputs"]) {
      const int src = in["node"].get<int>();
      if (snap["nodes"][src]["turn"] == 0) ++shared_inputs;
    }
  }
  r.ok = new_adds == 2 && shared_inputs == 2 && values_ok;
  r.detail = "new Add nodes " + std::to_string(new_adds) + ", inputs shared with turn 0 " +
             std::to_string(shared_inputs) +
             ", shared leaves " + std::to_string(shared_leaves.size());
  return r;
}

}  // namespace testing
