#pragma once

#include "engine.hpp"
#include "graph.hpp"
#include "store.hpp"

#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace testing {

inline std::string source_path(const std::string& rel) { return std::string(DF_SOURCE_DIR) + "/" + rel; }

// File contents without trailing newlines.
inline std::string slurp(const std::string& rel) {
  std::ifstream in(source_path(rel), std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  std::string s = ss.str();
  while (!s.empty() && (s.back() == '\n' || s.back() == '\r')) s.pop_back();
  return s;
}

inline df::EventStore fixture(const std::string& rel = "data/events.json") {
  return df::EventStore::from_file(source_path(rel));
}

struct Dialogue {
  df::GraphContext ctx;
  df::Engine engine;

  explicit Dialogue(df::EventStore store = {}, df::Clock clock = df::Clock::standard())
      : ctx(df::standard_registry(), clock, std::move(store)), engine(ctx) {}

  df::Outcome turn(const std::string& text, df::Syntax syntax = df::Syntax::Call) {
    return engine.run_turn(text, syntax);
  }

  std::string value_of(const df::Outcome& o) const {
    if (!o.result) return "";
    const df::Value* v = ctx.final_value(*o.result);
    return v ? df::render(*v) : "";
  }
};

// Ids reachable from root along input edges.
inline std::set<std::uint32_t> reachable(const df::GraphContext& ctx, df::NodeId root) {
  std::set<std::uint32_t> seen;
  std::vector<df::NodeId> stack{root};
  while (!stack.empty()) {
    const df::NodeId cur = stack.back();
    stack.pop_back();
    if (!seen.insert(cur.value).second) continue;
    for (const auto& [param, in] : ctx.node(cur).inputs) stack.push_back(in);
  }
  return seen;
}

inline std::size_t count_substr(const std::string& hay, const std::string& needle) {
  std::size_t n = 0;
  for (auto p = hay.find(needle); p != std::string::npos; p = hay.find(needle, p + 1)) ++n;
  return n;
}

}  // namespace testing
