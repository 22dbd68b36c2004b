#pragma once

#include "expr.hpp"

#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace testing {

// Random well-formed programs covering every expression form.
class ExprGen {
public:
  explicit ExprGen(std::uint64_t seed) : rng_(seed) {}

  df::Expr program() {
    scope_.clear();
    if (chance(0.3)) {
      df::NamedArgs bindings;
      const int n = 1 + pick(3);
      for (int i = 0; i < n; ++i) {
        std::string name = "x" + std::to_string(i);
        bindings.emplace_back(name, expr(3));
        scope_.push_back(name);
      }
      return df::Expr{df::AssignSeq{std::move(bindings), df::Box<df::Expr>(expr(3))}};
    }
    return expr(4);
  }

  df::Expr expr(int depth) {
    const int roll = pick(10);
    if (depth <= 0 || roll < 3) return leaf();
    if (roll < 8) return call(depth - 1);
    return constraint(depth - 1);
  }

  df::Expr literal() {
    switch (pick(4)) {
      case 0: return df::make_lit(df::LiteralKind::Int, std::to_string(static_cast<std::int64_t>(rng_()) >> pick(60)));
      case 1: {
        std::string t = std::to_string(static_cast<int>(rng_() % 2000) - 1000) + "." + std::to_string(pick(1000));
        return df::make_lit(df::LiteralKind::Float, t);
      }
      case 2: return df::make_lit(df::LiteralKind::Bool, chance(0.5) ? "true" : "false");
      default: return df::make_str(text());
    }
  }

  int pick(int n) { return static_cast<int>(rng_() % static_cast<std::uint64_t>(n)); }
  bool chance(double p) { return std::uniform_real_distribution<double>(0, 1)(rng_) < p; }

private:
  df::Expr leaf() {
    if (!scope_.empty() && chance(0.3)) return df::make_var(scope_[pick(int(scope_.size()))]);
    return literal();
  }

  df::NamedArgs named(int depth, int max) {
    static const char* keys[] = {"k", "event", "dateTime", "a_b", "value", "Z9"};
    df::NamedArgs out;
    const int n = pick(max + 1);
    std::vector<int> used;
    for (int i = 0; i < n; ++i) {
      int k = pick(6);
      bool dup = false;
      for (int u : used) dup = dup || u == k;
      if (dup) continue;
      used.push_back(k);
      out.emplace_back(keys[k], expr(depth));
    }
    return out;
  }

  df::Expr call(int depth) {
    static const char* funcs[] = {"f", "Add", "Yield", "g_1", "FindEvents", "x", ":id", ":start", "_h"};
    std::vector<df::Expr> pos;
    const int n = pick(4);
    for (int i = 0; i < n; ++i) pos.push_back(expr(depth));
    return df::make_call(funcs[pick(9)], std::move(pos), named(depth, 2));
  }

  df::Expr constraint(int depth) {
    static const char* types[] = {"Int", "Event", "Constraint", "Str"};
    std::optional<std::string> param;
    if (chance(0.3)) param = chance(0.5) ? "Event" : "Any";
    return df::make_constraint(types[pick(4)], named(depth, 2), param);
  }

  std::string text() {
    static const std::vector<std::string> pieces = {"a", "Z", " ", "(", ")", ";", ":", "\"", "\\", "\n",
                                                    "\t", "x0", "é", "=", ",", "?", "[", "]", "let", "7"};
    std::string s;
    const int n = pick(8);
    for (int i = 0; i < n; ++i) s += pieces[pick(int(pieces.size()))];
    return s;
  }

  std::mt19937_64 rng_;
  std::vector<std::string> scope_;
};

// Nested Add over small integers with one literal second argument left out.
struct ResumeCase {
  std::string full;     // complete program
  std::string partial;  // same program with the hole
  std::string answer;   // literal that fills the hole
  std::int64_t sum = 0;
  bool arithmetic = true;  // sum is meaningful
};

inline ResumeCase make_resume_case(ExprGen& g) {
  struct Builder {
    ExprGen& g;
    int holes_left = 1;
    ResumeCase out;

    // Returns {full, partial, sum}.
    std::tuple<std::string, std::string, std::int64_t> add(int depth) {
      auto [a_full, a_part, a_sum] = arg(depth);
      if (holes_left > 0 && (depth == 0 || g.chance(0.4))) {
        holes_left = 0;
        const std::int64_t v = g.pick(200) - 100;
        out.answer = std::to_string(v);
        return {"Add(" + a_full + "," + out.answer + ")", "Add(" + a_part + ")", a_sum + v};
      }
      auto [b_full, b_part, b_sum] = arg(depth);
      return {"Add(" + a_full + "," + b_full + ")", "Add(" + a_part + "," + b_part + ")", a_sum + b_sum};
    }

    std::tuple<std::string, std::string, std::int64_t> arg(int depth) {
      if (depth > 0 && g.chance(0.5)) return add(depth - 1);
      const std::int64_t v = g.pick(200) - 100;
      return {std::to_string(v), std::to_string(v), v};
    }
  };
  Builder b{g};
  auto [full, partial, sum] = b.add(3);
  while (b.holes_left > 0) {
    // No hole was placed: wrap with one at the top.
    const std::int64_t v = g.pick(200) - 100;
    b.out.answer = std::to_string(v);
    full = "Add(" + full + "," + b.out.answer + ")";
    partial = "Add(" + partial + ")";
    sum += v;
    b.holes_left = 0;
  }
  b.out.full = full;
  b.out.partial = partial;
  b.out.sum = sum;
  return b.out;
}

// Calendar builders with one required argument left out, positional or named.
inline ResumeCase make_calendar_resume_case(ExprGen& g) {
  ResumeCase c;
  c.arithmetic = false;
  const std::string hour = std::to_string(1 + g.pick(12));
  const std::string minute = std::to_string(g.pick(60));
  switch (g.pick(5)) {
    case 0:
      c.full = "NumberAM(" + hour + ")";
      c.partial = "NumberAM()";
      c.answer = hour;
      break;
    case 1:
      c.full = "NumberPM(" + hour + ")";
      c.partial = "NumberPM()";
      c.answer = hour;
      break;
    case 2:
      c.full = "HourMinuteAM(" + hour + "," + minute + ")";
      c.partial = "HourMinuteAM(" + hour + ")";
      c.answer = minute;
      break;
    case 3:
      c.full = "HourMinutePM(pos1=" + hour + ",pos2=" + minute + ")";
      c.partial = "HourMinutePM(pos2=" + minute + ")";
      c.answer = hour;
      break;
    default: {
      static const char* days[] = {"Monday", "Tuesday", "Wednesday", "Thursday", "Friday", "Saturday", "Sunday"};
      const std::string day = std::string("\"") + days[g.pick(7)] + "\"";
      c.full = "nextDOW(" + day + ")";
      c.partial = "nextDOW()";
      c.answer = day;
      break;
    }
  }
  return c;
}

}  // namespace testing
