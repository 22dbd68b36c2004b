#pragma once

#include "error.hpp"
#include "expr.hpp"

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace df {

class CycleError : public Error {
public:
  explicit CycleError(std::string last_rule)
      : Error(ErrorCode::Cycle, "rewriting did not reach a fixpoint; last rule " + last_rule),
        last_rule_(std::move(last_rule)) {}

  const std::string& last_rule() const noexcept { return last_rule_; }

private:
  std::string last_rule_;
};

// Tree pattern. Grammar:
//   _                  any subtree
//   ?x  ?x:Kind        capture (Kind: Int Float Str Bool Literal Call Var Constraint)
//   ?xs...             remaining positional arguments
//   A|B(args)          call with one of the heads; heads may be getters like :id
//   T?(args)  T[P]?()  constraint call
//   k=pat  k?=pat      named argument, required or optional
//   !k                 named argument absent
//   **                 other named arguments allowed
// Literals match themselves. Templates use the same syntax without wildcards.
struct Pattern;
using PatternPtr = std::shared_ptr<const Pattern>;

PatternPtr parse_pattern(std::string_view text);

struct Captures {
  std::map<std::string, Expr> one;
  std::map<std::string, std::vector<Expr>> many;

  const Expr* get(const std::string& name) const;
};

std::optional<Captures> match_pattern(const Pattern& pattern, const Expr& expr);
Expr instantiate(const Pattern& templ, const Captures& captures);

// Bindings of the enclosing assignment sequence, for rules that look through variables.
struct RewriteEnv {
  const NamedArgs* bindings = nullptr;

  const Expr* lookup(std::string_view name) const;
  // Follows variables to the expression they stand for.
  const Expr& resolve(const Expr& e) const;
};

enum class Phase { Simplify, Expand };

using Transform =
    std::function<std::optional<Expr>(const Expr& node, const Captures& caps, const RewriteEnv& env)>;

struct RewriteRule {
  std::string name;
  Phase phase = Phase::Simplify;
  std::string doc;
  PatternPtr pattern;  // null: the transform sees every node
  PatternPtr templ;
  Transform transform;
  // Only at the root, or the body of a root assignment sequence.
  bool top_only = false;
};

using RuleSet = std::vector<RewriteRule>;

RewriteRule template_rule(std::string name, Phase phase, std::string doc, std::string_view pattern,
                          std::string_view templ, bool top_only = false);
RewriteRule transform_rule(std::string name, Phase phase, std::string doc, std::string_view pattern,
                           Transform transform, bool top_only = false);

struct TraceStep {
  std::string rule;
  int pass = 0;
  std::vector<std::size_t> path;  // child indexes from the root
  Expr before;
  Expr after;
};

struct RewriteResult {
  Expr expr;
  std::vector<TraceStep> trace;
  int passes = 0;  // passes that changed something
};

// Bottom-up, first matching rule per node, whole passes until nothing
// changes. Throws CycleError after max_passes changing passes.
RewriteResult apply_rules(const Expr& expr, const RuleSet& rules, int max_passes = 100);

const RuleSet& simplify_rules();
const RuleSet& expand_rules();

Expr simplify(const Expr& expr);
Expr expand(const Expr& expr);

// Splices bindings used once into their use site and drops unused ones.
Expr inline_single_use(const Expr& expr);

// Parses, simplifies and prints in call syntax.
std::string simplify_text(std::string_view text, Syntax syntax);

// Children in trace-path order: positional then named arguments; bindings then body.
std::vector<const Expr*> children(const Expr& expr);
const Expr& subtree_at(const Expr& root, const std::vector<std::size_t>& path);
void replace_at(Expr& root, const std::vector<std::size_t>& path, Expr replacement);

// One rule name per line.
std::string rule_manifest(const RuleSet& rules);

}  // namespace df
