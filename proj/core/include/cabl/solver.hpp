#pragma once

#include <functional>
#include <optional>
#include <stdexcept>
#include <variant>
#include <vector>

#include "cabl/kb.hpp"

namespace cabl::logic {

struct SolveLimits {
  /// Resolution-step budget (rule expansions + builtin evaluations).
  long max_steps = 10000;
  /// Stop after this many answers; <= 0 means unbounded.
  long max_solutions = -1;
  bool occurs_check = false;
};

enum class SolveStatus {
  Completed,       // search space exhausted
  DepthExceeded,   // step budget ran out; unexplored branches remain
  SolutionLimit,   // stopped by max_solutions or by the answer callback
};

struct InstantiationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DepthExceededError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Depth-first SLD resolution with source-order rule selection and leftmost
/// literal selection. Builtins evaluate eagerly. `overlay` supplies extra
/// ground facts (per-example concept labels, board positions) without
/// touching the shared knowledge base; each call owns its search state, so
/// any number of queries may run concurrently over one KnowledgeBase.
///
/// `on_answer` receives each answer substitution (restricted to the goal's
/// variables, fully resolved); returning false stops the search.
SolveStatus solve(const KbView& kb, const std::vector<Literal>& goal,
                  const SolveLimits& limits,
                  const std::function<bool(const Substitution&)>& on_answer,
                  const std::vector<Rule>* overlay = nullptr);

/// Convenience wrapper collecting all answers. Throws DepthExceededError if
/// the budget ran out before the search completed.
std::vector<Substitution> solve_all(const KbView& kb, const std::vector<Literal>& goal,
                                    const SolveLimits& limits = {},
                                    const std::vector<Rule>* overlay = nullptr);

enum class Entailment { Entailed, NotEntailed, Indeterminate };

/// Ground-atom entailment. Indeterminate means the step budget was exhausted
/// with no proof found; it is never reported as NotEntailed.
Entailment entails(const KbView& kb, const Atom& ground_query, const SolveLimits& limits = {},
                   const std::vector<Rule>* overlay = nullptr);

/// The value a task reads off a proof: an integer (digit addition sum) or a
/// boolean (chess attack).
using TargetValue = std::variant<std::int64_t, bool>;

bool target_equal(const TargetValue& a, const TargetValue& b);
std::string target_to_string(const TargetValue& v);

/// How a task turns a concept-label sequence into a query: facts to inject
/// for the labels, the goal to run, and where the target value lives.
struct QueryTemplate {
  std::vector<Literal> goal;
  /// Name of the goal variable bound to the target value; empty for boolean
  /// targets (provable == true under the closed-world reading).
  std::string answer_var;
  /// Builds the per-position concept facts for a label sequence (label names
  /// in position order).
  std::function<std::vector<Rule>(const std::vector<std::string>&)> label_facts;
};

/// Runs the template's goal with the label facts (plus per-example context
/// facts) injected. Returns the bound target of the first answer; for
/// boolean targets a completed no-proof search yields false. Returns nullopt
/// (NoProof) when a value-target search completes with no answer. Throws
/// DepthExceededError when the budget ran out before an answer was found.
std::optional<TargetValue> deduce(const KbView& kb, const std::vector<std::string>& labels,
                                  const QueryTemplate& query,
                                  const std::vector<Rule>& context_facts = {},
                                  const SolveLimits& limits = {});

}  // namespace cabl::logic
