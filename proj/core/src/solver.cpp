#include "cabl/solver.hpp"

#include <algorithm>
#include <memory>
#include <sstream>

namespace cabl::logic {

namespace {

// Immutable goal list; sharing tails keeps backtracking cheap.
struct GoalNode {
  Literal lit;
  std::shared_ptr<const GoalNode> next;
};
using GoalList = std::shared_ptr<const GoalNode>;

GoalList push_goals(const std::vector<Literal>& lits, GoalList rest) {
  GoalList out = std::move(rest);
  for (auto it = lits.rbegin(); it != lits.rend(); ++it)
    out = std::make_shared<const GoalNode>(GoalNode{*it, std::move(out)});
  return out;
}

class Engine {
 public:
  Engine(const KbView& kb, const SolveLimits& limits,
         const std::function<bool(const Substitution&)>& on_answer,
         const std::vector<Rule>* overlay)
      : kb_(kb), limits_(limits), on_answer_(on_answer) {
    if (overlay) {
      for (const Rule& r : *overlay) overlay_index_[r.head.key()].push_back(&r);
    }
  }

  SolveStatus run(const std::vector<Literal>& goal) {
    for (const Literal& l : goal) {
      std::vector<std::string> vs;
      if (const Atom* a = std::get_if<Atom>(&l)) {
        for (const Term& t : a->args) t.collect_vars(vs);
      } else {
        const Builtin& b = std::get<Builtin>(l);
        b.lhs.collect_vars(vs);
        b.rhs.collect_vars(vs);
      }
      for (auto& v : vs)
        if (std::find(query_vars_.begin(), query_vars_.end(), v) == query_vars_.end())
          query_vars_.push_back(v);
    }
    bool completed = dfs(push_goals(goal, nullptr));
    if (stopped_) return SolveStatus::SolutionLimit;
    return completed ? SolveStatus::Completed : SolveStatus::DepthExceeded;
  }

 private:
  // Returns false when the search was cut short (budget or caller stop).
  bool dfs(const GoalList& goals) {
    if (stopped_) return false;
    if (!goals) return emit_answer();
    if (steps_++ >= limits_.max_steps) return false;

    const Literal& lit = goals->lit;
    if (const Builtin* b = std::get_if<Builtin>(&lit)) {
      std::size_t m = store_.mark();
      if (eval_builtin(*b)) {
        if (!dfs(goals->next)) {
          store_.undo(m);
          return false;
        }
      }
      store_.undo(m);
      return true;
    }

    const Atom& goal_atom = std::get<Atom>(lit);
    Term goal_term = atom_term(goal_atom);
    PredKey key = goal_atom.key();

    bool complete = true;
    // Overlay facts first: they are per-example inputs conceptually prepended
    // to the program.
    auto ov = overlay_index_.find(key);
    if (ov != overlay_index_.end()) {
      for (const Rule* r : ov->second) {
        if (!try_rule(*r, goal_term, goals->next)) complete = false;
        if (stopped_) return false;
      }
    }
    if (const std::vector<int>* ids = kb_.rules_for(key)) {
      for (int id : *ids) {
        if (!try_rule(kb_.kb().rule(id), goal_term, goals->next)) complete = false;
        if (stopped_) return false;
      }
    }
    return complete;
  }

  bool try_rule(const Rule& r, const Term& goal_term, const GoalList& rest) {
    Rule fresh = rename(r);
    std::size_t m = store_.mark();
    bool ok = unify_terms(store_, goal_term, atom_term(fresh.head), limits_.occurs_check);
    bool complete = true;
    if (ok) complete = dfs(push_goals(fresh.body, rest));
    store_.undo(m);
    return complete;
  }

  bool emit_answer() {
    ++answers_;
    Substitution s;
    for (const std::string& v : query_vars_) {
      if (const Term* bound = store_.lookup(v)) s.bind(v, store_.resolve(*bound));
    }
    if (!on_answer_(s)) {
      stopped_ = true;
      return false;
    }
    if (limits_.max_solutions > 0 && answers_ >= limits_.max_solutions) {
      stopped_ = true;
      return false;
    }
    return true;
  }

  static Term atom_term(const Atom& a) {
    if (a.args.empty()) return Term::symbol(a.predicate);
    return Term::compound(a.predicate, a.args);
  }

  // Renames rule variables apart with a per-application counter. '~' cannot
  // occur in source identifiers, so fresh names never collide.
  Rule rename(const Rule& r) {
    Substitution renaming;
    std::vector<std::string> vs;
    for (const Term& t : r.head.args) t.collect_vars(vs);
    for (const Literal& l : r.body) {
      if (const Atom* a = std::get_if<Atom>(&l)) {
        for (const Term& t : a->args) t.collect_vars(vs);
      } else {
        const Builtin& b = std::get<Builtin>(l);
        b.lhs.collect_vars(vs);
        b.rhs.collect_vars(vs);
      }
    }
    const std::string suffix = "~" + std::to_string(rename_counter_++);
    for (const std::string& v : vs) renaming.bind(v, Term::var(v + suffix));

    Rule out;
    out.id = r.id;
    out.head.predicate = r.head.predicate;
    for (const Term& t : r.head.args) out.head.args.push_back(renaming.apply(t));
    for (const Literal& l : r.body) {
      if (const Atom* a = std::get_if<Atom>(&l)) {
        Atom na{a->predicate, {}};
        for (const Term& t : a->args) na.args.push_back(renaming.apply(t));
        out.body.emplace_back(std::move(na));
      } else {
        const Builtin& b = std::get<Builtin>(l);
        out.body.emplace_back(
            Builtin{b.kind, renaming.apply(b.lhs), renaming.apply(b.rhs)});
      }
    }
    return out;
  }

  std::int64_t eval_arith(const Term& t) {
    Term w = store_.walk(t);
    switch (w.kind()) {
      case Term::Kind::Int:
        return w.int_value();
      case Term::Kind::Variable:
        throw InstantiationError("unbound variable " + w.name() +
                                 " in arithmetic expression");
      case Term::Kind::Compound: {
        const std::string& f = w.name();
        if (f == "abs" && w.args().size() == 1) {
          std::int64_t v = eval_arith(w.args()[0]);
          return v < 0 ? -v : v;
        }
        if (w.args().size() == 2) {
          std::int64_t a = eval_arith(w.args()[0]);
          std::int64_t b = eval_arith(w.args()[1]);
          if (f == "+") return a + b;
          if (f == "-") return a - b;
          if (f == "*") return a * b;
          if (f == "//") {
            if (b == 0) throw InstantiationError("integer division by zero");
            return a / b;
          }
          if (f == "mod") {
            if (b == 0) throw InstantiationError("mod by zero");
            return ((a % b) + b) % b;
          }
        }
        throw InstantiationError("non-arithmetic term " + w.to_string() +
                                 " in arithmetic expression");
      }
      default:
        throw InstantiationError("non-arithmetic term " + w.to_string() +
                                 " in arithmetic expression");
    }
  }

  bool eval_builtin(const Builtin& b) {
    switch (b.kind) {
      case BuiltinKind::Is: {
        std::int64_t v = eval_arith(b.rhs);
        return unify_terms(store_, b.lhs, Term::integer(v), limits_.occurs_check);
      }
      case BuiltinKind::Eq:
        return unify_terms(store_, b.lhs, b.rhs, limits_.occurs_check);
      case BuiltinKind::Neq: {
        Term l = store_.resolve(b.lhs);
        Term r = store_.resolve(b.rhs);
        if (!l.is_ground() || !r.is_ground())
          throw InstantiationError("\\= requires ground arguments");
        return !(l == r);
      }
      case BuiltinKind::Lt:
        return eval_arith(b.lhs) < eval_arith(b.rhs);
      case BuiltinKind::Le:
        return eval_arith(b.lhs) <= eval_arith(b.rhs);
      case BuiltinKind::Gt:
        return eval_arith(b.lhs) > eval_arith(b.rhs);
      case BuiltinKind::Ge:
        return eval_arith(b.lhs) >= eval_arith(b.rhs);
    }
    return false;
  }

  const KbView& kb_;
  const SolveLimits& limits_;
  const std::function<bool(const Substitution&)>& on_answer_;
  std::unordered_map<PredKey, std::vector<const Rule*>, PredKeyHash> overlay_index_;
  Bindings store_;
  std::vector<std::string> query_vars_;
  long steps_ = 0;
  long answers_ = 0;
  long rename_counter_ = 0;
  bool stopped_ = false;
};

}  // namespace

SolveStatus solve(const KbView& kb, const std::vector<Literal>& goal,
                  const SolveLimits& limits,
                  const std::function<bool(const Substitution&)>& on_answer,
                  const std::vector<Rule>* overlay) {
  return Engine(kb, limits, on_answer, overlay).run(goal);
}

std::vector<Substitution> solve_all(const KbView& kb, const std::vector<Literal>& goal,
                                    const SolveLimits& limits,
                                    const std::vector<Rule>* overlay) {
  std::vector<Substitution> out;
  SolveStatus st = solve(
      kb, goal, limits,
      [&](const Substitution& s) {
        out.push_back(s);
        return true;
      },
      overlay);
  if (st == SolveStatus::DepthExceeded)
    throw DepthExceededError("resolution budget exhausted");
  return out;
}

Entailment entails(const KbView& kb, const Atom& ground_query, const SolveLimits& limits,
                   const std::vector<Rule>* overlay) {
  SolveLimits one = limits;
  one.max_solutions = 1;
  bool found = false;
  SolveStatus st = solve(
      kb, {Literal{ground_query}}, one,
      [&](const Substitution&) {
        found = true;
        return false;
      },
      overlay);
  if (found) return Entailment::Entailed;
  if (st == SolveStatus::DepthExceeded) return Entailment::Indeterminate;
  return Entailment::NotEntailed;
}

bool target_equal(const TargetValue& a, const TargetValue& b) { return a == b; }

std::string target_to_string(const TargetValue& v) {
  if (const std::int64_t* i = std::get_if<std::int64_t>(&v)) return std::to_string(*i);
  return std::get<bool>(v) ? "true" : "false";
}

std::optional<TargetValue> deduce(const KbView& kb, const std::vector<std::string>& labels,
                                  const QueryTemplate& query,
                                  const std::vector<Rule>& context_facts,
                                  const SolveLimits& limits) {
  std::vector<Rule> overlay = query.label_facts ? query.label_facts(labels)
                                                : std::vector<Rule>{};
  overlay.insert(overlay.end(), context_facts.begin(), context_facts.end());

  SolveLimits one = limits;
  one.max_solutions = 1;
  std::optional<Substitution> answer;
  SolveStatus st = solve(
      kb, query.goal, one,
      [&](const Substitution& s) {
        answer = s;
        return false;
      },
      &overlay);

  if (query.answer_var.empty()) {
    if (answer) return TargetValue{true};
    if (st == SolveStatus::DepthExceeded)
      throw DepthExceededError("resolution budget exhausted before a proof was found");
    return TargetValue{false};
  }
  if (answer) {
    const Term* bound = answer->lookup(query.answer_var);
    if (!bound || !bound->is_int())
      throw KbError("target variable " + query.answer_var +
                    " not bound to an integer by the query");
    return TargetValue{bound->int_value()};
  }
  if (st == SolveStatus::DepthExceeded)
    throw DepthExceededError("resolution budget exhausted before a proof was found");
  return std::nullopt;  // NoProof
}

}  // namespace cabl::logic
