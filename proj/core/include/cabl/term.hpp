#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace cabl::logic {

/// A first-order term: variable, symbol (constant), integer, or compound.
///
/// Lists are stored in cons form: `[1,2]` is `'.'(1, '.'(2, []))` with the
/// empty list as the symbol `[]`, and arithmetic expressions are compounds
/// with the operator as functor (`+`, `-`, `*`, `//`, `mod`, `abs`). Terms
/// are immutable values; copies share their argument vectors.
class Term {
 public:
  enum class Kind { Variable, Symbol, Int, Compound };

  static Term var(std::string name);
  static Term symbol(std::string name);
  static Term integer(std::int64_t value);
  static Term compound(std::string functor, std::vector<Term> args);

  /// Proper list [a, b, c].
  static Term list(std::vector<Term> items);
  /// Partial list [a, b | Tail].
  static Term list(std::vector<Term> items, Term tail);
  static Term nil();

  Kind kind() const { return kind_; }
  bool is_var() const { return kind_ == Kind::Variable; }
  bool is_symbol() const { return kind_ == Kind::Symbol; }
  bool is_int() const { return kind_ == Kind::Int; }
  bool is_compound() const { return kind_ == Kind::Compound; }
  bool is_nil() const { return kind_ == Kind::Symbol && name_ == "[]"; }
  bool is_cons() const {
    return kind_ == Kind::Compound && name_ == "." && args().size() == 2;
  }
  bool is_ground() const;

  /// Variable name, symbol name, or compound functor.
  const std::string& name() const { return name_; }
  std::int64_t int_value() const { return int_; }
  const std::vector<Term>& args() const;

  bool operator==(const Term& other) const;
  bool operator!=(const Term& other) const { return !(*this == other); }

  /// Collects the names of all variables in the term, in first-occurrence order.
  void collect_vars(std::vector<std::string>& out) const;
  bool contains_var(const std::string& name) const;

  /// Renders the term with list sugar and infix arithmetic operators.
  std::string to_string() const;

 private:
  Term(Kind kind, std::string name, std::int64_t value,
       std::shared_ptr<const std::vector<Term>> args)
      : kind_(kind), int_(value), name_(std::move(name)), args_(std::move(args)) {}

  Kind kind_;
  std::int64_t int_ = 0;
  std::string name_;
  std::shared_ptr<const std::vector<Term>> args_;
};

/// A variable binding set. Answer substitutions returned by the solver are
/// fully resolved: no bound variable occurs in any stored value, so applying
/// a substitution twice equals applying it once.
class Substitution {
 public:
  Substitution() = default;

  bool empty() const { return bindings_.empty(); }
  std::size_t size() const { return bindings_.size(); }
  const Term* lookup(const std::string& var) const;
  void bind(std::string var, Term value);

  /// Deep substitution; chases chains of bound variables.
  Term apply(const Term& t) const;

  auto begin() const { return bindings_.begin(); }
  auto end() const { return bindings_.end(); }

  bool operator==(const Substitution& other) const { return bindings_ == other.bindings_; }
  std::string to_string() const;

 private:
  std::map<std::string, Term> bindings_;
};

/// Mutable binding store used during resolution. Bindings are only ever
/// added, so backtracking undoes them by popping the trail.
class Bindings {
 public:
  const Term* lookup(const std::string& var) const;
  void bind(std::string var, Term value);

  /// Shallow dereference: follows variable bindings until a non-variable or
  /// an unbound variable is reached.
  Term walk(Term t) const;
  /// Deep dereference: resolves the whole term.
  Term resolve(const Term& t) const;

  std::size_t mark() const { return trail_.size(); }
  void undo(std::size_t mark);

  Substitution to_substitution() const;

 private:
  std::map<std::string, Term> map_;
  std::vector<std::string> trail_;
};

/// Robinson unification over a mutable store. Returns true on success; on
/// failure the store is left as given (caller undoes via mark()).
bool unify_terms(Bindings& store, const Term& a, const Term& b, bool occurs_check = false);

/// Functional unification: extends `s` with a unifier of `a` and `b`, or
/// returns nullopt when none exists.
std::optional<Substitution> unify(const Term& a, const Term& b, const Substitution& s,
                                  bool occurs_check = false);

}  // namespace cabl::logic
