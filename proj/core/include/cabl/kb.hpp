#pragma once

#include <cstdint>
#include <functional>
#include <set>
#include <string>
#include <unordered_map>
#include <variant>
#include <vector>

#include "cabl/term.hpp"

namespace cabl::logic {

/// Predicates are identified by name and arity; number/2 and number/3 are
/// distinct predicates.
struct PredKey {
  std::string name;
  int arity = 0;

  bool operator==(const PredKey&) const = default;
  auto operator<=>(const PredKey&) const = default;
  std::string to_string() const { return name + "/" + std::to_string(arity); }
};

struct PredKeyHash {
  std::size_t operator()(const PredKey& k) const {
    return std::hash<std::string>()(k.name) * 31u + static_cast<std::size_t>(k.arity);
  }
};

struct Atom {
  std::string predicate;
  std::vector<Term> args;

  PredKey key() const { return {predicate, static_cast<int>(args.size())}; }
  bool is_ground() const;
  std::string to_string() const;
  bool operator==(const Atom&) const = default;
};

enum class BuiltinKind { Is, Eq, Neq, Lt, Le, Gt, Ge };

/// Arithmetic/comparison literal. For Is the right-hand side is an
/// expression term; comparisons evaluate both sides arithmetically.
struct Builtin {
  BuiltinKind kind;
  Term lhs;
  Term rhs;
  std::string to_string() const;
};

using Literal = std::variant<Atom, Builtin>;

std::string literal_to_string(const Literal& l);

struct Rule {
  int id = 0;  // position in source
  Atom head;
  std::vector<Literal> body;

  bool is_fact() const { return body.empty(); }
  std::string to_string() const;
};

/// Parsed Horn-clause program plus the declared concept set Z and target
/// predicate. Immutable after construction; safe to share across threads.
class KnowledgeBase {
 public:
  /// Validates invariants (target defined, concepts referenced, declaration
  /// arity consistency) and builds the head index. Throws KbError.
  KnowledgeBase(std::vector<Rule> rules, std::vector<PredKey> concepts, PredKey target);

  const std::vector<Rule>& rules() const { return rules_; }
  const Rule& rule(int id) const { return rules_[static_cast<std::size_t>(id)]; }
  int rule_count() const { return static_cast<int>(rules_.size()); }

  /// Concept predicates in declaration order (the label order used for
  /// lexicographic candidate enumeration).
  const std::vector<PredKey>& concepts() const { return concepts_; }
  const PredKey& target() const { return target_; }
  bool is_concept(const PredKey& k) const;
  /// Index of a concept in declaration order, or -1.
  int concept_index(const std::string& name) const;
  std::vector<std::string> concept_names() const;

  const std::vector<int>* rules_for(const PredKey& head) const;
  const std::unordered_map<PredKey, std::vector<int>, PredKeyHash>& head_index() const {
    return head_index_;
  }

  /// Concept indices referenced in the body of a rule, ascending.
  std::vector<int> body_concepts(int rule_id) const;
  /// All predicate keys occurring in the given rules (heads and bodies).
  std::set<PredKey> predicates(const std::vector<int>& rule_ids) const;

 private:
  std::vector<Rule> rules_;
  std::vector<PredKey> concepts_;
  PredKey target_;
  std::unordered_map<PredKey, std::vector<int>, PredKeyHash> head_index_;
};

struct KbError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// A sub-base: a view over a subset of a knowledge base's rules. Rule
/// identity is shared with the parent (no copies), so nesting checks are
/// set inclusions. The parent must outlive the view.
class KbView {
 public:
  static KbView full(const KnowledgeBase& kb);
  static KbView subset(const KnowledgeBase& kb, std::vector<int> rule_ids);

  const KnowledgeBase& kb() const { return *kb_; }
  const std::vector<int>& rule_ids() const { return ids_; }
  bool contains(int rule_id) const;
  int rule_count() const { return static_cast<int>(ids_.size()); }

  /// Rule ids with the given head predicate, in source order.
  const std::vector<int>* rules_for(const PredKey& head) const;
  std::set<PredKey> predicates() const { return kb_->predicates(ids_); }

 private:
  const KnowledgeBase* kb_ = nullptr;
  std::vector<int> ids_;  // ascending
  std::unordered_map<PredKey, std::vector<int>, PredKeyHash> head_index_;
};

}  // namespace cabl::logic
