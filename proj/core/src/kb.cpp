#include "cabl/kb.hpp"

#include <algorithm>
#include <sstream>

namespace cabl::logic {

bool Atom::is_ground() const {
  for (const Term& t : args)
    if (!t.is_ground()) return false;
  return true;
}

std::string Atom::to_string() const {
  if (args.empty()) return predicate;
  std::ostringstream os;
  os << predicate << '(';
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (i) os << ',';
    os << args[i].to_string();
  }
  os << ')';
  return os.str();
}

std::string Builtin::to_string() const {
  const char* op = nullptr;
  switch (kind) {
    case BuiltinKind::Is: op = " is "; break;
    case BuiltinKind::Eq: op = " = "; break;
    case BuiltinKind::Neq: op = " \\= "; break;
    case BuiltinKind::Lt: op = " < "; break;
    case BuiltinKind::Le: op = " =< "; break;
    case BuiltinKind::Gt: op = " > "; break;
    case BuiltinKind::Ge: op = " >= "; break;
  }
  return lhs.to_string() + op + rhs.to_string();
}

std::string literal_to_string(const Literal& l) {
  if (const Atom* a = std::get_if<Atom>(&l)) return a->to_string();
  return std::get<Builtin>(l).to_string();
}

std::string Rule::to_string() const {
  std::ostringstream os;
  os << head.to_string();
  if (!body.empty()) {
    os << " :- ";
    for (std::size_t i = 0; i < body.size(); ++i) {
      if (i) os << ", ";
      os << literal_to_string(body[i]);
    }
  }
  os << '.';
  return os.str();
}

namespace {

void collect_body_atoms(const Rule& r, const std::function<void(const Atom&)>& fn) {
  for (const Literal& l : r.body)
    if (const Atom* a = std::get_if<Atom>(&l)) fn(*a);
}

}  // namespace

KnowledgeBase::KnowledgeBase(std::vector<Rule> rules, std::vector<PredKey> concepts,
                             PredKey target)
    : rules_(std::move(rules)), concepts_(std::move(concepts)), target_(std::move(target)) {
  if (target_.name.empty()) throw KbError("undeclared target predicate");

  for (std::size_t i = 0; i < rules_.size(); ++i) {
    rules_[i].id = static_cast<int>(i);
    head_index_[rules_[i].head.key()].push_back(static_cast<int>(i));
  }

  if (head_index_.find(target_) == head_index_.end())
    throw KbError("target " + target_.to_string() + " has no defining rule");

  // Declared names must be used with the declared arity only.
  auto check_decl_arity = [&](const PredKey& decl, const PredKey& used) {
    if (used.name == decl.name && used.arity != decl.arity)
      throw KbError("arity conflict for predicate " + decl.name + ": declared /" +
                    std::to_string(decl.arity) + ", used /" + std::to_string(used.arity));
  };
  for (const Rule& r : rules_) {
    for (const PredKey& c : concepts_) check_decl_arity(c, r.head.key());
    check_decl_arity(target_, r.head.key());
    collect_body_atoms(r, [&](const Atom& a) {
      for (const PredKey& c : concepts_) check_decl_arity(c, a.key());
      check_decl_arity(target_, a.key());
    });
  }

  // Every concept label must appear in at least one rule body.
  for (const PredKey& c : concepts_) {
    bool referenced = false;
    for (const Rule& r : rules_) {
      collect_body_atoms(r, [&](const Atom& a) {
        if (a.key() == c) referenced = true;
      });
      if (referenced) break;
    }
    if (!referenced)
      throw KbError("concept predicate " + c.to_string() + " never referenced in any rule body");
  }
}

bool KnowledgeBase::is_concept(const PredKey& k) const {
  return std::find(concepts_.begin(), concepts_.end(), k) != concepts_.end();
}

int KnowledgeBase::concept_index(const std::string& name) const {
  for (std::size_t i = 0; i < concepts_.size(); ++i)
    if (concepts_[i].name == name) return static_cast<int>(i);
  return -1;
}

std::vector<std::string> KnowledgeBase::concept_names() const {
  std::vector<std::string> out;
  out.reserve(concepts_.size());
  for (const PredKey& c : concepts_) out.push_back(c.name);
  return out;
}

const std::vector<int>* KnowledgeBase::rules_for(const PredKey& head) const {
  auto it = head_index_.find(head);
  return it == head_index_.end() ? nullptr : &it->second;
}

std::vector<int> KnowledgeBase::body_concepts(int rule_id) const {
  std::vector<int> out;
  collect_body_atoms(rule(rule_id), [&](const Atom& a) {
    PredKey k = a.key();
    for (std::size_t i = 0; i < concepts_.size(); ++i) {
      if (concepts_[i] == k &&
          std::find(out.begin(), out.end(), static_cast<int>(i)) == out.end())
        out.push_back(static_cast<int>(i));
    }
  });
  std::sort(out.begin(), out.end());
  return out;
}

std::set<PredKey> KnowledgeBase::predicates(const std::vector<int>& rule_ids) const {
  std::set<PredKey> out;
  for (int id : rule_ids) {
    const Rule& r = rule(id);
    out.insert(r.head.key());
    collect_body_atoms(r, [&](const Atom& a) { out.insert(a.key()); });
  }
  return out;
}

KbView KbView::full(const KnowledgeBase& kb) {
  std::vector<int> ids(static_cast<std::size_t>(kb.rule_count()));
  for (int i = 0; i < kb.rule_count(); ++i) ids[static_cast<std::size_t>(i)] = i;
  return subset(kb, std::move(ids));
}

KbView KbView::subset(const KnowledgeBase& kb, std::vector<int> rule_ids) {
  KbView v;
  v.kb_ = &kb;
  std::sort(rule_ids.begin(), rule_ids.end());
  rule_ids.erase(std::unique(rule_ids.begin(), rule_ids.end()), rule_ids.end());
  v.ids_ = std::move(rule_ids);
  for (int id : v.ids_) v.head_index_[kb.rule(id).head.key()].push_back(id);
  return v;
}

bool KbView::contains(int rule_id) const {
  return std::binary_search(ids_.begin(), ids_.end(), rule_id);
}

const std::vector<int>* KbView::rules_for(const PredKey& head) const {
  auto it = head_index_.find(head);
  return it == head_index_.end() ? nullptr : &it->second;
}

}  // namespace cabl::logic
