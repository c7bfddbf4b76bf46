#include "cabl/term.hpp"

#include <algorithm>
#include <sstream>
#include <stdexcept>

namespace cabl::logic {

namespace {
const std::vector<Term> kNoArgs;

bool is_infix_op(const std::string& f) {
  return f == "+" || f == "-" || f == "*" || f == "//" || f == "mod";
}
}  // namespace

Term Term::var(std::string name) {
  return Term(Kind::Variable, std::move(name), 0, nullptr);
}

Term Term::symbol(std::string name) {
  return Term(Kind::Symbol, std::move(name), 0, nullptr);
}

Term Term::integer(std::int64_t value) { return Term(Kind::Int, "", value, nullptr); }

Term Term::compound(std::string functor, std::vector<Term> args) {
  if (args.empty()) return symbol(std::move(functor));
  return Term(Kind::Compound, std::move(functor), 0,
              std::make_shared<const std::vector<Term>>(std::move(args)));
}

Term Term::nil() { return symbol("[]"); }

Term Term::list(std::vector<Term> items) { return list(std::move(items), nil()); }

Term Term::list(std::vector<Term> items, Term tail) {
  Term out = std::move(tail);
  for (auto it = items.rbegin(); it != items.rend(); ++it) {
    out = compound(".", {std::move(*it), std::move(out)});
  }
  return out;
}

const std::vector<Term>& Term::args() const { return args_ ? *args_ : kNoArgs; }

bool Term::is_ground() const {
  if (kind_ == Kind::Variable) return false;
  if (kind_ == Kind::Compound) {
    for (const Term& a : args())
      if (!a.is_ground()) return false;
  }
  return true;
}

bool Term::operator==(const Term& other) const {
  if (kind_ != other.kind_) return false;
  switch (kind_) {
    case Kind::Variable:
    case Kind::Symbol:
      return name_ == other.name_;
    case Kind::Int:
      return int_ == other.int_;
    case Kind::Compound: {
      if (name_ != other.name_) return false;
      const auto& a = args();
      const auto& b = other.args();
      if (a.size() != b.size()) return false;
      for (std::size_t i = 0; i < a.size(); ++i)
        if (!(a[i] == b[i])) return false;
      return true;
    }
  }
  return false;
}

void Term::collect_vars(std::vector<std::string>& out) const {
  switch (kind_) {
    case Kind::Variable:
      if (std::find(out.begin(), out.end(), name_) == out.end()) out.push_back(name_);
      break;
    case Kind::Compound:
      for (const Term& a : args()) a.collect_vars(out);
      break;
    default:
      break;
  }
}

bool Term::contains_var(const std::string& name) const {
  if (kind_ == Kind::Variable) return name_ == name;
  if (kind_ == Kind::Compound) {
    for (const Term& a : args())
      if (a.contains_var(name)) return true;
  }
  return false;
}

std::string Term::to_string() const {
  std::ostringstream os;
  switch (kind_) {
    case Kind::Variable:
    case Kind::Symbol:
      os << name_;
      break;
    case Kind::Int:
      os << int_;
      break;
    case Kind::Compound: {
      if (is_cons()) {
        os << '[';
        const Term* cur = this;
        bool first = true;
        while (cur->is_cons()) {
          if (!first) os << ',';
          os << cur->args()[0].to_string();
          first = false;
          cur = &cur->args()[1];
        }
        if (!cur->is_nil()) os << '|' << cur->to_string();
        os << ']';
      } else if (is_infix_op(name_) && args().size() == 2) {
        os << '(' << args()[0].to_string() << ' ' << name_ << ' ' << args()[1].to_string()
           << ')';
      } else {
        os << name_ << '(';
        for (std::size_t i = 0; i < args().size(); ++i) {
          if (i) os << ',';
          os << args()[i].to_string();
        }
        os << ')';
      }
      break;
    }
  }
  return os.str();
}

const Term* Substitution::lookup(const std::string& var) const {
  auto it = bindings_.find(var);
  return it == bindings_.end() ? nullptr : &it->second;
}

void Substitution::bind(std::string var, Term value) {
  bindings_.insert_or_assign(std::move(var), std::move(value));
}

Term Substitution::apply(const Term& t) const {
  switch (t.kind()) {
    case Term::Kind::Variable: {
      const Term* bound = lookup(t.name());
      return bound ? apply(*bound) : t;
    }
    case Term::Kind::Compound: {
      std::vector<Term> args;
      args.reserve(t.args().size());
      bool changed = false;
      for (const Term& a : t.args()) {
        args.push_back(apply(a));
        changed = changed || !(args.back() == a);
      }
      if (!changed) return t;
      return Term::compound(t.name(), std::move(args));
    }
    default:
      return t;
  }
}

std::string Substitution::to_string() const {
  std::ostringstream os;
  os << '{';
  bool first = true;
  for (const auto& [k, v] : bindings_) {
    if (!first) os << ", ";
    os << k << "->" << v.to_string();
    first = false;
  }
  os << '}';
  return os.str();
}

const Term* Bindings::lookup(const std::string& var) const {
  auto it = map_.find(var);
  return it == map_.end() ? nullptr : &it->second;
}

void Bindings::bind(std::string var, Term value) {
  trail_.push_back(var);
  map_.insert_or_assign(std::move(var), std::move(value));
}

Term Bindings::walk(Term t) const {
  while (t.is_var()) {
    const Term* bound = lookup(t.name());
    if (!bound) break;
    t = *bound;
  }
  return t;
}

Term Bindings::resolve(const Term& t) const {
  Term w = walk(t);
  if (w.is_compound()) {
    std::vector<Term> args;
    args.reserve(w.args().size());
    for (const Term& a : w.args()) args.push_back(resolve(a));
    return Term::compound(w.name(), std::move(args));
  }
  return w;
}

void Bindings::undo(std::size_t mark) {
  while (trail_.size() > mark) {
    map_.erase(trail_.back());
    trail_.pop_back();
  }
}

Substitution Bindings::to_substitution() const {
  Substitution s;
  for (const auto& [k, v] : map_) s.bind(k, resolve(v));
  return s;
}

bool unify_terms(Bindings& store, const Term& a, const Term& b, bool occurs_check) {
  Term x = store.walk(a);
  Term y = store.walk(b);
  if (x.is_var()) {
    if (y.is_var() && y.name() == x.name()) return true;
    if (occurs_check && store.resolve(y).contains_var(x.name())) return false;
    store.bind(x.name(), y);
    return true;
  }
  if (y.is_var()) {
    if (occurs_check && store.resolve(x).contains_var(y.name())) return false;
    store.bind(y.name(), x);
    return true;
  }
  if (x.kind() != y.kind()) return false;
  switch (x.kind()) {
    case Term::Kind::Symbol:
      return x.name() == y.name();
    case Term::Kind::Int:
      return x.int_value() == y.int_value();
    case Term::Kind::Compound: {
      if (x.name() != y.name() || x.args().size() != y.args().size()) return false;
      for (std::size_t i = 0; i < x.args().size(); ++i)
        if (!unify_terms(store, x.args()[i], y.args()[i], occurs_check)) return false;
      return true;
    }
    default:
      return false;
  }
}

std::optional<Substitution> unify(const Term& a, const Term& b, const Substitution& s,
                                  bool occurs_check) {
  Bindings store;
  for (const auto& [k, v] : s) store.bind(k, v);
  if (!unify_terms(store, a, b, occurs_check)) return std::nullopt;
  return store.to_substitution();
}

}  // namespace cabl::logic
