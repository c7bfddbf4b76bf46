#include "cabl/entail_check.hpp"

#include <algorithm>
#include <set>
#include <sstream>

#include "cabl/rng.hpp"

namespace cabl::check {

using logic::Atom;
using logic::Entailment;
using logic::KbView;
using logic::Literal;
using logic::PredKey;
using logic::Rule;
using logic::Term;

long EntailCheckReport::total_samples() const {
  long n = 0;
  for (const PairResult& p : pairs) n += p.agree + p.disagree + p.indeterminate;
  return n;
}

long EntailCheckReport::total_disagreements() const {
  long n = 0;
  for (const PairResult& p : pairs) n += p.disagree;
  return n;
}

long EntailCheckReport::total_indeterminate() const {
  long n = 0;
  for (const PairResult& p : pairs) n += p.indeterminate;
  return n;
}

std::string EntailCheckReport::to_string() const {
  std::ostringstream os;
  for (const PairResult& p : pairs) {
    long total = p.agree + p.disagree + p.indeterminate;
    os << "pair " << p.name << ": agree " << p.agree << "/" << total << ", indeterminate "
       << p.indeterminate << '\n';
    for (const std::string& d : p.disagreements) os << "  disagreement: " << d << '\n';
  }
  os << (all_agree() ? "RESULT: PASS" : "RESULT: FAIL") << " (" << total_disagreements()
     << " disagreements, " << total_indeterminate() << " indeterminate, "
     << total_samples() << " samples)\n";
  return os.str();
}

namespace {

struct Universe {
  std::vector<std::int64_t> ints;
  std::vector<std::string> positions;
  std::vector<PredKey> input_preds;  // body predicates with no defining rules
};

Universe build_universe(const KnowledgeBase& kb, int max_positions) {
  Universe u;
  std::set<std::int64_t> ints;
  for (std::int64_t i = 0; i <= 7; ++i) ints.insert(i);
  std::function<void(const Term&)> scan = [&](const Term& t) {
    if (t.is_int()) ints.insert(t.int_value());
    if (t.is_compound())
      for (const Term& a : t.args()) scan(a);
  };
  std::set<PredKey> body_preds;
  for (const Rule& r : kb.rules()) {
    for (const Term& t : r.head.args) scan(t);
    for (const Literal& l : r.body) {
      if (const Atom* a = std::get_if<Atom>(&l)) {
        body_preds.insert(a->key());
        for (const Term& t : a->args) scan(t);
      } else {
        const logic::Builtin& b = std::get<logic::Builtin>(l);
        scan(b.lhs);
        scan(b.rhs);
      }
    }
  }
  u.ints.assign(ints.begin(), ints.end());
  for (int i = 0; i < max_positions; ++i) u.positions.push_back("p" + std::to_string(i + 1));
  for (const PredKey& k : body_preds)
    if (!kb.rules_for(k) && !kb.is_concept(k)) u.input_preds.push_back(k);
  return u;
}

// Ground context: concept facts over the phase domain, plus facts for input
// predicates (board positions and the like). Any such context is admissible
// for the self-containment theorems.
std::vector<Rule> sample_context(const KnowledgeBase& kb, const Universe& u,
                                 const std::vector<int>& domain, Rng& rng) {
  std::vector<Rule> facts;
  for (const std::string& pos : u.positions) {
    if (!domain.empty() && rng.next_double() < 0.85) {
      int z = domain[static_cast<std::size_t>(
          rng.uniform_int(0, static_cast<int>(domain.size()) - 1))];
      facts.push_back(Rule{
          -1, Atom{kb.concepts()[static_cast<std::size_t>(z)].name, {Term::symbol(pos)}}, {}});
    }
    for (const PredKey& ip : u.input_preds) {
      Atom a{ip.name, {}};
      a.args.push_back(Term::symbol(pos));
      for (int i = 1; i < ip.arity; ++i)
        a.args.push_back(Term::integer(
            u.ints[static_cast<std::size_t>(rng.uniform_int(0, 7))]));
      facts.push_back(Rule{-1, std::move(a), {}});
    }
  }
  return facts;
}

// Random atoms stick to integer arguments: ill-typed terms in arithmetic
// positions would abort the derivation instead of failing it. Structured
// arguments (lists, position constants) enter through harvested true atoms.
Atom random_ground_atom(const PredKey& pred, const Universe& u, Rng& rng) {
  Atom a{pred.name, {}};
  for (int i = 0; i < pred.arity; ++i)
    a.args.push_back(Term::integer(u.ints[static_cast<std::size_t>(
        rng.uniform_int(0, static_cast<int>(u.ints.size()) - 1))]));
  return a;
}

// Harvests ground atoms that actually hold, by running the predicate open
// against one side. Predicates whose rules need bound arguments (arithmetic
// guards) throw InstantiationError and yield nothing; callers fall back to
// random instantiation.
std::vector<Atom> harvest_true_atoms(const KbView& side, const PredKey& pred,
                                     const std::vector<Rule>& context,
                                     const logic::SolveLimits& limits, int max_answers) {
  Atom open{pred.name, {}};
  for (int i = 0; i < pred.arity; ++i) open.args.push_back(Term::var("Q" + std::to_string(i)));
  std::vector<Atom> out;
  logic::SolveLimits lim = limits;
  lim.max_solutions = max_answers;
  try {
    logic::solve(
        side, {Literal{open}}, lim,
        [&](const logic::Substitution& s) {
          Atom ground = open;
          bool ok = true;
          for (Term& t : ground.args) {
            t = s.apply(t);
            ok = ok && t.is_ground();
          }
          if (ok) out.push_back(std::move(ground));
          return true;
        },
        &context);
  } catch (const logic::InstantiationError&) {
    return {};
  }
  return out;
}

// Nudges one integer argument of a true atom, which usually produces a
// plausible-but-false neighbour. Non-integer arguments stay put.
Atom perturb(const Atom& a, Rng& rng) {
  Atom out = a;
  std::vector<std::size_t> int_slots;
  for (std::size_t i = 0; i < out.args.size(); ++i)
    if (out.args[i].is_int()) int_slots.push_back(i);
  if (int_slots.empty()) return out;
  std::size_t i = int_slots[static_cast<std::size_t>(
      rng.uniform_int(0, static_cast<int>(int_slots.size()) - 1))];
  out.args[i] = Term::integer(out.args[i].int_value() + (rng.next_double() < 0.5 ? 1 : -1));
  return out;
}

}  // namespace

EntailCheckReport check_curriculum(const KnowledgeBase& kb, const Curriculum& curriculum,
                                   const EntailCheckOptions& options) {
  EntailCheckReport report;
  Universe universe = build_universe(kb, options.max_positions);
  KbView full = KbView::full(kb);

  for (int p = 0; p < curriculum.phase_count(); ++p) {
    const curriculum::Phase& phase = curriculum.phases[static_cast<std::size_t>(p)];
    std::set<PredKey> pred_set = phase.sub_base.predicates();
    std::vector<PredKey> preds(pred_set.begin(), pred_set.end());

    struct Side {
      std::string name;
      const KbView* view;
    };
    std::vector<Side> partners;
    if (p + 1 < curriculum.phase_count())
      partners.push_back(
          {"p" + std::to_string(p + 1) + "-p" + std::to_string(p + 2),
           &curriculum.phases[static_cast<std::size_t>(p + 1)].sub_base});
    partners.push_back({"p" + std::to_string(p + 1) + "-full", &full});

    for (const Side& partner : partners) {
      Rng rng = Rng::substream(options.seed, "entail-check/" + partner.name);
      PairResult result;
      result.name = partner.name;

      std::vector<Rule> context;
      while (result.agree + result.disagree + result.indeterminate <
             options.samples_per_pair) {
        // Fresh context every few queries.
        long done = result.agree + result.disagree + result.indeterminate;
        if (context.empty() || done % 10 == 0)
          context = sample_context(kb, universe, phase.domain, rng);

        const PredKey& pred = preds[static_cast<std::size_t>(
            rng.uniform_int(0, static_cast<int>(preds.size()) - 1))];
        Atom query{pred.name, {}};
        double pick = rng.next_double();
        if (pick < 0.5) {
          query = random_ground_atom(pred, universe, rng);
        } else {
          const KbView& harvest_side = pick < 0.75 ? phase.sub_base : *partner.view;
          std::vector<Atom> found =
              harvest_true_atoms(harvest_side, pred, context, options.limits, 12);
          if (found.empty()) {
            query = random_ground_atom(pred, universe, rng);
          } else {
            query = found[static_cast<std::size_t>(
                rng.uniform_int(0, static_cast<int>(found.size()) - 1))];
            if (rng.next_double() < 0.4) query = perturb(query, rng);
          }
        }

        auto side_entails = [&](const KbView& view) {
          try {
            return logic::entails(view, query, options.limits, &context);
          } catch (const logic::InstantiationError&) {
            return Entailment::Indeterminate;  // ill-typed query; excluded
          }
        };
        Entailment lhs = side_entails(phase.sub_base);
        Entailment rhs = side_entails(*partner.view);
        if (lhs == Entailment::Indeterminate || rhs == Entailment::Indeterminate) {
          ++result.indeterminate;
        } else if (lhs == rhs) {
          ++result.agree;
        } else {
          ++result.disagree;
          if (result.disagreements.size() < 5)
            result.disagreements.push_back(query.to_string());
        }
      }
      report.pairs.push_back(std::move(result));
    }
  }
  return report;
}

}  // namespace cabl::check
