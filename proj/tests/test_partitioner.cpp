#include <fstream>
#include <set>
#include <sstream>

#include "cabl/entail_check.hpp"
#include "cabl/parser.hpp"
#include "cabl/partition.hpp"
#include "cabl/rng.hpp"
#include "cabl/solver.hpp"
#include "cabl/tasks.hpp"
#include "doctest.h"

using namespace cabl::curriculum;
using cabl::logic::Atom;
using cabl::logic::Entailment;
using cabl::logic::KbView;
using cabl::logic::KnowledgeBase;
using cabl::logic::Literal;
using cabl::logic::PredKey;
using cabl::logic::Rule;
using cabl::logic::Term;

namespace {

KnowledgeBase addition_kb(int base) {
  return cabl::logic::parse_program(cabl::tasks::addition_kb_text({base, 2}));
}

KnowledgeBase chess_kb() {
  return cabl::logic::parse_program(cabl::tasks::chess_kb_text());
}

std::vector<std::string> domain_names(const KnowledgeBase& kb, const std::vector<int>& ids) {
  std::vector<std::string> out;
  for (int i : ids) out.push_back(kb.concepts()[static_cast<std::size_t>(i)].name);
  return out;
}

std::string golden(const std::string& name) {
  std::ifstream in(std::string(CABL_GOLDEN_DIR) + "/" + name);
  REQUIRE(in);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

}  // namespace

TEST_CASE("dependency graph: digit rules feed the recursive number rule") {
  KnowledgeBase kb = addition_kb(10);
  DependencyGraph g = build_dependency_graph(kb);
  // source order: addition=0, number/3 fact=1, number/3 recursive=2, number/2=3,
  // digit rules 4..13
  for (int digit_rule = 4; digit_rule <= 13; ++digit_rule)
    CHECK(g.has_edge(digit_rule, 2));
  CHECK(g.has_edge(2, 2));  // recursive self-loop
  CHECK(g.has_edge(2, 3));
  CHECK(g.has_edge(3, 0));
  CHECK_FALSE(g.has_edge(0, 2));
}

TEST_CASE("dependency graph: isolated fact has no edges") {
  KnowledgeBase kb = cabl::logic::parse_program("@target t/0.\nt.\nlonely(1).\n");
  DependencyGraph g = build_dependency_graph(kb);
  CHECK(g.edges().empty());
}

TEST_CASE("initial clusters: chess knight cluster is the lshape chain") {
  KnowledgeBase kb = chess_kb();
  DependencyGraph g = build_dependency_graph(kb);
  std::vector<Cluster> clusters = initial_clusters(kb, g);
  REQUIRE(clusters.size() == 6);

  int knight = kb.concept_index("knight");
  const Cluster* c_knight = nullptr;
  for (const Cluster& c : clusters)
    if (c.seed_concepts == std::vector<int>{knight}) c_knight = &c;
  REQUIRE(c_knight != nullptr);
  // attack-via-knight rule plus the two lshape rules, nothing else
  CHECK(c_knight->rule_ids.size() == 3);
  std::set<std::string> heads;
  for (int r : c_knight->rule_ids) heads.insert(kb.rule(r).head.predicate);
  CHECK(heads == std::set<std::string>{"attack", "lshape"});
  CHECK(domain_names(kb, c_knight->concept_domain) == std::vector<std::string>{"knight"});
}

TEST_CASE("initial clusters: queen cluster pulls in line and diag support") {
  KnowledgeBase kb = chess_kb();
  std::vector<Cluster> clusters = initial_clusters(kb, build_dependency_graph(kb));
  int queen = kb.concept_index("queen");
  const Cluster* c_queen = nullptr;
  for (const Cluster& c : clusters)
    if (c.seed_concepts == std::vector<int>{queen}) c_queen = &c;
  REQUIRE(c_queen != nullptr);
  std::set<std::string> heads;
  for (int r : c_queen->rule_ids) heads.insert(kb.rule(r).head.predicate);
  CHECK(heads == std::set<std::string>{"attack", "line_or_diag", "line", "diag",
                                       "diag_rise", "diag_fall"});
}

TEST_CASE("initial clusters: every digit cluster shares the arithmetic rules") {
  KnowledgeBase kb = addition_kb(10);
  std::vector<Cluster> clusters = initial_clusters(kb, build_dependency_graph(kb));
  REQUIRE(clusters.size() == 10);
  for (const Cluster& c : clusters) {
    CHECK(c.rule_ids.size() == 5);  // own digit rule + 4 shared arithmetic rules
    for (int shared : {0, 1, 2, 3}) CHECK(std::count(c.rule_ids.begin(), c.rule_ids.end(), shared) == 1);
    CHECK(c.concept_domain == c.seed_concepts);
  }
}

TEST_CASE("merge_and_order: rook and bishop precede queen") {
  KnowledgeBase kb = chess_kb();
  DependencyGraph g = build_dependency_graph(kb);
  std::vector<Cluster> ordered = merge_and_order(kb, initial_clusters(kb, g), g);
  auto position_of = [&](const std::string& name) {
    int idx = kb.concept_index(name);
    for (std::size_t i = 0; i < ordered.size(); ++i)
      if (std::count(ordered[i].seed_concepts.begin(), ordered[i].seed_concepts.end(), idx))
        return static_cast<int>(i);
    return -1;
  };
  CHECK(position_of("rook") < position_of("queen"));
  CHECK(position_of("bishop") < position_of("queen"));
  CHECK(position_of("knight") == 0);
}

TEST_CASE("merge_and_order: identical clusters merge") {
  KnowledgeBase kb = cabl::logic::parse_program(
      "@concept a/1.\n@concept b/1.\n@target t/0.\nt :- a(p1), b(p1).\n");
  DependencyGraph g = build_dependency_graph(kb);
  std::vector<Cluster> ordered = merge_and_order(kb, initial_clusters(kb, g), g);
  REQUIRE(ordered.size() == 1);
  CHECK(ordered[0].seed_concepts.size() == 2);
}

TEST_CASE("merge_and_order: bidirectional dependency puts the smaller cluster first") {
  // C_ca = {t:-ca, ua, shared} (3 rules); C_cb = {t:-cb, ub, shared, extra, more}
  // (5 rules); the shared fact creates edges in both directions.
  KnowledgeBase kb = cabl::logic::parse_program(R"(
@concept ca/1.
@concept cb/1.
@target t/0.
t :- ca(p1), ua(p1).
t :- cb(p1), ub(p1).
ua(X) :- shared(X).
ub(X) :- shared(X), extra(X).
shared(p1).
extra(X) :- more(X).
more(p1).
)");
  DependencyGraph g = build_dependency_graph(kb);
  std::vector<Cluster> clusters = initial_clusters(kb, g);
  REQUIRE(clusters.size() == 2);
  CHECK(clusters[0].rule_ids.size() == 3);
  CHECK(clusters[1].rule_ids.size() == 5);
  std::vector<Cluster> ordered = merge_and_order(kb, clusters, g);
  CHECK(ordered[0].rule_ids.size() == 3);
  CHECK(ordered[1].rule_ids.size() == 5);
}

TEST_CASE("assemble: chess without tau matches the golden curriculum") {
  KnowledgeBase kb = chess_kb();
  Curriculum cur = partition(kb, std::nullopt);
  CHECK(curriculum_summary(kb, cur) == golden("chess_curriculum.txt"));
  CHECK(domain_names(kb, cur.phases[0].domain) == std::vector<std::string>{"knight"});
}

TEST_CASE("assemble: tau equal to |Z| gives a single full phase") {
  KnowledgeBase kb = addition_kb(10);
  Curriculum cur = partition(kb, 10);
  REQUIRE(cur.phase_count() == 1);
  CHECK(cur.phases[0].sub_base.rule_count() == kb.rule_count());
  CHECK(cur.phases[0].domain.size() == 10);
}

TEST_CASE("assemble: tau beyond |Z| is an error") {
  KnowledgeBase kb = addition_kb(10);
  CHECK_THROWS_AS(partition(kb, 11), cabl::logic::KbError);
}

TEST_CASE("assemble: decimal tau=2 gives five phases, hex gives eight") {
  {
    KnowledgeBase kb = addition_kb(10);
    Curriculum cur = partition(kb, 2);
    CHECK(cur.phase_count() == 5);
    CHECK(curriculum_summary(kb, cur) == golden("addition_dec_tau2.txt"));
  }
  {
    KnowledgeBase kb = addition_kb(16);
    Curriculum cur = partition(kb, 2);
    CHECK(cur.phase_count() == 8);
    CHECK(curriculum_summary(kb, cur) == golden("addition_hex_tau2.txt"));
  }
}

namespace {

void check_curriculum_invariants(const KnowledgeBase& kb, const Curriculum& cur,
                                 std::optional<int> tau) {
  REQUIRE(cur.phase_count() >= 1);
  std::set<int> prev_rules;
  std::set<int> prev_domain;
  for (int p = 0; p < cur.phase_count(); ++p) {
    const Phase& ph = cur.phases[static_cast<std::size_t>(p)];
    std::set<int> rules(ph.sub_base.rule_ids().begin(), ph.sub_base.rule_ids().end());
    std::set<int> domain(ph.domain.begin(), ph.domain.end());
    // nesting
    for (int r : prev_rules) CHECK(rules.count(r) == 1);
    for (int z : prev_domain) CHECK(domain.count(z) == 1);
    // growth (last phase exempt)
    if (tau && p < cur.phase_count() - 1)
      CHECK(static_cast<int>(domain.size() - prev_domain.size()) >= *tau);
    prev_rules = std::move(rules);
    prev_domain = std::move(domain);
  }
  // coverage
  CHECK(static_cast<int>(prev_rules.size()) == kb.rule_count());
  CHECK(prev_domain.size() == kb.concepts().size());
}

KnowledgeBase random_layered_kb(cabl::Rng& rng) {
  int concepts = rng.uniform_int(2, 5);
  std::ostringstream os;
  for (int c = 0; c < concepts; ++c) os << "@concept c" << c << "/1.\n";
  os << "@target t/1.\n";
  int mids = rng.uniform_int(1, 4);
  for (int c = 0; c < concepts; ++c) {
    os << "g" << c << "(X) :- c" << c << "(X).\n";
    // some concepts feed a random intermediate chain as well
    if (rng.next_double() < 0.6)
      os << "m" << rng.uniform_int(0, mids - 1) << "(X) :- g" << c << "(X).\n";
  }
  for (int m = 0; m < mids; ++m) {
    os << "t(X) :- m" << m << "(X).\n";
    if (rng.next_double() < 0.4) os << "m" << m << "(X) :- g0(X).\n";
  }
  os << "t(X) :- g" << rng.uniform_int(0, concepts - 1) << "(X).\n";
  return cabl::logic::parse_program(os.str());
}

}  // namespace

TEST_CASE("curriculum invariants hold for shipped KBs across tau settings") {
  for (int base : {10, 16}) {
    KnowledgeBase kb = addition_kb(base);
    for (std::optional<int> tau : {std::optional<int>{}, std::optional<int>{1},
                                   std::optional<int>{2}, std::optional<int>{3}})
      check_curriculum_invariants(kb, partition(kb, tau), tau);
  }
  KnowledgeBase chess = chess_kb();
  for (std::optional<int> tau : {std::optional<int>{}, std::optional<int>{1},
                                 std::optional<int>{2}, std::optional<int>{3}})
    check_curriculum_invariants(chess, partition(chess, tau), tau);
}

TEST_CASE("curriculum invariants hold for random layered KBs") {
  cabl::Rng rng(23);
  for (int trial = 0; trial < 25; ++trial) {
    KnowledgeBase kb = random_layered_kb(rng);
    int max_tau = static_cast<int>(kb.concepts().size());
    int tau = 1 + static_cast<int>(rng.next_u64() % static_cast<unsigned>(max_tau));
    check_curriculum_invariants(kb, partition(kb, tau), tau);
    check_curriculum_invariants(kb, partition(kb, std::nullopt), std::nullopt);
  }
}

TEST_CASE("self-containment: exhaustive ground-atom agreement on decimal addition") {
  KnowledgeBase kb = addition_kb(10);
  Curriculum cur = partition(kb, 2);
  KbView full = KbView::full(kb);
  auto names = kb.concept_names();

  for (int p = 0; p < cur.phase_count(); ++p) {
    const Phase& ph = cur.phases[static_cast<std::size_t>(p)];
    // fix an overlay whose concepts lie inside Z_p
    int za = ph.domain[0];
    int zb = ph.domain[ph.domain.size() / 2];
    std::vector<Rule> facts{
        Rule{-1, Atom{names[static_cast<std::size_t>(za)], {Term::symbol("p1")}}, {}},
        Rule{-1, Atom{names[static_cast<std::size_t>(zb)], {Term::symbol("p2")}}, {}}};

    std::vector<Atom> universe;
    std::vector<Term> lists{Term::list({}), Term::list({Term::symbol("p1")}),
                            Term::list({Term::symbol("p2")}),
                            Term::list({Term::symbol("p1"), Term::symbol("p2")})};
    for (const Term& pos : {Term::symbol("p1"), Term::symbol("p2")})
      for (int v = 0; v <= 19; ++v) universe.push_back(Atom{"digit", {pos, Term::integer(v)}});
    for (const Term& l : lists)
      for (int v = 0; v <= 19; ++v) universe.push_back(Atom{"number", {l, Term::integer(v)}});
    for (const Term& l1 : lists)
      for (const Term& l2 : lists)
        for (int v : {za + zb, za + zb + 1, 5})
          universe.push_back(Atom{"addition", {l1, l2, Term::integer(v)}});

    // cross-phase partner: next phase if it exists, else the full KB
    const KbView& partner =
        p + 1 < cur.phase_count() ? cur.phases[static_cast<std::size_t>(p + 1)].sub_base : full;
    for (const Atom& q : universe) {
      Entailment in_phase = cabl::logic::entails(ph.sub_base, q, {}, &facts);
      CHECK(in_phase == cabl::logic::entails(full, q, {}, &facts));
      CHECK(in_phase == cabl::logic::entails(partner, q, {}, &facts));
    }
  }
}

TEST_CASE("self-containment: exhaustive agreement on the chess curriculum") {
  KnowledgeBase kb = chess_kb();
  Curriculum cur = partition(kb, std::nullopt);
  KbView full = KbView::full(kb);
  auto names = kb.concept_names();

  for (int p = 0; p < cur.phase_count(); ++p) {
    const Phase& ph = cur.phases[static_cast<std::size_t>(p)];
    int z = ph.domain[static_cast<std::size_t>(p % ph.domain.size())];
    std::vector<Rule> facts{
        Rule{-1, Atom{names[static_cast<std::size_t>(z)], {Term::symbol("p1")}}, {}},
        Rule{-1, Atom{"pos", {Term::symbol("p1"), Term::integer(1), Term::integer(1)}}, {}},
        Rule{-1, Atom{"pos", {Term::symbol("p2"), Term::integer(2), Term::integer(3)}}, {}}};

    std::set<PredKey> preds = ph.sub_base.predicates();
    std::vector<Atom> universe{Atom{"attack", {}}};
    for (const PredKey& k : preds) {
      if (k.arity != 4) continue;
      for (int a = 0; a <= 3; ++a)
        for (int b = 0; b <= 3; ++b)
          for (int c = 0; c <= 3; ++c)
            for (int d = 0; d <= 3; ++d)
              universe.push_back(Atom{
                  k.name, {Term::integer(a), Term::integer(b), Term::integer(c),
                           Term::integer(d)}});
    }
    const KbView& partner =
        p + 1 < cur.phase_count() ? cur.phases[static_cast<std::size_t>(p + 1)].sub_base : full;
    for (const Atom& q : universe) {
      Entailment in_phase = cabl::logic::entails(ph.sub_base, q, {}, &facts);
      CHECK(in_phase == cabl::logic::entails(full, q, {}, &facts));
      CHECK(in_phase == cabl::logic::entails(partner, q, {}, &facts));
    }
  }
}

TEST_CASE("entail-check detects a deliberately broken partition") {
  KnowledgeBase kb = addition_kb(10);
  Curriculum cur = partition(kb, 2);
  // Drop the digit rule of the first phase's first concept from KB_1.
  int victim = cur.phases[0].domain[0];
  std::vector<int> pruned;
  for (int r : cur.phases[0].sub_base.rule_ids()) {
    auto body = kb.body_concepts(r);
    if (std::count(body.begin(), body.end(), victim) == 0) pruned.push_back(r);
  }
  REQUIRE(pruned.size() + 1 == cur.phases[0].sub_base.rule_ids().size());
  Curriculum broken = cur;
  broken.phases[0].sub_base = KbView::subset(kb, pruned);

  // direct disagreement witness
  auto names = kb.concept_names();
  std::vector<Rule> facts{
      Rule{-1, Atom{names[static_cast<std::size_t>(victim)], {Term::symbol("p1")}}, {}}};
  Atom witness{"digit", {Term::symbol("p1"), Term::integer(victim)}};
  CHECK(cabl::logic::entails(KbView::full(kb), witness, {}, &facts) == Entailment::Entailed);
  CHECK(cabl::logic::entails(broken.phases[0].sub_base, witness, {}, &facts) ==
        Entailment::NotEntailed);

  // and the sampling checker finds it
  cabl::check::EntailCheckOptions opts;
  opts.samples_per_pair = 300;
  cabl::check::EntailCheckReport report = cabl::check::check_curriculum(kb, broken, opts);
  CHECK_FALSE(report.all_agree());
}

TEST_CASE("entail-check passes on sound curricula") {
  KnowledgeBase kb = addition_kb(10);
  cabl::check::EntailCheckOptions opts;
  opts.samples_per_pair = 100;
  cabl::check::EntailCheckReport report =
      cabl::check::check_curriculum(kb, partition(kb, 2), opts);
  CHECK(report.all_agree());
  CHECK(report.total_indeterminate() == 0);
}

TEST_CASE("partition is deterministic") {
  KnowledgeBase kb = chess_kb();
  Curriculum a = partition(kb, 2);
  Curriculum b = partition(kb, 2);
  REQUIRE(a.phase_count() == b.phase_count());
  for (int p = 0; p < a.phase_count(); ++p) {
    CHECK(a.phases[static_cast<std::size_t>(p)].sub_base.rule_ids() ==
          b.phases[static_cast<std::size_t>(p)].sub_base.rule_ids());
    CHECK(a.phases[static_cast<std::size_t>(p)].domain ==
          b.phases[static_cast<std::size_t>(p)].domain);
  }
}

TEST_CASE("dot output names rule heads and phases") {
  KnowledgeBase kb = chess_kb();
  Curriculum cur = partition(kb, std::nullopt);
  std::string dot = to_dot(kb, build_dependency_graph(kb), cur);
  CHECK(dot.find("digraph") != std::string::npos);
  CHECK(dot.find("subgraph cluster_phase1") != std::string::npos);
  CHECK(dot.find("lshape(X1,Y1,X2,Y2)") != std::string::npos);
  CHECK(dot.find("->") != std::string::npos);
}

TEST_CASE("lshape entailment inside the first chess sub-base") {
  KnowledgeBase kb = chess_kb();
  Curriculum cur = partition(kb, std::nullopt);
  Atom q{"lshape",
         {Term::integer(0), Term::integer(0), Term::integer(1), Term::integer(2)}};
  CHECK(cabl::logic::entails(cur.phases[0].sub_base, q) == Entailment::Entailed);
}
