#include "cabl/partition.hpp"

#include <algorithm>
#include <chrono>
#include <set>
#include <sstream>

namespace cabl::curriculum {

using logic::KbError;
using logic::PredKey;
using logic::Rule;

bool DependencyGraph::has_edge(int from, int to) const {
  const auto& s = successors[static_cast<std::size_t>(from)];
  return std::find(s.begin(), s.end(), to) != s.end();
}

std::vector<std::pair<int, int>> DependencyGraph::edges() const {
  std::vector<std::pair<int, int>> out;
  for (int i = 0; i < node_count; ++i)
    for (int j : successors[static_cast<std::size_t>(i)]) out.emplace_back(i, j);
  return out;
}

DependencyGraph build_dependency_graph(const KnowledgeBase& kb) {
  DependencyGraph g;
  g.node_count = kb.rule_count();
  g.successors.assign(static_cast<std::size_t>(g.node_count), {});
  g.predecessors.assign(static_cast<std::size_t>(g.node_count), {});

  // Predicate -> rules whose bodies reference it.
  std::unordered_map<PredKey, std::vector<int>, logic::PredKeyHash> body_index;
  for (const Rule& r : kb.rules()) {
    std::set<PredKey> seen;
    for (const logic::Literal& l : r.body) {
      if (const logic::Atom* a = std::get_if<logic::Atom>(&l)) {
        if (seen.insert(a->key()).second) body_index[a->key()].push_back(r.id);
      }
    }
  }
  for (const Rule& r : kb.rules()) {
    auto it = body_index.find(r.head.key());
    if (it == body_index.end()) continue;
    for (int j : it->second) {
      g.successors[static_cast<std::size_t>(r.id)].push_back(j);
      g.predecessors[static_cast<std::size_t>(j)].push_back(r.id);
    }
  }
  return g;
}

namespace {

std::vector<int> sorted_unique(std::vector<int> v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

}  // namespace

std::vector<Cluster> initial_clusters(const KnowledgeBase& kb, const DependencyGraph& g) {
  const int n = kb.rule_count();
  std::vector<std::vector<int>> rule_concepts(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) rule_concepts[static_cast<std::size_t>(i)] = kb.body_concepts(i);

  std::vector<Cluster> out;

  for (std::size_t z = 0; z < kb.concepts().size(); ++z) {
    const int zi = static_cast<int>(z);
    std::vector<int> seeds;
    for (int i = 0; i < n; ++i) {
      const auto& cs = rule_concepts[static_cast<std::size_t>(i)];
      if (std::binary_search(cs.begin(), cs.end(), zi)) seeds.push_back(i);
    }
    if (seeds.empty())
      throw KbError("concept " + kb.concepts()[z].to_string() +
                    " has no referencing rules to cluster");

    // Concepts a member rule may mention: the seed concept plus whatever the
    // seed rules themselves already involve.
    std::set<int> allowed{zi};
    for (int s : seeds)
      for (int c : rule_concepts[static_cast<std::size_t>(s)]) allowed.insert(c);
    auto admissible = [&](int rule) {
      for (int c : rule_concepts[static_cast<std::size_t>(rule)])
        if (!allowed.count(c)) return false;
      return true;
    };

    // Scoped target relevance: a rule helps derive y within this cluster only
    // if a target-headed rule is reachable from it through admissible rules
    // (derivation paths gated on foreign concepts do not count).
    std::vector<bool> scoped_relevant(static_cast<std::size_t>(n), false);
    {
      std::vector<int> stack;
      for (int r = 0; r < n; ++r) {
        if (kb.rule(r).head.key() == kb.target() && admissible(r)) {
          scoped_relevant[static_cast<std::size_t>(r)] = true;
          stack.push_back(r);
        }
      }
      while (!stack.empty()) {
        int cur = stack.back();
        stack.pop_back();
        for (int pred : g.predecessors[static_cast<std::size_t>(cur)]) {
          if (!scoped_relevant[static_cast<std::size_t>(pred)] && admissible(pred)) {
            scoped_relevant[static_cast<std::size_t>(pred)] = true;
            stack.push_back(pred);
          }
        }
      }
    }

    std::vector<bool> in_cluster(static_cast<std::size_t>(n), false);
    std::vector<int> work = seeds;
    for (int s : seeds) in_cluster[static_cast<std::size_t>(s)] = true;
    while (!work.empty()) {
      int cur = work.back();
      work.pop_back();
      // Forward: rules that consume this rule's conclusions on the way to y.
      for (int next : g.successors[static_cast<std::size_t>(cur)]) {
        if (!in_cluster[static_cast<std::size_t>(next)] &&
            scoped_relevant[static_cast<std::size_t>(next)]) {
          in_cluster[static_cast<std::size_t>(next)] = true;
          work.push_back(next);
        }
      }
      // Backward: rules defining the intermediate predicates this rule uses.
      for (int def : g.predecessors[static_cast<std::size_t>(cur)]) {
        if (!in_cluster[static_cast<std::size_t>(def)] && admissible(def)) {
          in_cluster[static_cast<std::size_t>(def)] = true;
          work.push_back(def);
        }
      }
    }

    Cluster c;
    c.seed_concepts = {zi};
    for (int i = 0; i < n; ++i)
      if (in_cluster[static_cast<std::size_t>(i)]) c.rule_ids.push_back(i);
    std::vector<int> domain;
    for (int i : c.rule_ids)
      for (int cc : rule_concepts[static_cast<std::size_t>(i)]) domain.push_back(cc);
    c.concept_domain = sorted_unique(std::move(domain));
    out.push_back(std::move(c));
  }
  return out;
}

namespace {

std::string min_concept_name(const KnowledgeBase& kb, const Cluster& c) {
  std::string best;
  for (int ci : c.concept_domain) {
    const std::string& name = kb.concepts()[static_cast<std::size_t>(ci)].name;
    if (best.empty() || name < best) best = name;
  }
  return best;
}

}  // namespace

std::vector<Cluster> merge_and_order(const KnowledgeBase& kb, std::vector<Cluster> clusters,
                                     const DependencyGraph& g) {
  // Merge clusters with identical rule sets.
  std::vector<Cluster> merged;
  for (Cluster& c : clusters) {
    bool absorbed = false;
    for (Cluster& m : merged) {
      if (m.rule_ids == c.rule_ids) {
        m.seed_concepts = sorted_unique([&] {
          std::vector<int> s = m.seed_concepts;
          s.insert(s.end(), c.seed_concepts.begin(), c.seed_concepts.end());
          return s;
        }());
        absorbed = true;
        break;
      }
    }
    if (!absorbed) merged.push_back(std::move(c));
  }

  const int k = static_cast<int>(merged.size());
  std::vector<std::vector<int>> member_of(static_cast<std::size_t>(g.node_count));
  for (int a = 0; a < k; ++a)
    for (int r : merged[static_cast<std::size_t>(a)].rule_ids)
      member_of[static_cast<std::size_t>(r)].push_back(a);

  // Cluster-level dependencies: an edge r_i -> r_j crossing from C_a into C_b
  // makes C_b rely on conclusions from C_a.
  std::vector<std::set<int>> depends(static_cast<std::size_t>(k));  // b -> set of a with a -> b
  for (auto [i, j] : g.edges()) {
    for (int a : member_of[static_cast<std::size_t>(i)])
      for (int b : member_of[static_cast<std::size_t>(j)])
        if (a != b) depends[static_cast<std::size_t>(b)].insert(a);
  }

  // Resolve bidirectional dependencies: the smaller cluster goes first
  // (ties on the lexicographically smallest concept name).
  auto precedes_on_tie = [&](int a, int b) {
    const auto& ca = merged[static_cast<std::size_t>(a)];
    const auto& cb = merged[static_cast<std::size_t>(b)];
    if (ca.rule_ids.size() != cb.rule_ids.size())
      return ca.rule_ids.size() < cb.rule_ids.size();
    return min_concept_name(kb, ca) < min_concept_name(kb, cb);
  };
  for (int a = 0; a < k; ++a) {
    for (int b = a + 1; b < k; ++b) {
      bool ab = depends[static_cast<std::size_t>(b)].count(a) > 0;
      bool ba = depends[static_cast<std::size_t>(a)].count(b) > 0;
      if (ab && ba) {
        if (precedes_on_tie(a, b))
          depends[static_cast<std::size_t>(a)].erase(b);
        else
          depends[static_cast<std::size_t>(b)].erase(a);
      }
    }
  }

  // Deterministic topological order; unordered choices resolved by
  // (rule count, lexicographic concept name). If resolution left a cycle the
  // smallest blocked cluster is placed anyway, which keeps the order total.
  std::vector<bool> placed(static_cast<std::size_t>(k), false);
  std::vector<Cluster> out;
  for (int step = 0; step < k; ++step) {
    int best = -1;
    bool best_ready = false;
    for (int c = 0; c < k; ++c) {
      if (placed[static_cast<std::size_t>(c)]) continue;
      bool ready = true;
      for (int dep : depends[static_cast<std::size_t>(c)])
        if (!placed[static_cast<std::size_t>(dep)]) ready = false;
      if (best == -1) {
        best = c;
        best_ready = ready;
      } else if (ready != best_ready) {
        if (ready) {
          best = c;
          best_ready = true;
        }
      } else if (precedes_on_tie(c, best)) {
        best = c;
      }
    }
    placed[static_cast<std::size_t>(best)] = true;
    out.push_back(merged[static_cast<std::size_t>(best)]);
  }
  return out;
}

Curriculum assemble_subbases(const KnowledgeBase& kb, const std::vector<Cluster>& ordered,
                             std::optional<int> tau) {
  if (kb.concepts().empty()) throw KbError("cannot partition: empty concept set");
  if (tau && *tau > static_cast<int>(kb.concepts().size()))
    throw KbError("tau (" + std::to_string(*tau) + ") exceeds the number of concept labels (" +
                  std::to_string(kb.concepts().size()) + ")");
  if (tau && *tau < 1) throw KbError("tau must be positive");

  Curriculum cur;
  std::set<int> acc_rules;
  std::set<int> acc_concepts;

  std::size_t i = 0;
  while (i < ordered.size()) {
    std::set<int> group_rules;
    std::set<int> group_new;
    // Grow the group until it introduces at least tau new concept labels or
    // clusters run out (the final phase is exempt from the minimum).
    while (i < ordered.size()) {
      const Cluster& c = ordered[i];
      group_rules.insert(c.rule_ids.begin(), c.rule_ids.end());
      for (int z : c.concept_domain)
        if (!acc_concepts.count(z)) group_new.insert(z);
      ++i;
      if (!tau || static_cast<int>(group_new.size()) >= *tau) break;
    }
    Phase p;
    p.new_concepts.assign(group_new.begin(), group_new.end());
    for (int r : group_rules)
      if (!acc_rules.count(r)) p.new_rules.push_back(r);

    acc_rules.insert(group_rules.begin(), group_rules.end());
    acc_concepts.insert(group_new.begin(), group_new.end());
    p.domain.assign(acc_concepts.begin(), acc_concepts.end());
    p.sub_base = KbView::subset(kb, std::vector<int>(acc_rules.begin(), acc_rules.end()));
    cur.phases.push_back(std::move(p));
  }

  // Rules outside every cluster (dead code off all concept chains) join the
  // final sub-base so that rules(KB_P) = rules(KB).
  std::vector<int> leftovers;
  for (int r = 0; r < kb.rule_count(); ++r)
    if (!acc_rules.count(r)) leftovers.push_back(r);
  if (!leftovers.empty() && !cur.phases.empty()) {
    Phase& last = cur.phases.back();
    for (int r : leftovers) {
      acc_rules.insert(r);
      last.new_rules.push_back(r);
    }
    std::sort(last.new_rules.begin(), last.new_rules.end());
    last.sub_base = KbView::subset(kb, std::vector<int>(acc_rules.begin(), acc_rules.end()));
  }
  return cur;
}

Curriculum partition(const KnowledgeBase& kb, std::optional<int> tau) {
  auto t0 = std::chrono::steady_clock::now();
  DependencyGraph g = build_dependency_graph(kb);
  std::vector<Cluster> ordered = merge_and_order(kb, initial_clusters(kb, g), g);
  Curriculum cur = assemble_subbases(kb, ordered, tau);
  auto t1 = std::chrono::steady_clock::now();
  cur.partition_wall_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
  return cur;
}

std::string curriculum_summary(const KnowledgeBase& kb, const Curriculum& c) {
  std::ostringstream os;
  for (std::size_t p = 0; p < c.phases.size(); ++p) {
    const Phase& ph = c.phases[p];
    os << "phase " << (p + 1) << ": +{";
    for (std::size_t j = 0; j < ph.new_concepts.size(); ++j) {
      if (j) os << ',';
      os << kb.concepts()[static_cast<std::size_t>(ph.new_concepts[j])].name;
    }
    os << "} rules=" << ph.sub_base.rule_count() << " |Z_" << (p + 1)
       << "|=" << ph.domain.size() << '\n';
  }
  return os.str();
}

std::string to_dot(const KnowledgeBase& kb, const DependencyGraph& g, const Curriculum& c) {
  std::ostringstream os;
  os << "digraph dependency_graph {\n  rankdir=LR;\n  node [shape=box];\n";
  for (std::size_t p = 0; p < c.phases.size(); ++p) {
    os << "  subgraph cluster_phase" << (p + 1) << " {\n    label=\"phase " << (p + 1)
       << "\";\n";
    for (int r : c.phases[p].new_rules)
      os << "    r" << r << " [label=\"" << kb.rule(r).head.to_string() << "\"];\n";
    os << "  }\n";
  }
  for (auto [i, j] : g.edges()) os << "  r" << i << " -> r" << j << ";\n";
  os << "}\n";
  return os.str();
}

}  // namespace cabl::curriculum
