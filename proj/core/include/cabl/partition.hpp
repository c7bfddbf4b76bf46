#pragma once

#include <optional>
#include <string>
#include <vector>

#include "cabl/kb.hpp"

namespace cabl::curriculum {

using logic::KbView;
using logic::KnowledgeBase;

/// Rule-level dependency graph: an edge (i, j) means the head predicate of
/// rule i occurs in the body of rule j, so reasoning in j relies on
/// conclusions from i. Self-loops mark recursive rules.
struct DependencyGraph {
  int node_count = 0;
  std::vector<std::vector<int>> successors;    // i -> rules whose bodies use head(i)
  std::vector<std::vector<int>> predecessors;  // j -> rules defining predicates j uses

  bool has_edge(int from, int to) const;
  std::vector<std::pair<int, int>> edges() const;
};

DependencyGraph build_dependency_graph(const KnowledgeBase& kb);

/// A cluster of rules grown around one concept label (Alg. 1 lines 2-4).
struct Cluster {
  std::vector<int> seed_concepts;   // concept indices, ascending
  std::vector<int> rule_ids;        // ascending
  std::vector<int> concept_domain;  // concept indices referenced by the rules, ascending
};

/// One cluster per concept label, in declaration order. A cluster holds the
/// rules referencing the seed concept, their forward closure toward the
/// target predicate, and the backward closure defining intermediate
/// predicates -- staying inside rules whose bodies involve no foreign
/// concept labels (rules gated on other concepts belong to those concepts'
/// clusters). Rules on a dependency cycle are always co-clustered.
std::vector<Cluster> initial_clusters(const KnowledgeBase& kb, const DependencyGraph& g);

/// Merges identical-rule-set clusters and orders the rest: an edge crossing
/// from one cluster into another induces precedence; bidirectional
/// dependencies place the smaller-rule-count cluster first; remaining ties
/// break on the lexicographically smallest concept name in the cluster.
std::vector<Cluster> merge_and_order(const KnowledgeBase& kb, std::vector<Cluster> clusters,
                                     const DependencyGraph& g);

struct Phase {
  KbView sub_base;                 // KB_p (cumulative; shares rule identity with the parent)
  std::vector<int> domain;         // Z_p, concept indices ascending
  std::vector<int> new_concepts;   // Z_p \ Z_{p-1}
  std::vector<int> new_rules;      // rules(KB_p) \ rules(KB_{p-1})
};

/// The nested curriculum KB_1 subset ... subset KB_P with Z_P = Z and
/// rules(KB_P) = rules(KB). Phases keep views into the parent KnowledgeBase,
/// which must outlive the curriculum.
struct Curriculum {
  std::vector<Phase> phases;
  double partition_wall_ms = 0.0;

  int phase_count() const { return static_cast<int>(phases.size()); }
};

/// Folds ordered clusters into sub-bases; clusters contributing fewer than
/// tau new concept labels merge into their successor (the last phase is
/// exempt). Throws KbError when tau exceeds |Z|.
Curriculum assemble_subbases(const KnowledgeBase& kb, const std::vector<Cluster>& ordered,
                             std::optional<int> tau);

/// Full pipeline: dependency graph, clustering, ordering, sub-base assembly.
/// Pure function of (kb, tau); records its own wall-clock time.
Curriculum partition(const KnowledgeBase& kb, std::optional<int> tau);

/// One line per phase: `phase p: +{new concepts} rules=n |Z_p|=k`.
std::string curriculum_summary(const KnowledgeBase& kb, const Curriculum& c);

/// Dependency graph in DOT format; nodes are labelled with rule heads and
/// grouped into subgraphs by the phase that introduces them.
std::string to_dot(const KnowledgeBase& kb, const DependencyGraph& g, const Curriculum& c);

}  // namespace cabl::curriculum
