#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cabl/partition.hpp"
#include "cabl/solver.hpp"

namespace cabl::check {

using curriculum::Curriculum;
using logic::KnowledgeBase;

struct EntailCheckOptions {
  int samples_per_pair = 200;
  std::uint64_t seed = 0;
  logic::SolveLimits limits;
  /// Ground position constants p1..pk available to sampled facts and queries.
  int max_positions = 4;
};

struct PairResult {
  std::string name;  // "p1-p2" or "p2-full"
  long agree = 0;
  long disagree = 0;
  long indeterminate = 0;
  std::vector<std::string> disagreements;  // rendered query atoms (capped)
};

struct EntailCheckReport {
  std::vector<PairResult> pairs;

  long total_samples() const;
  long total_disagreements() const;
  long total_indeterminate() const;
  bool all_agree() const { return total_disagreements() == 0; }
  std::string to_string() const;
};

/// Samples ground queries over each phase's predicates -- random ground
/// atoms, solver-derived true atoms, and perturbed variants -- under random
/// ground contexts whose concept facts stay inside the phase domain, and
/// checks that entailment agrees between KB_p and KB_{p+1} and between KB_p
/// and the full knowledge base. Indeterminate (budget-limited) outcomes are
/// reported separately, never as disagreement.
EntailCheckReport check_curriculum(const KnowledgeBase& kb, const Curriculum& curriculum,
                                   const EntailCheckOptions& options);

}  // namespace cabl::check
