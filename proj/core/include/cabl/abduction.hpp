#pragma once

#include <map>
#include <stdexcept>
#include <vector>

#include "cabl/solver.hpp"

namespace cabl::abduction {

using logic::KbView;
using logic::QueryTemplate;
using logic::Rule;
using logic::TargetValue;

/// A concept-label sequence, stored as indices into the knowledge base's
/// concept declaration order.
using LabelSeq = std::vector<int>;

/// The abduction space S = { z in domain^m : z and KB entail y }, members in
/// lexicographic label order (declaration order per position).
struct AbductionSpace {
  TargetValue target;
  std::vector<int> domain;  // concept indices, ascending
  int seq_len = 0;
  std::vector<LabelSeq> members;

  std::size_t size() const { return members.size(); }
  bool empty() const { return members.empty(); }
  /// N^m with N = |domain|; every space satisfies size() <= bound().
  double bound() const;
};

/// Per-position probability vectors over the full concept set Z.
struct ConceptDistribution {
  std::vector<std::vector<double>> per_position;
};

struct EnumerationCapExceeded : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct EmptySpaceError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Exact enumeration of domain^m through the solver: every candidate z is
/// checked with deduce(kb, z) = y. Throws EnumerationCapExceeded when
/// |domain|^m exceeds `cap` (callers should use a task oracle instead).
AbductionSpace abduction_space_generic(const KbView& kb, const QueryTemplate& query,
                                       const std::vector<std::string>& label_names,
                                       const TargetValue& y, int m,
                                       const std::vector<int>& domain,
                                       const std::vector<Rule>& context_facts = {},
                                       long cap = 10'000'000,
                                       const logic::SolveLimits& limits = {});

/// Task-specific fast path; must agree member-for-member with the generic
/// enumeration wherever both run.
class TaskOracle {
 public:
  virtual ~TaskOracle() = default;
  virtual AbductionSpace enumerate(const TargetValue& y, int m,
                                   const std::vector<int>& domain) const = 0;
};

AbductionSpace abduction_space_oracle(const TaskOracle& oracle, const TargetValue& y, int m,
                                      const std::vector<int>& domain);

/// Members of `space` agreeing with `fixed` (position -> concept index) at
/// every fixed position. May be empty.
AbductionSpace conditioned_space(const AbductionSpace& space,
                                 const std::map<int, int>& fixed);

/// Eq.-1 consistency: the product of the model's per-position probabilities
/// for z. Zero is allowed.
double consistency_score(const LabelSeq& z, const ConceptDistribution& d);

/// The member maximizing consistency_score; ties break toward the
/// lexicographically smallest member. Throws EmptySpaceError on an empty
/// space (the training example is skipped and counted by the caller).
LabelSeq select_candidate(const AbductionSpace& space, const ConceptDistribution& d);

}  // namespace cabl::abduction
