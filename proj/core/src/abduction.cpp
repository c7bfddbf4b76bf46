#include "cabl/abduction.hpp"

#include <cmath>

namespace cabl::abduction {

double AbductionSpace::bound() const {
  return std::pow(static_cast<double>(domain.size()), seq_len);
}

AbductionSpace abduction_space_generic(const KbView& kb, const QueryTemplate& query,
                                       const std::vector<std::string>& label_names,
                                       const TargetValue& y, int m,
                                       const std::vector<int>& domain,
                                       const std::vector<Rule>& context_facts, long cap,
                                       const logic::SolveLimits& limits) {
  double total = std::pow(static_cast<double>(domain.size()), m);
  if (total > static_cast<double>(cap))
    throw EnumerationCapExceeded("enumeration of " + std::to_string(domain.size()) + "^" +
                                 std::to_string(m) + " candidates exceeds the cap of " +
                                 std::to_string(cap));

  AbductionSpace out;
  out.target = y;
  out.domain = domain;
  out.seq_len = m;
  if (domain.empty() || m <= 0) return out;

  // Odometer over domain positions: counting up in base |domain| yields
  // members in lexicographic label order.
  std::vector<int> idx(static_cast<std::size_t>(m), 0);
  std::vector<std::string> names(static_cast<std::size_t>(m));
  for (;;) {
    LabelSeq z(static_cast<std::size_t>(m));
    for (int i = 0; i < m; ++i) {
      z[static_cast<std::size_t>(i)] = domain[static_cast<std::size_t>(idx[static_cast<std::size_t>(i)])];
      names[static_cast<std::size_t>(i)] =
          label_names[static_cast<std::size_t>(z[static_cast<std::size_t>(i)])];
    }
    std::optional<TargetValue> got = logic::deduce(kb, names, query, context_facts, limits);
    if (got && logic::target_equal(*got, y)) out.members.push_back(std::move(z));

    int pos = m - 1;
    while (pos >= 0) {
      if (++idx[static_cast<std::size_t>(pos)] <
          static_cast<int>(domain.size()))
        break;
      idx[static_cast<std::size_t>(pos)] = 0;
      --pos;
    }
    if (pos < 0) break;
  }
  return out;
}

AbductionSpace abduction_space_oracle(const TaskOracle& oracle, const TargetValue& y, int m,
                                      const std::vector<int>& domain) {
  return oracle.enumerate(y, m, domain);
}

AbductionSpace conditioned_space(const AbductionSpace& space,
                                 const std::map<int, int>& fixed) {
  AbductionSpace out;
  out.target = space.target;
  out.domain = space.domain;
  out.seq_len = space.seq_len;
  for (const LabelSeq& z : space.members) {
    bool ok = true;
    for (const auto& [pos, label] : fixed) {
      if (z[static_cast<std::size_t>(pos)] != label) {
        ok = false;
        break;
      }
    }
    if (ok) out.members.push_back(z);
  }
  return out;
}

double consistency_score(const LabelSeq& z, const ConceptDistribution& d) {
  double score = 1.0;
  for (std::size_t i = 0; i < z.size(); ++i)
    score *= d.per_position[i][static_cast<std::size_t>(z[i])];
  return score;
}

LabelSeq select_candidate(const AbductionSpace& space, const ConceptDistribution& d) {
  if (space.empty())
    throw EmptySpaceError("abduction space for target " +
                          logic::target_to_string(space.target) + " is empty");
  // Members are stored in lexicographic order, so keeping the first strict
  // maximum implements the tie-break.
  std::size_t best = 0;
  double best_score = consistency_score(space.members[0], d);
  for (std::size_t i = 1; i < space.members.size(); ++i) {
    double s = consistency_score(space.members[i], d);
    if (s > best_score) {
      best_score = s;
      best = i;
    }
  }
  return space.members[best];
}

}  // namespace cabl::abduction
