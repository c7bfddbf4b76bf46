#pragma once

#include <memory>
#include <string>
#include <vector>

#include "cabl/abduction.hpp"
#include "cabl/kb.hpp"
#include "cabl/rng.hpp"
#include "cabl/solver.hpp"

namespace cabl::tasks {

using abduction::AbductionSpace;
using abduction::LabelSeq;
using abduction::TaskOracle;
using logic::KnowledgeBase;
using logic::QueryTemplate;
using logic::Rule;
using logic::TargetValue;

struct AdditionTaskSpec {
  int base = 10;  // 10 or 16
  int digits = 1; // digits per operand; the input has m = 2*digits positions
};

struct ChessTaskSpec {
  int board_size = 8;
  int piece_count = 2;
};

/// Per-example ground inputs beyond the features: chess piece coordinates.
/// Empty for addition.
struct ExampleContext {
  std::vector<std::pair<int, int>> positions;

  bool operator==(const ExampleContext&) const = default;
};

/// A benchmark task: the knowledge base, the query template realizing
/// "z and KB entail y", a fast abduction oracle, and dataset hooks.
class Task {
 public:
  static Task addition(const AdditionTaskSpec& spec);
  static Task chess(const ChessTaskSpec& spec);

  const std::string& name() const { return name_; }
  const KnowledgeBase& kb() const { return *kb_; }
  const std::string& kb_text() const { return kb_text_; }
  const QueryTemplate& query() const { return query_; }
  int seq_len() const { return seq_len_; }
  bool boolean_target() const { return boolean_target_; }
  int num_labels() const { return static_cast<int>(kb_->concepts().size()); }

  bool is_addition() const { return addition_.has_value(); }
  bool is_chess() const { return chess_.has_value(); }
  const AdditionTaskSpec& addition_spec() const { return *addition_; }
  const ChessTaskSpec& chess_spec() const { return *chess_; }

  /// Random ground context for one example (distinct board positions for
  /// chess; empty for addition).
  ExampleContext sample_context(Rng& rng) const;
  /// Context facts injected alongside the label facts when deducing.
  std::vector<Rule> context_facts(const ExampleContext& ctx) const;

  /// The target the knowledge base assigns to a label sequence (through the
  /// solver; boolean tasks read NoProof as false).
  TargetValue true_target(const LabelSeq& labels, const ExampleContext& ctx) const;

  /// Task oracle bound to one example's context.
  std::unique_ptr<TaskOracle> oracle(const ExampleContext& ctx) const;

 private:
  std::string name_;
  std::string kb_text_;
  std::shared_ptr<const KnowledgeBase> kb_;
  QueryTemplate query_;
  int seq_len_ = 0;
  bool boolean_target_ = false;
  std::optional<AdditionTaskSpec> addition_;
  std::optional<ChessTaskSpec> chess_;
};

/// Digit-addition knowledge base text: one digit-mapping rule per concept
/// label plus the shared addition/number rules.
std::string addition_kb_text(const AdditionTaskSpec& spec);

/// Chess-attack knowledge base text (no blocking; pawns capture toward +y).
std::string chess_kb_text();

/// Direct coordinate-arithmetic attack check, independent of the solver.
bool chess_attack_geometry(const std::vector<int>& labels,
                           const std::vector<std::pair<int, int>>& positions);

/// Concept-label names for a base (zero..nine, then ten..fifteen).
std::vector<std::string> digit_names(int base);

}  // namespace cabl::tasks
