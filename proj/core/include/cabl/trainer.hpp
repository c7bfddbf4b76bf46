#pragma once

#include <optional>
#include <string>
#include <vector>

#include "cabl/partition.hpp"
#include "cabl/perception.hpp"
#include "cabl/tasks.hpp"

namespace cabl::training {

using perception::Example;
using perception::PerceptionModel;
using perception::SyntheticDatasetSpec;
using tasks::Task;

enum class Method { CAbl, Abl };

std::string method_name(Method m);

struct TrainConfig {
  Method method = Method::CAbl;
  std::optional<int> tau = 2;
  int max_iterations = 2000;
  int gate_check_every = 50;
  int max_iterations_per_phase = 1000;
  double learning_rate = 0.1;
  /// Scale of the random model init; large enough that early consistency
  /// selection varies with the features instead of locking onto a few labels.
  double init_scale = 0.5;
  std::uint64_t seed = 0;
  SyntheticDatasetSpec dataset;
  /// Use the task's abduction oracle (equivalent to, and much faster than,
  /// generic enumeration); generic goes through the solver.
  bool use_oracle_spaces = true;
  /// Count probability-normalization violations after every step.
  bool validate_numerics = false;
  long enumeration_cap = 10'000'000;

  void validate() const;  // throws TrainingAbort on inconsistent settings
};

/// One metrics row. space_mean averages the abduction-space sizes built in
/// the window ending at `iteration`; skipped counts empty-space examples
/// cumulatively.
struct MetricsRecord {
  int iteration = 0;
  int phase = 0;  // 1-based
  double seq_acc = 0.0;
  double mean_acc = 0.0;
  double space_mean = 0.0;
  long skipped = 0;
  long wall_ms = 0;
  std::vector<double> per_label_acc;
};

struct RunReport {
  std::string task_name;
  std::string method;
  std::vector<std::string> labels;
  std::vector<std::pair<std::string, std::string>> config_echo;  // key=value, stable order

  std::vector<MetricsRecord> records;
  std::vector<int> phase_transitions;          // iteration of each transition
  std::vector<bool> forced_transitions;        // parallel to phase_transitions
  std::vector<int> gate_pass_iterations;       // per phase; -1 if the gate never passed
  std::vector<std::vector<int>> phase_new_concepts;  // label ids introduced per phase
  long skipped_empty_spaces = 0;
  long numeric_violations = 0;
  long total_wall_ms = 0;

  bool any_forced() const;
  const MetricsRecord& final_record() const;
  /// First record whose mean accuracy reaches 90% of the final record's.
  int iterations_to_90pct() const;
  const MetricsRecord* record_at(int iteration) const;
};

/// Runs Algorithm-2 style training: per curriculum phase, schedule the data
/// whose concepts fall inside the phase domain, keep model predictions that
/// already entail the target, otherwise abduce and select by consistency,
/// then take one gradient step. Method Abl runs the same loop with the full
/// knowledge base and full data throughout.
RunReport run_training(const Task& task, const TrainConfig& config);

/// Examples whose true concepts all lie inside the domain. Throws
/// TrainingAbort when the subset is empty and `final_phase` is false.
std::vector<const Example*> schedule_data(const std::vector<Example>& dataset,
                                          const std::vector<int>& domain, bool final_phase);

/// True iff every label in the domain beats uniform guessing (strictly).
bool phase_gate(const std::map<int, double>& acc, const std::vector<int>& domain,
                int total_labels);

struct ComparisonSummary {
  std::string task_name;
  struct Side {
    std::string method;
    double final_mean_acc = 0.0;
    int iterations_to_90pct = 0;
    long total_wall_ms = 0;
    /// Per phase: mean over its concepts of (final acc - acc at gate pass).
    std::vector<double> forgetting;
  } a, b;

  std::string to_string() const;
};

/// Side-by-side summary of two runs on the same task. Throws on mismatched
/// tasks or empty reports.
ComparisonSummary compare_runs(const RunReport& a, const RunReport& b);

/// metrics.csv header for a label set (schema is stable; golden-tested).
std::string metrics_csv_header(const std::vector<std::string>& labels);

/// Writes config.txt, metrics.csv and summary.txt into dir (created if
/// needed); read_run_report loads them back for `compare`.
void write_run_report(const std::string& dir, const RunReport& report);
RunReport read_run_report(const std::string& dir);

}  // namespace cabl::training
