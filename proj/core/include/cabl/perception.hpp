#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "cabl/tasks.hpp"

namespace cabl::perception {

using tasks::ExampleContext;
using tasks::Task;
using logic::TargetValue;

/// Synthetic feature generator replacing image perception: class means sit at
/// the vertices of a regular simplex (pairwise distance = class_separation)
/// and features are the class mean plus isotropic Gaussian noise. Generation
/// is a pure function of the spec: identical specs give identical bytes.
struct SyntheticDatasetSpec {
  int num_classes = 10;
  int feature_dim = 16;
  double class_separation = 5.0;
  double noise_sigma = 1.0;
  std::uint64_t seed = 0;
  int train_size = 8000;
  int val_size = 200;
};

/// One training sequence: m feature vectors, the target label, and the true
/// concepts. True concepts are held out -- they drive data scheduling and
/// phase-gate validation, never gradients.
struct Example {
  std::vector<std::vector<double>> features;
  TargetValue target;
  std::vector<int> true_concepts;
  ExampleContext context;
};

/// Per-position multinomial logistic regression f: X -> Z. predict is
/// read-only and may run concurrently; train_step needs exclusive access.
class PerceptionModel {
 public:
  PerceptionModel(int num_classes, int feature_dim);
  static PerceptionModel random_init(int num_classes, int feature_dim, std::uint64_t seed,
                                     double scale = 0.01);

  int num_classes() const { return num_classes_; }
  int feature_dim() const { return feature_dim_; }

  /// softmax(W x + b); entries are finite, nonnegative, and sum to 1.
  std::vector<double> predict(std::span<const double> x) const;
  int predict_argmax(std::span<const double> x) const;

  /// One full-batch gradient step on mean cross-entropy against the pseudo
  /// labels. Returns the pre-step loss. Throws TrainingAbort on a non-finite
  /// loss.
  double train_step(const std::vector<std::pair<std::span<const double>, int>>& batch,
                    double learning_rate);

  const std::vector<double>& weights() const { return weights_; }
  const std::vector<double>& bias() const { return bias_; }
  /// Replaces the parameters (sizes must match the model shape).
  void set_parameters(std::vector<double> weights, std::vector<double> bias);

 private:
  int num_classes_;
  int feature_dim_;
  std::vector<double> weights_;  // row-major [class][dim]
  std::vector<double> bias_;
};

struct TrainingAbort : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Class mean vectors for a dataset spec (centered regular simplex).
std::vector<std::vector<double>> class_means(const SyntheticDatasetSpec& spec);

/// Generates disjoint train and validation sets whose targets come from the
/// task's knowledge base.
std::pair<std::vector<Example>, std::vector<Example>> generate_dataset(
    const SyntheticDatasetSpec& spec, const Task& task);

/// Per-label validation accuracy (correct argmax / occurrences). Every label
/// must occur at least once; otherwise throws.
std::map<int, double> eval_concept_accuracy(const PerceptionModel& model,
                                            const std::vector<Example>& validation);

/// Dataset CSV: one row per position (example_id, position, true_label,
/// f0..f{dim-1}); the sidecar holds (example_id, target).
void write_dataset_csv(const std::string& features_path, const std::string& targets_path,
                       const std::vector<Example>& examples);
std::vector<Example> read_dataset_csv(const std::string& features_path,
                                      const std::string& targets_path, bool boolean_target);

}  // namespace cabl::perception
