#include "cabl/perception.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "cabl/rng.hpp"

namespace cabl::perception {

PerceptionModel::PerceptionModel(int num_classes, int feature_dim)
    : num_classes_(num_classes),
      feature_dim_(feature_dim),
      weights_(static_cast<std::size_t>(num_classes) * static_cast<std::size_t>(feature_dim),
               0.0),
      bias_(static_cast<std::size_t>(num_classes), 0.0) {}

PerceptionModel PerceptionModel::random_init(int num_classes, int feature_dim,
                                             std::uint64_t seed, double scale) {
  PerceptionModel m(num_classes, feature_dim);
  Rng rng = Rng::substream(seed, "model-init");
  for (double& w : m.weights_) w = scale * rng.gaussian();
  for (double& b : m.bias_) b = scale * rng.gaussian();
  return m;
}

void PerceptionModel::set_parameters(std::vector<double> weights, std::vector<double> bias) {
  if (weights.size() != weights_.size() || bias.size() != bias_.size())
    throw TrainingAbort("parameter shapes do not match the model");
  weights_ = std::move(weights);
  bias_ = std::move(bias);
}

std::vector<double> PerceptionModel::predict(std::span<const double> x) const {
  if (static_cast<int>(x.size()) != feature_dim_)
    throw TrainingAbort("feature vector has dimension " + std::to_string(x.size()) +
                        ", expected " + std::to_string(feature_dim_));
  std::vector<double> logits(static_cast<std::size_t>(num_classes_));
  for (int c = 0; c < num_classes_; ++c) {
    const double* row = weights_.data() + static_cast<std::size_t>(c) *
                                              static_cast<std::size_t>(feature_dim_);
    double v = bias_[static_cast<std::size_t>(c)];
    for (int j = 0; j < feature_dim_; ++j) v += row[j] * x[static_cast<std::size_t>(j)];
    logits[static_cast<std::size_t>(c)] = v;
  }
  double mx = *std::max_element(logits.begin(), logits.end());
  double sum = 0.0;
  for (double& v : logits) {
    v = std::exp(v - mx);
    sum += v;
  }
  for (double& v : logits) v /= sum;
  return logits;
}

int PerceptionModel::predict_argmax(std::span<const double> x) const {
  std::vector<double> p = predict(x);
  // Ties resolve to the lowest label index.
  return static_cast<int>(std::max_element(p.begin(), p.end()) - p.begin());
}

double PerceptionModel::train_step(
    const std::vector<std::pair<std::span<const double>, int>>& batch, double learning_rate) {
  if (batch.empty()) throw TrainingAbort("train_step needs a nonempty batch");

  std::vector<double> grad_w(weights_.size(), 0.0);
  std::vector<double> grad_b(bias_.size(), 0.0);
  double loss = 0.0;
  const double inv_n = 1.0 / static_cast<double>(batch.size());

  for (const auto& [x, label] : batch) {
    std::vector<double> p = predict(x);
    loss -= std::log(std::max(p[static_cast<std::size_t>(label)], 1e-300)) * inv_n;
    for (int c = 0; c < num_classes_; ++c) {
      double delta =
          (p[static_cast<std::size_t>(c)] - (c == label ? 1.0 : 0.0)) * inv_n;
      grad_b[static_cast<std::size_t>(c)] += delta;
      double* grow = grad_w.data() + static_cast<std::size_t>(c) *
                                         static_cast<std::size_t>(feature_dim_);
      for (int j = 0; j < feature_dim_; ++j) grow[j] += delta * x[static_cast<std::size_t>(j)];
    }
  }
  if (!std::isfinite(loss))
    throw TrainingAbort("non-finite training loss: " + std::to_string(loss));

  for (std::size_t i = 0; i < weights_.size(); ++i) weights_[i] -= learning_rate * grad_w[i];
  for (std::size_t i = 0; i < bias_.size(); ++i) bias_[i] -= learning_rate * grad_b[i];
  return loss;
}

std::vector<std::vector<double>> class_means(const SyntheticDatasetSpec& spec) {
  if (spec.feature_dim < spec.num_classes)
    throw TrainingAbort("feature_dim must be >= num_classes for the simplex construction");
  // Scaled standard-basis vertices are mutually equidistant; centering keeps
  // the distances and removes the common offset.
  const double a = spec.class_separation / std::sqrt(2.0);
  std::vector<std::vector<double>> means(
      static_cast<std::size_t>(spec.num_classes),
      std::vector<double>(static_cast<std::size_t>(spec.feature_dim), 0.0));
  for (int c = 0; c < spec.num_classes; ++c)
    means[static_cast<std::size_t>(c)][static_cast<std::size_t>(c)] = a;
  const double shift = a / static_cast<double>(spec.num_classes);
  for (auto& m : means)
    for (int c = 0; c < spec.num_classes; ++c) m[static_cast<std::size_t>(c)] -= shift;
  return means;
}

namespace {

std::vector<Example> generate_split(const SyntheticDatasetSpec& spec, const Task& task,
                                    int count, Rng& labels_rng, Rng& noise_rng,
                                    Rng& board_rng,
                                    const std::vector<std::vector<double>>& means) {
  std::vector<Example> out;
  out.reserve(static_cast<std::size_t>(count));
  const int m = task.seq_len();
  for (int e = 0; e < count; ++e) {
    Example ex;
    ex.context = task.sample_context(board_rng);
    ex.true_concepts.resize(static_cast<std::size_t>(m));
    ex.features.resize(static_cast<std::size_t>(m));
    for (int i = 0; i < m; ++i) {
      int label = labels_rng.uniform_int(0, spec.num_classes - 1);
      ex.true_concepts[static_cast<std::size_t>(i)] = label;
      std::vector<double> f = means[static_cast<std::size_t>(label)];
      for (double& v : f) v += spec.noise_sigma * noise_rng.gaussian();
      ex.features[static_cast<std::size_t>(i)] = std::move(f);
    }
    ex.target = task.true_target(ex.true_concepts, ex.context);
    out.push_back(std::move(ex));
  }
  return out;
}

}  // namespace

std::pair<std::vector<Example>, std::vector<Example>> generate_dataset(
    const SyntheticDatasetSpec& spec, const Task& task) {
  if (spec.num_classes != task.num_labels())
    throw TrainingAbort("dataset spec num_classes does not match the task's concept count");
  std::vector<std::vector<double>> means = class_means(spec);

  Rng train_labels = Rng::substream(spec.seed, "train-labels");
  Rng train_noise = Rng::substream(spec.seed, "train-noise");
  Rng train_board = Rng::substream(spec.seed, "train-board");
  Rng val_labels = Rng::substream(spec.seed, "val-labels");
  Rng val_noise = Rng::substream(spec.seed, "val-noise");
  Rng val_board = Rng::substream(spec.seed, "val-board");

  auto train =
      generate_split(spec, task, spec.train_size, train_labels, train_noise, train_board, means);
  auto val =
      generate_split(spec, task, spec.val_size, val_labels, val_noise, val_board, means);
  return {std::move(train), std::move(val)};
}

std::map<int, double> eval_concept_accuracy(const PerceptionModel& model,
                                            const std::vector<Example>& validation) {
  std::map<int, long> seen;
  std::map<int, long> correct;
  for (const Example& ex : validation) {
    for (std::size_t i = 0; i < ex.features.size(); ++i) {
      int truth = ex.true_concepts[i];
      ++seen[truth];
      if (model.predict_argmax(ex.features[i]) == truth) ++correct[truth];
    }
  }
  std::map<int, double> acc;
  for (int c = 0; c < model.num_classes(); ++c) {
    auto it = seen.find(c);
    if (it == seen.end() || it->second == 0)
      throw TrainingAbort("label " + std::to_string(c) +
                          " has no validation occurrences; enlarge the validation set");
    acc[c] = static_cast<double>(correct[c]) / static_cast<double>(it->second);
  }
  return acc;
}

void write_dataset_csv(const std::string& features_path, const std::string& targets_path,
                       const std::vector<Example>& examples) {
  std::ofstream f(features_path);
  std::ofstream t(targets_path);
  if (!f || !t) throw TrainingAbort("cannot open dataset files for writing");
  f.precision(17);
  const int dim = examples.empty() ? 0 : static_cast<int>(examples[0].features[0].size());
  f << "example_id,position,true_label";
  for (int j = 0; j < dim; ++j) f << ",f" << j;
  f << '\n';
  t << "example_id,target\n";
  for (std::size_t e = 0; e < examples.size(); ++e) {
    const Example& ex = examples[e];
    for (std::size_t i = 0; i < ex.features.size(); ++i) {
      f << e << ',' << i << ',' << ex.true_concepts[i];
      for (double v : ex.features[i]) f << ',' << v;
      f << '\n';
    }
    t << e << ',' << logic::target_to_string(ex.target) << '\n';
  }
}

std::vector<Example> read_dataset_csv(const std::string& features_path,
                                      const std::string& targets_path, bool boolean_target) {
  std::ifstream f(features_path);
  std::ifstream t(targets_path);
  if (!f || !t) throw TrainingAbort("cannot open dataset files for reading");

  std::vector<Example> out;
  std::string line;
  std::getline(f, line);  // header
  while (std::getline(f, line)) {
    if (line.empty()) continue;
    std::istringstream is(line);
    std::string cell;
    std::getline(is, cell, ',');
    std::size_t id = std::stoul(cell);
    std::getline(is, cell, ',');  // position (rows arrive in order)
    std::getline(is, cell, ',');
    int label = std::stoi(cell);
    std::vector<double> feats;
    while (std::getline(is, cell, ',')) feats.push_back(std::stod(cell));
    if (out.size() <= id) out.resize(id + 1);
    out[id].true_concepts.push_back(label);
    out[id].features.push_back(std::move(feats));
  }
  std::getline(t, line);  // header
  while (std::getline(t, line)) {
    if (line.empty()) continue;
    std::istringstream is(line);
    std::string cell;
    std::getline(is, cell, ',');
    std::size_t id = std::stoul(cell);
    std::getline(is, cell, ',');
    if (id < out.size()) {
      if (boolean_target)
        out[id].target = TargetValue{cell == "true"};
      else
        out[id].target = TargetValue{static_cast<std::int64_t>(std::stoll(cell))};
    }
  }
  return out;
}

}  // namespace cabl::perception
