#include "cabl/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <unordered_map>

#include "cabl/abduction.hpp"

namespace cabl::training {

using abduction::AbductionSpace;
using abduction::ConceptDistribution;
using perception::TrainingAbort;

std::string method_name(Method m) { return m == Method::CAbl ? "cabl" : "abl"; }

void TrainConfig::validate() const {
  if (max_iterations < 1 || gate_check_every < 1 || max_iterations_per_phase < 1)
    throw TrainingAbort("iteration counts must be positive");
  if (gate_check_every > max_iterations_per_phase)
    throw TrainingAbort("gateCheckEvery must not exceed maxIterationsPerPhase");
  if (max_iterations_per_phase > max_iterations)
    throw TrainingAbort("maxIterationsPerPhase must not exceed maxIterations");
  if (learning_rate <= 0.0) throw TrainingAbort("learning rate must be positive");
}

bool RunReport::any_forced() const {
  return std::find(forced_transitions.begin(), forced_transitions.end(), true) !=
         forced_transitions.end();
}

const MetricsRecord& RunReport::final_record() const {
  if (records.empty()) throw TrainingAbort("run report has no metrics records");
  return records.back();
}

int RunReport::iterations_to_90pct() const {
  // First sustained crossing: the earliest record from which the curve never
  // drops below 90% of its final value again. A first-touch rule would be
  // degenerate for oscillating or declining curves.
  double threshold = 0.9 * final_record().mean_acc;
  int candidate = final_record().iteration;
  bool holding = false;
  for (const MetricsRecord& r : records) {
    if (r.mean_acc >= threshold) {
      if (!holding) {
        candidate = r.iteration;
        holding = true;
      }
    } else {
      holding = false;
    }
  }
  return candidate;
}

const MetricsRecord* RunReport::record_at(int iteration) const {
  for (const MetricsRecord& r : records)
    if (r.iteration == iteration) return &r;
  return nullptr;
}

std::vector<const Example*> schedule_data(const std::vector<Example>& dataset,
                                          const std::vector<int>& domain, bool final_phase) {
  if (final_phase) {
    std::vector<const Example*> all;
    all.reserve(dataset.size());
    for (const Example& e : dataset) all.push_back(&e);
    return all;
  }
  std::vector<const Example*> out;
  for (const Example& e : dataset) {
    bool inside = true;
    for (int c : e.true_concepts)
      if (!std::binary_search(domain.begin(), domain.end(), c)) {
        inside = false;
        break;
      }
    if (inside) out.push_back(&e);
  }
  if (out.empty())
    throw TrainingAbort(
        "no training examples fall inside a non-final phase domain; the dataset spec must "
        "guarantee per-phase coverage");
  return out;
}

bool phase_gate(const std::map<int, double>& acc, const std::vector<int>& domain,
                int total_labels) {
  const double baseline = 1.0 / static_cast<double>(total_labels);
  for (int z : domain) {
    auto it = acc.find(z);
    if (it == acc.end())
      throw TrainingAbort("phase gate: accuracy map is missing label " + std::to_string(z));
    if (!(it->second > baseline)) return false;
  }
  return true;
}

namespace {

std::string context_cache_key(const tasks::ExampleContext& ctx) {
  std::string key;
  for (auto [x, y] : ctx.positions) {
    key += std::to_string(x);
    key += ',';
    key += std::to_string(y);
    key += ';';
  }
  return key;
}

/// Builds phase abduction spaces, caching by (phase, target, context).
class SpaceProvider {
 public:
  SpaceProvider(const Task& task, const TrainConfig& config) : task_(task), config_(config) {}

  const AbductionSpace& get(int phase_idx, const logic::KbView& sub_base,
                            const std::vector<int>& domain, const logic::TargetValue& y,
                            const tasks::ExampleContext& ctx) {
    std::string key = std::to_string(phase_idx) + '|' + logic::target_to_string(y) + '|' +
                      context_cache_key(ctx);
    auto it = cache_.find(key);
    if (it != cache_.end()) return it->second;

    AbductionSpace space;
    if (config_.use_oracle_spaces) {
      space = task_.oracle(ctx)->enumerate(y, task_.seq_len(), domain);
    } else {
      space = abduction::abduction_space_generic(
          sub_base, task_.query(), label_names(), y, task_.seq_len(), domain,
          task_.context_facts(ctx), config_.enumeration_cap);
    }
    return cache_.emplace(std::move(key), std::move(space)).first->second;
  }

 private:
  const std::vector<std::string>& label_names() {
    if (names_.empty()) names_ = task_.kb().concept_names();
    return names_;
  }

  const Task& task_;
  const TrainConfig& config_;
  std::vector<std::string> names_;
  std::unordered_map<std::string, AbductionSpace> cache_;
};

std::vector<std::pair<std::string, std::string>> echo_config(const Task& task,
                                                             const TrainConfig& c) {
  std::vector<std::pair<std::string, std::string>> out;
  out.emplace_back("task", task.name());
  if (task.is_addition()) {
    out.emplace_back("base", std::to_string(task.addition_spec().base));
    out.emplace_back("digits", std::to_string(task.addition_spec().digits));
  } else {
    out.emplace_back("board", std::to_string(task.chess_spec().board_size));
    out.emplace_back("pieces", std::to_string(task.chess_spec().piece_count));
  }
  out.emplace_back("method", method_name(c.method));
  out.emplace_back("tau", c.tau ? std::to_string(*c.tau) : "none");
  out.emplace_back("iters", std::to_string(c.max_iterations));
  out.emplace_back("gate_check_every", std::to_string(c.gate_check_every));
  out.emplace_back("max_iterations_per_phase", std::to_string(c.max_iterations_per_phase));
  out.emplace_back("learning_rate", std::to_string(c.learning_rate));
  out.emplace_back("init_scale", std::to_string(c.init_scale));
  out.emplace_back("seed", std::to_string(c.seed));
  out.emplace_back("train_size", std::to_string(c.dataset.train_size));
  out.emplace_back("val_size", std::to_string(c.dataset.val_size));
  out.emplace_back("feature_dim", std::to_string(c.dataset.feature_dim));
  out.emplace_back("class_separation", std::to_string(c.dataset.class_separation));
  out.emplace_back("noise_sigma", std::to_string(c.dataset.noise_sigma));
  out.emplace_back("abduction", c.use_oracle_spaces ? "oracle" : "generic");
  out.emplace_back("validate_numerics", c.validate_numerics ? "1" : "0");
  return out;
}

}  // namespace

RunReport run_training(const Task& task, const TrainConfig& config_in) {
  TrainConfig config = config_in;
  config.dataset.num_classes = task.num_labels();
  config.dataset.seed = config.seed;
  config.validate();

  auto run_start = std::chrono::steady_clock::now();
  auto wall_ms = [&run_start] {
    return static_cast<long>(std::chrono::duration_cast<std::chrono::milliseconds>(
                                 std::chrono::steady_clock::now() - run_start)
                                 .count());
  };

  // Phase plan: the curriculum for cabl, one full-KB phase for abl.
  curriculum::Curriculum plan;
  if (config.method == Method::CAbl) {
    plan = curriculum::partition(task.kb(), config.tau);
  } else {
    curriculum::Phase full;
    full.sub_base = logic::KbView::full(task.kb());
    for (int c = 0; c < task.num_labels(); ++c) full.domain.push_back(c);
    full.new_concepts = full.domain;
    full.new_rules = full.sub_base.rule_ids();
    plan.phases.push_back(std::move(full));
  }
  const int num_phases = plan.phase_count();
  const int total_labels = task.num_labels();

  auto [train, validation] = perception::generate_dataset(config.dataset, task);
  PerceptionModel model =
      PerceptionModel::random_init(total_labels, config.dataset.feature_dim, config.seed,
                                   config.init_scale);
  SpaceProvider spaces(task, config);

  RunReport report;
  report.task_name = task.name();
  report.method = method_name(config.method);
  report.labels = task.kb().concept_names();
  report.config_echo = echo_config(task, config);
  report.gate_pass_iterations.assign(static_cast<std::size_t>(num_phases), -1);
  for (const curriculum::Phase& p : plan.phases) report.phase_new_concepts.push_back(p.new_concepts);

  const int m = task.seq_len();
  int iteration = 0;
  int active_phase = 0;
  long window_space_total = 0;
  long window_space_count = 0;

  auto evaluate = [&](int phase_idx) {
    std::map<int, double> acc = eval_concept_accuracy(model, validation);
    MetricsRecord rec;
    rec.iteration = iteration;
    rec.phase = phase_idx + 1;
    rec.skipped = report.skipped_empty_spaces;
    rec.wall_ms = wall_ms();
    rec.space_mean = window_space_count
                         ? static_cast<double>(window_space_total) /
                               static_cast<double>(window_space_count)
                         : 0.0;
    window_space_total = 0;
    window_space_count = 0;
    double mean = 0.0;
    rec.per_label_acc.resize(static_cast<std::size_t>(total_labels), 0.0);
    for (const auto& [label, a] : acc) {
      rec.per_label_acc[static_cast<std::size_t>(label)] = a;
      mean += a;
    }
    rec.mean_acc = mean / static_cast<double>(total_labels);
    long full_correct = 0;
    for (const Example& ex : validation) {
      bool all = true;
      for (std::size_t i = 0; i < ex.features.size(); ++i)
        if (model.predict_argmax(ex.features[i]) != ex.true_concepts[i]) {
          all = false;
          break;
        }
      if (all) ++full_correct;
    }
    rec.seq_acc = static_cast<double>(full_correct) / static_cast<double>(validation.size());
    report.records.push_back(rec);
    return acc;
  };

  for (int phase_idx = 0; phase_idx < num_phases && iteration < config.max_iterations;
       ++phase_idx) {
    active_phase = phase_idx;
    const curriculum::Phase& phase = plan.phases[static_cast<std::size_t>(phase_idx)];
    const bool final_phase = phase_idx == num_phases - 1;
    std::vector<const Example*> scheduled =
        schedule_data(train, phase.domain, final_phase || config.method == Method::Abl);

    std::size_t cursor = 0;
    int iters_in_phase = 0;
    bool advance = false;
    while (!advance && iteration < config.max_iterations) {
      const Example& ex = *scheduled[cursor];
      cursor = (cursor + 1) % scheduled.size();

      // Predict, keep if already consistent with the target, else abduce.
      ConceptDistribution dist;
      dist.per_position.reserve(static_cast<std::size_t>(m));
      std::vector<int> predicted(static_cast<std::size_t>(m));
      for (int i = 0; i < m; ++i) {
        dist.per_position.push_back(model.predict(ex.features[static_cast<std::size_t>(i)]));
        const auto& p = dist.per_position.back();
        predicted[static_cast<std::size_t>(i)] =
            static_cast<int>(std::max_element(p.begin(), p.end()) - p.begin());
      }

      std::vector<std::string> names(static_cast<std::size_t>(m));
      for (int i = 0; i < m; ++i)
        names[static_cast<std::size_t>(i)] =
            report.labels[static_cast<std::size_t>(predicted[static_cast<std::size_t>(i)])];
      std::optional<logic::TargetValue> deduced;
      try {
        deduced = logic::deduce(phase.sub_base, names, task.query(),
                                task.context_facts(ex.context));
      } catch (const logic::DepthExceededError&) {
        deduced = std::nullopt;
      }

      std::vector<int> pseudo;
      if (deduced && logic::target_equal(*deduced, ex.target)) {
        pseudo = predicted;
      } else {
        const AbductionSpace& space =
            spaces.get(phase_idx, phase.sub_base, phase.domain, ex.target, ex.context);
        window_space_total += static_cast<long>(space.size());
        ++window_space_count;
        if (space.empty()) {
          ++report.skipped_empty_spaces;  // skipped, but still consumes the iteration
        } else {
          pseudo = abduction::select_candidate(space, dist);
        }
      }

      if (!pseudo.empty()) {
        std::vector<std::pair<std::span<const double>, int>> batch;
        batch.reserve(static_cast<std::size_t>(m));
        for (int i = 0; i < m; ++i)
          batch.emplace_back(ex.features[static_cast<std::size_t>(i)],
                             pseudo[static_cast<std::size_t>(i)]);
        model.train_step(batch, config.learning_rate);
        if (config.validate_numerics) {
          for (int i = 0; i < m; ++i) {
            std::vector<double> p = model.predict(ex.features[static_cast<std::size_t>(i)]);
            double sum = 0.0;
            bool finite = true;
            for (double v : p) {
              sum += v;
              finite = finite && std::isfinite(v) && v >= 0.0;
            }
            if (!finite || std::abs(sum - 1.0) > 1e-9) ++report.numeric_violations;
          }
        }
      }
      ++iteration;
      ++iters_in_phase;

      if (iteration % config.gate_check_every == 0) {
        std::map<int, double> acc = evaluate(phase_idx);
        bool gate = phase_gate(acc, phase.domain, total_labels);
        if (gate &&
            report.gate_pass_iterations[static_cast<std::size_t>(phase_idx)] < 0)
          report.gate_pass_iterations[static_cast<std::size_t>(phase_idx)] = iteration;
        if (!final_phase && config.method == Method::CAbl) {
          if (gate) {
            report.phase_transitions.push_back(iteration);
            report.forced_transitions.push_back(false);
            advance = true;
          } else if (iters_in_phase >= config.max_iterations_per_phase) {
            report.phase_transitions.push_back(iteration);
            report.forced_transitions.push_back(true);
            advance = true;
          }
        }
      }
    }
  }

  // Ensure the report always carries a final record at the last iteration.
  if (report.records.empty() || report.records.back().iteration != iteration)
    evaluate(active_phase);
  report.total_wall_ms = wall_ms();
  return report;
}

ComparisonSummary compare_runs(const RunReport& a, const RunReport& b) {
  if (a.task_name != b.task_name)
    throw TrainingAbort("compare_runs: mismatched tasks (" + a.task_name + " vs " +
                        b.task_name + ")");
  if (a.records.empty() || b.records.empty())
    throw TrainingAbort("compare_runs: a report has zero records");

  ComparisonSummary out;
  out.task_name = a.task_name;
  auto fill = [](const RunReport& r, ComparisonSummary::Side& side) {
    side.method = r.method;
    side.final_mean_acc = r.final_record().mean_acc;
    side.iterations_to_90pct = r.iterations_to_90pct();
    side.total_wall_ms = r.total_wall_ms;
    for (std::size_t p = 0; p < r.phase_new_concepts.size(); ++p) {
      int gate_iter = p < r.gate_pass_iterations.size() ? r.gate_pass_iterations[p] : -1;
      const MetricsRecord* at = gate_iter >= 0 ? r.record_at(gate_iter) : nullptr;
      double delta_sum = 0.0;
      int count = 0;
      if (at) {
        for (int label : r.phase_new_concepts[p]) {
          delta_sum += r.final_record().per_label_acc[static_cast<std::size_t>(label)] -
                       at->per_label_acc[static_cast<std::size_t>(label)];
          ++count;
        }
      }
      side.forgetting.push_back(count ? delta_sum / count : 0.0);
    }
  };
  fill(a, out.a);
  fill(b, out.b);
  return out;
}

std::string ComparisonSummary::to_string() const {
  std::ostringstream os;
  os << "task: " << task_name << '\n';
  os << std::left << std::setw(26) << "metric" << std::setw(14) << a.method << b.method
     << '\n';
  auto row = [&os](const std::string& name, const std::string& va, const std::string& vb) {
    os << std::left << std::setw(26) << name << std::setw(14) << va << vb << '\n';
  };
  std::ostringstream fa, fb;
  fa << std::fixed << std::setprecision(4) << a.final_mean_acc;
  fb << std::fixed << std::setprecision(4) << b.final_mean_acc;
  row("final_mean_concept_acc", fa.str(), fb.str());
  row("iterations_to_90pct", std::to_string(a.iterations_to_90pct),
      std::to_string(b.iterations_to_90pct));
  row("total_wall_ms", std::to_string(a.total_wall_ms), std::to_string(b.total_wall_ms));
  auto forgetting_str = [](const Side& s) {
    std::ostringstream f;
    f << std::fixed << std::setprecision(4);
    for (std::size_t i = 0; i < s.forgetting.size(); ++i) {
      if (i) f << ';';
      f << s.forgetting[i];
    }
    return f.str();
  };
  os << "per_phase_forgetting " << a.method << ": " << forgetting_str(a) << '\n';
  os << "per_phase_forgetting " << b.method << ": " << forgetting_str(b) << '\n';
  return os.str();
}

std::string metrics_csv_header(const std::vector<std::string>& labels) {
  std::string h = "iteration,phase,seq_acc,mean_acc,space_mean,skipped,wall_ms";
  for (const std::string& l : labels) h += ",acc_" + l;
  return h;
}

namespace {

std::string join_ints(const std::vector<int>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(v[i]);
  }
  return out;
}

}  // namespace

void write_run_report(const std::string& dir, const RunReport& report) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);

  {
    std::ofstream cfg(fs::path(dir) / "config.txt");
    for (const auto& [k, v] : report.config_echo) cfg << k << '=' << v << '\n';
  }
  {
    std::ofstream csv(fs::path(dir) / "metrics.csv");
    csv << metrics_csv_header(report.labels) << '\n';
    csv << std::fixed << std::setprecision(6);
    for (const MetricsRecord& r : report.records) {
      csv << r.iteration << ',' << r.phase << ',' << r.seq_acc << ',' << r.mean_acc << ','
          << r.space_mean << ',' << r.skipped << ',' << r.wall_ms;
      for (double a : r.per_label_acc) csv << ',' << a;
      csv << '\n';
    }
  }
  {
    std::ofstream sum(fs::path(dir) / "summary.txt");
    sum << "task: " << report.task_name << '\n';
    sum << "method: " << report.method << '\n';
    sum << "labels: ";
    for (std::size_t i = 0; i < report.labels.size(); ++i)
      sum << (i ? "," : "") << report.labels[i];
    sum << '\n';
    sum << "phases: " << report.phase_new_concepts.size() << '\n';
    for (std::size_t p = 0; p < report.phase_new_concepts.size(); ++p)
      sum << "phase_" << (p + 1) << "_new_concepts: " << join_ints(report.phase_new_concepts[p])
          << '\n';
    sum << "phase_transitions: " << join_ints(report.phase_transitions) << '\n';
    sum << "forced_transitions: ";
    for (std::size_t i = 0; i < report.forced_transitions.size(); ++i)
      sum << (i ? "," : "") << (report.forced_transitions[i] ? 1 : 0);
    sum << '\n';
    sum << "gate_pass_iterations: " << join_ints(report.gate_pass_iterations) << '\n';
    sum << "skipped_empty_spaces: " << report.skipped_empty_spaces << '\n';
    sum << "numeric_violations: " << report.numeric_violations << '\n';
    sum << "total_wall_ms: " << report.total_wall_ms << '\n';
    sum << std::fixed << std::setprecision(6);
    if (!report.records.empty()) {
      sum << "final_mean_acc: " << report.final_record().mean_acc << '\n';
      sum << "final_seq_acc: " << report.final_record().seq_acc << '\n';
    }
  }
}

namespace {

std::vector<int> parse_int_list(const std::string& s) {
  std::vector<int> out;
  std::istringstream is(s);
  std::string cell;
  while (std::getline(is, cell, ','))
    if (!cell.empty()) out.push_back(std::stoi(cell));
  return out;
}

}  // namespace

RunReport read_run_report(const std::string& dir) {
  namespace fs = std::filesystem;
  RunReport report;

  std::ifstream cfg(fs::path(dir) / "config.txt");
  if (!cfg) throw TrainingAbort("missing config.txt in " + dir);
  std::string line;
  while (std::getline(cfg, line)) {
    auto eq = line.find('=');
    if (eq != std::string::npos)
      report.config_echo.emplace_back(line.substr(0, eq), line.substr(eq + 1));
  }

  std::ifstream sum(fs::path(dir) / "summary.txt");
  if (!sum) throw TrainingAbort("missing summary.txt in " + dir);
  std::map<std::string, std::string> kv;
  while (std::getline(sum, line)) {
    auto colon = line.find(": ");
    if (colon != std::string::npos) kv[line.substr(0, colon)] = line.substr(colon + 2);
    else if (line.size() > 1 && line.back() == ':') kv[line.substr(0, line.size() - 1)] = "";
  }
  report.task_name = kv["task"];
  report.method = kv["method"];
  {
    std::istringstream is(kv["labels"]);
    std::string cell;
    while (std::getline(is, cell, ',')) report.labels.push_back(cell);
  }
  int phases = kv.count("phases") ? std::stoi(kv["phases"]) : 0;
  for (int p = 1; p <= phases; ++p)
    report.phase_new_concepts.push_back(
        parse_int_list(kv["phase_" + std::to_string(p) + "_new_concepts"]));
  report.phase_transitions = parse_int_list(kv["phase_transitions"]);
  for (int f : parse_int_list(kv["forced_transitions"]))
    report.forced_transitions.push_back(f != 0);
  report.gate_pass_iterations = parse_int_list(kv["gate_pass_iterations"]);
  if (kv.count("skipped_empty_spaces"))
    report.skipped_empty_spaces = std::stol(kv["skipped_empty_spaces"]);
  if (kv.count("numeric_violations"))
    report.numeric_violations = std::stol(kv["numeric_violations"]);
  if (kv.count("total_wall_ms")) report.total_wall_ms = std::stol(kv["total_wall_ms"]);

  std::ifstream csv(fs::path(dir) / "metrics.csv");
  if (!csv) throw TrainingAbort("missing metrics.csv in " + dir);
  std::getline(csv, line);  // header
  while (std::getline(csv, line)) {
    if (line.empty()) continue;
    std::istringstream is(line);
    std::string cell;
    MetricsRecord r;
    std::getline(is, cell, ',');
    r.iteration = std::stoi(cell);
    std::getline(is, cell, ',');
    r.phase = std::stoi(cell);
    std::getline(is, cell, ',');
    r.seq_acc = std::stod(cell);
    std::getline(is, cell, ',');
    r.mean_acc = std::stod(cell);
    std::getline(is, cell, ',');
    r.space_mean = std::stod(cell);
    std::getline(is, cell, ',');
    r.skipped = std::stol(cell);
    std::getline(is, cell, ',');
    r.wall_ms = std::stol(cell);
    while (std::getline(is, cell, ',')) r.per_label_acc.push_back(std::stod(cell));
    report.records.push_back(std::move(r));
  }
  return report;
}

}  // namespace cabl::training
