#include <filesystem>

#include "cabl/trainer.hpp"
#include "doctest.h"

using namespace cabl::training;
using cabl::perception::Example;
using cabl::perception::TrainingAbort;
using cabl::tasks::Task;

namespace {

TrainConfig quick_config(Method method, int iters, std::uint64_t seed) {
  TrainConfig c;
  c.method = method;
  c.max_iterations = iters;
  c.max_iterations_per_phase = std::min(1000, iters);
  c.seed = seed;
  c.dataset.train_size = 1500;
  c.dataset.val_size = 150;
  return c;
}

}  // namespace

TEST_CASE("phase gate: strict uniform-guessing baseline") {
  std::map<int, double> acc{{0, 0.15}, {1, 0.15}, {2, 0.15}};
  CHECK(phase_gate(acc, {0, 1, 2}, 10));

  acc[1] = 0.10;  // exactly the baseline fails the strict test
  CHECK_FALSE(phase_gate(acc, {0, 1, 2}, 10));

  CHECK(phase_gate({}, {}, 10));  // vacuous

  CHECK_THROWS_AS(phase_gate({{0, 0.5}}, {0, 7}, 10), TrainingAbort);
}

TEST_CASE("schedule_data: domain filter and final-phase behaviour") {
  Task task = Task::addition({10, 1});
  cabl::perception::SyntheticDatasetSpec spec;
  spec.num_classes = 10;
  spec.seed = 42;
  spec.train_size = 5000;
  spec.val_size = 10;
  auto [train, val] = cabl::perception::generate_dataset(spec, task);

  auto all = schedule_data(train, {0, 1}, /*final_phase=*/true);
  CHECK(all.size() == train.size());

  auto subset = schedule_data(train, {0, 1}, /*final_phase=*/false);
  for (const Example* ex : subset) {
    for (int c : ex->true_concepts) CHECK(c <= 1);
    CHECK(std::get<std::int64_t>(ex->target) <= 2);
  }
  // uniform labels: both digits land in {0,1} with probability (2/10)^2
  double fraction = static_cast<double>(subset.size()) / static_cast<double>(train.size());
  CHECK(fraction == doctest::Approx(0.04).epsilon(0.35));

  CHECK_THROWS_AS(schedule_data(train, {}, /*final_phase=*/false), TrainingAbort);
}

TEST_CASE("run_training: near-separable decimal d=1 converges with cabl") {
  Task task = Task::addition({10, 1});
  TrainConfig c = quick_config(Method::CAbl, 2000, 11);
  c.dataset.noise_sigma = 1e-6;
  RunReport report = run_training(task, c);
  CHECK(report.final_record().seq_acc >= 0.99);
  CHECK(report.phase_new_concepts.size() == 5);
}

TEST_CASE("run_training: abl baseline has no phase transitions") {
  Task task = Task::addition({10, 1});
  RunReport report = run_training(task, quick_config(Method::Abl, 300, 11));
  CHECK(report.phase_transitions.empty());
  CHECK(report.phase_new_concepts.size() == 1);
  CHECK(report.records.size() == 6);
}

TEST_CASE("run_training: later-phase concepts stay near chance until their phase begins") {
  Task task = Task::addition({10, 1});
  TrainConfig c = quick_config(Method::CAbl, 2000, 19);
  RunReport report = run_training(task, c);
  REQUIRE(report.phase_transitions.size() == 4);
  REQUIRE_FALSE(report.any_forced());

  // a concept introduced in the last phase
  int late_concept = report.phase_new_concepts.back().front();
  int phase_start = report.phase_transitions.back();
  for (const MetricsRecord& r : report.records) {
    if (r.iteration <= phase_start)
      CHECK(r.per_label_acc[static_cast<std::size_t>(late_concept)] <= 0.35);
  }
  CHECK(report.final_record().per_label_acc[static_cast<std::size_t>(late_concept)] > 0.5);
}

TEST_CASE("run_training: identical configs give identical trajectories") {
  Task task = Task::addition({10, 1});
  TrainConfig c = quick_config(Method::CAbl, 400, 5);
  RunReport a = run_training(task, c);
  RunReport b = run_training(task, c);
  REQUIRE(a.records.size() == b.records.size());
  for (std::size_t i = 0; i < a.records.size(); ++i) {
    CHECK(a.records[i].iteration == b.records[i].iteration);
    CHECK(a.records[i].phase == b.records[i].phase);
    CHECK(a.records[i].seq_acc == b.records[i].seq_acc);       // exact doubles
    CHECK(a.records[i].mean_acc == b.records[i].mean_acc);
    CHECK(a.records[i].space_mean == b.records[i].space_mean);
    CHECK(a.records[i].skipped == b.records[i].skipped);
    CHECK(a.records[i].per_label_acc == b.records[i].per_label_acc);
  }
  CHECK(a.phase_transitions == b.phase_transitions);
  CHECK(a.gate_pass_iterations == b.gate_pass_iterations);
}

TEST_CASE("run_training: oracle and generic abduction produce the same trajectory") {
  Task task = Task::addition({10, 1});
  TrainConfig c = quick_config(Method::CAbl, 300, 9);
  RunReport with_oracle = run_training(task, c);
  c.use_oracle_spaces = false;
  RunReport with_generic = run_training(task, c);
  REQUIRE(with_oracle.records.size() == with_generic.records.size());
  for (std::size_t i = 0; i < with_oracle.records.size(); ++i) {
    CHECK(with_oracle.records[i].mean_acc == with_generic.records[i].mean_acc);
    CHECK(with_oracle.records[i].space_mean == with_generic.records[i].space_mean);
  }
}

TEST_CASE("run_training: chess task goes end to end") {
  Task task = Task::chess({5, 2});
  TrainConfig c = quick_config(Method::CAbl, 300, 3);
  c.tau = 2;
  c.dataset.num_classes = 6;
  RunReport report = run_training(task, c);
  CHECK(report.records.size() == 6);
  CHECK(report.task_name == "chess");
}

TEST_CASE("metrics csv header is stable") {
  Task task = Task::addition({10, 1});
  CHECK(metrics_csv_header(task.kb().concept_names()) ==
        "iteration,phase,seq_acc,mean_acc,space_mean,skipped,wall_ms,"
        "acc_zero,acc_one,acc_two,acc_three,acc_four,acc_five,acc_six,acc_seven,"
        "acc_eight,acc_nine");
}

TEST_CASE("run report round-trips through the report directory") {
  namespace fs = std::filesystem;
  Task task = Task::addition({10, 1});
  RunReport report = run_training(task, quick_config(Method::CAbl, 200, 2));
  fs::path dir = fs::temp_directory_path() / "cabl_report_roundtrip";
  fs::remove_all(dir);
  write_run_report(dir.string(), report);
  RunReport loaded = read_run_report(dir.string());
  CHECK(loaded.task_name == report.task_name);
  CHECK(loaded.method == report.method);
  CHECK(loaded.labels == report.labels);
  REQUIRE(loaded.records.size() == report.records.size());
  for (std::size_t i = 0; i < loaded.records.size(); ++i) {
    CHECK(loaded.records[i].iteration == report.records[i].iteration);
    CHECK(loaded.records[i].mean_acc ==
          doctest::Approx(report.records[i].mean_acc).epsilon(1e-6));
  }
  CHECK(loaded.phase_transitions == report.phase_transitions);
  CHECK(loaded.gate_pass_iterations == report.gate_pass_iterations);
}

TEST_CASE("compare_runs: identical reports give zero deltas") {
  Task task = Task::addition({10, 1});
  RunReport report = run_training(task, quick_config(Method::CAbl, 200, 2));
  ComparisonSummary cmp = compare_runs(report, report);
  CHECK(cmp.a.final_mean_acc == cmp.b.final_mean_acc);
  CHECK(cmp.a.iterations_to_90pct == cmp.b.iterations_to_90pct);
  for (std::size_t p = 0; p < cmp.a.forgetting.size(); ++p)
    CHECK(cmp.a.forgetting[p] == cmp.b.forgetting[p]);
}

TEST_CASE("compare_runs: degenerate inputs are rejected") {
  Task addition = Task::addition({10, 1});
  RunReport a = run_training(addition, quick_config(Method::CAbl, 200, 2));
  RunReport empty = a;
  empty.records.clear();
  CHECK_THROWS_AS(compare_runs(a, empty), TrainingAbort);

  RunReport other = a;
  other.task_name = "chess";
  CHECK_THROWS_AS(compare_runs(a, other), TrainingAbort);
}

TEST_CASE("config invariants are validated") {
  TrainConfig c;
  c.gate_check_every = 500;
  c.max_iterations_per_phase = 100;
  CHECK_THROWS_AS(c.validate(), TrainingAbort);

  TrainConfig d;
  d.max_iterations_per_phase = 5000;
  d.max_iterations = 2000;
  CHECK_THROWS_AS(d.validate(), TrainingAbort);
}

TEST_CASE("sustained 90 percent crossing ignores transient peaks") {
  RunReport r;
  r.task_name = "addition";
  auto rec = [](int it, double acc) {
    MetricsRecord m;
    m.iteration = it;
    m.mean_acc = acc;
    return m;
  };
  // rises, collapses, ends low: final 0.10, threshold 0.09
  r.records = {rec(50, 0.12), rec(100, 0.18), rec(150, 0.05), rec(200, 0.095),
               rec(250, 0.10)};
  CHECK(r.iterations_to_90pct() == 200);

  // monotone curve: first crossing
  r.records = {rec(50, 0.2), rec(100, 0.5), rec(150, 0.65), rec(200, 0.7)};
  CHECK(r.iterations_to_90pct() == 150);
}
